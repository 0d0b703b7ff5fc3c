"""Build script: compiles the optional Monte Carlo sampling kernel.

The package is fully functional without the extension (a vectorised
numpy implementation of the identical algorithm is selected at import
time), so the build degrades gracefully when Cython or a C compiler is
unavailable.
"""

from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = cythonize(
        [
            Extension(
                "hardysim._mc_kernel",
                ["src/hardysim/_mc_kernel.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
