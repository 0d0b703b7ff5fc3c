# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled trial-sampling kernel.

Mirrors ``_kernel_numpy.run_kernel`` instruction for instruction: the
counter-based stream (splitmix64 finaliser over a Weyl sequence), the
slot layout, and the click/coincidence logic are identical, so the two
backends produce bitwise equal count tables.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef uint64_t SLOTS_PER_TRIAL = 16
cdef uint64_t SLOT_THIN = 1
cdef uint64_t SLOT_DARK = 8

cdef inline uint64_t _mix(uint64_t seed, uint64_t counter) noexcept nogil:
    cdef uint64_t z = seed + (counter + 1UL) * 0x9E3779B97F4A7C15UL
    z ^= z >> 30
    z *= 0xBF58476D1CE4E5B9UL
    z ^= z >> 27
    z *= 0x94D049BB133111EBUL
    z ^= z >> 31
    return z

cdef inline double _uniform(uint64_t seed, uint64_t counter) noexcept nogil:
    return <double>(_mix(seed, counter) >> 11) * (1.0 / 9007199254740992.0)


def run_kernel(
    double[::1] cum,
    int64_t[:, ::1] occ,
    int64_t[:, ::1] offsets,
    double[::1] efficiency,
    double[::1] dark,
    bint number_resolving,
    uint64_t seed,
    uint64_t start_trial,
    uint64_t n_trials,
):
    """Same contract as the numpy fallback; see that module's docstring."""
    cdef int64_t[::1] counts = np.zeros(4, dtype=np.int64)
    cdef int64_t discarded = 0
    cdef Py_ssize_t n_patterns = cum.shape[0]
    cdef uint64_t i, base, slot
    cdef Py_ssize_t k, d, j
    cdef double u
    cdef int64_t surv[4]
    cdef bint click[4]
    cdef int left, right, bad, pair

    with nogil:
        for i in range(n_trials):
            base = (start_trial + i) * SLOTS_PER_TRIAL
            u = _uniform(seed, base)
            k = 0
            while k < n_patterns - 1 and u >= cum[k]:
                k += 1

            slot = base + SLOT_THIN
            bad = 0
            for d in range(4):
                surv[d] = 0
                for j in range(occ[k, d]):
                    if _uniform(seed, slot) < efficiency[d]:
                        surv[d] += 1
                    slot += 1
                click[d] = surv[d] > 0
                if number_resolving and surv[d] >= 2:
                    bad = 1
            for d in range(4):
                if _uniform(seed, base + SLOT_DARK + d) < dark[d]:
                    click[d] = True

            left = (1 if click[0] else 0) + (1 if click[1] else 0)
            right = (1 if click[2] else 0) + (1 if click[3] else 0)
            if left > 1 or right > 1:
                bad = 1
            if bad:
                discarded += 1
            elif left == 1 and right == 1:
                pair = (2 if click[1] else 0) + (1 if click[3] else 0)
                counts[pair] += 1

    return np.asarray(counts), int(discarded)
