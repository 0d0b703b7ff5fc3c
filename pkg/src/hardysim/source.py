"""Photon-pair input states with tunable mutual distinguishability.

One photon enters arm e+ in a reference wave packet (internal label 0).
The other enters arm e- either in the same wave packet or, with
probability weight ``p``, in an orthogonal component (internal label 1).
Only the mutual overlap matters for any counting statistics here, so the
two-component decomposition is exact for a single pair; no spectral
integrals are needed.

``p`` can be set directly or derived from a relative arrival delay
through a Gaussian wave-packet overlap |o(delay)|^2 =
exp(-delay^2 / (2 tau^2)).  In delay mode an intrinsic floor
``p_disting`` composes with the delay overlap, so the distinguishable
fraction is ``1 - (1 - p_disting) * |o|^2``: flat sources recover the
plain ``1 - |o|^2`` law, while an imperfect source keeps its residual
distinguishability at zero delay the way a real pair source does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import fock
from .exceptions import ConfigurationError
from .fock import ModeRegistry, QuantumState

EXPLICIT_P = "explicit_p"
FROM_DELAY = "from_delay"

# Plausible coherence time for a few-nm interference filter in the near
# infrared; a plotting default, not a measured quantity.
DEFAULT_COHERENCE_FS = 430.0

INPUT_PLUS = "e+"
INPUT_MINUS = "e-"


@dataclass(frozen=True)
class SourceParams:
    p_disting: float = 0.0
    delay_fs: float = 0.0
    coherence_time_fs: float = DEFAULT_COHERENCE_FS
    mode: str = EXPLICIT_P

    def __post_init__(self):
        if not 0.0 <= self.p_disting <= 1.0:
            raise ConfigurationError(f"p_disting must lie in [0, 1], got {self.p_disting}")
        if self.coherence_time_fs <= 0.0:
            raise ConfigurationError("coherence time must be positive")
        if self.mode not in (EXPLICIT_P, FROM_DELAY):
            raise ConfigurationError(f"unknown source mode {self.mode!r}")


def overlap_from_delay(delay_fs: float, coherence_time_fs: float) -> float:
    """Squared wave-packet overlap |o(delay)|^2 = exp(-delay^2 / (2 tau^2))."""
    if coherence_time_fs <= 0.0:
        raise ConfigurationError("coherence time must be positive")
    x = delay_fs / coherence_time_fs
    return math.exp(-0.5 * x * x)


def effective_distinguishability(params: SourceParams) -> float:
    """The probability weight of the orthogonal wave-packet component."""
    if params.mode == EXPLICIT_P:
        return params.p_disting
    overlap = overlap_from_delay(params.delay_fs, params.coherence_time_fs)
    return 1.0 - (1.0 - params.p_disting) * overlap


def prepare_pair(
    reg: ModeRegistry, params: SourceParams, cap: int = fock.PHOTON_CAP_DEFAULT
) -> QuantumState:
    """Two-photon input: one photon per input arm, normalised.

    The e+ photon carries internal label 0; the e- photon is
    sqrt(1-p)|label 0> + sqrt(p)|label 1> with p from ``params``.
    """
    for label in (INPUT_PLUS, INPUT_MINUS):
        if label not in reg:
            raise ConfigurationError(f"registry lacks input arm {label!r}")
    p = effective_distinguishability(params)
    if not 0.0 <= p <= 1.0:
        raise ConfigurationError(f"distinguishability {p} outside [0, 1]")
    one_plus = fock.add_photon(fock.vacuum_state(reg, cap), (INPUT_PLUS, 0))
    parallel = fock.add_photon(one_plus, (INPUT_MINUS, 0))
    orthogonal = fock.add_photon(one_plus, (INPUT_MINUS, 1))
    return fock.combine(
        [(math.sqrt(1.0 - p), parallel), (math.sqrt(p), orthogonal)]
    )
