"""Sparse multi-mode bosonic Fock states and exact mode transformations.

A state is a map from occupation vectors to complex amplitudes over a
registry of modes.  Each spatial arm of the optical network owns two
*internal* modes (labels 0 and 1) that stand for orthogonal wave-packet
components of a photon.  Two internal components are sufficient to
describe arbitrary pairwise distinguishability of a photon pair: the
second photon either shares the first one's wave packet (label 0) or
sits in the orthogonal remainder (label 1).  All optical elements act
identically on both internal labels, so amplitudes whose internal-label
populations differ never interfere; this is exactly the mechanism that
degrades Hong-Ou-Mandel bunching as photons become distinguishable.

With at most a pair of photons over a dozen-odd arms the sparse map
holds only a handful of terms, which keeps the evolution exact and the
individual amplitudes directly inspectable in tests.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exceptions import CapacityError, ConfigurationError, ValidationError

N_INTERNAL = 2
PHOTON_CAP_DEFAULT = 2
PRUNE_THRESHOLD = 1e-14
UNITARITY_TOL = 1e-10

# Mode addresses are (spatial label, internal label) pairs.
ModeId = tuple[str, int]

_FACT = [math.factorial(n) for n in range(9)]
_SQRT_FACT = [math.sqrt(f) for f in _FACT]


@dataclass(frozen=True)
class ModeRegistry:
    """Ordered spatial arms, each carrying ``N_INTERNAL`` bosonic modes.

    Flat mode index = ``2 * spatial_index + internal_label``; occupation
    vectors follow this layout.
    """

    spatial: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.spatial:
            raise ConfigurationError("registry needs at least one mode")
        index: dict[str, int] = {}
        for i, label in enumerate(self.spatial):
            if not label:
                raise ConfigurationError("empty mode label")
            if label in index:
                raise ConfigurationError(f"duplicate mode label {label!r}")
            index[label] = i
        object.__setattr__(self, "_index", index)

    @property
    def n_flat(self) -> int:
        return N_INTERNAL * len(self.spatial)

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def flat_index(self, label: str, internal: int = 0) -> int:
        if label not in self._index:
            raise ValidationError(f"mode {label!r} is not registered")
        if internal not in (0, 1):
            raise ValidationError(f"internal label must be 0 or 1, got {internal}")
        return N_INTERNAL * self._index[label] + internal

    def slots(self, label: str) -> tuple[int, int]:
        """Both flat indices (internal 0 and 1) of a spatial arm."""
        base = self.flat_index(label, 0)
        return base, base + 1


def registry(labels: Sequence[str]) -> ModeRegistry:
    return ModeRegistry(tuple(labels))


@dataclass(frozen=True)
class QuantumState:
    """Sparse ket: occupation vector -> complex amplitude.

    Treated as immutable; every operation returns a new state.  ``cap``
    bounds the total photon number any term may hold.
    """

    registry: ModeRegistry
    terms: dict[tuple[int, ...], complex]
    cap: int = PHOTON_CAP_DEFAULT

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def normalized(self) -> "QuantumState":
        n = self.norm()
        if n == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return QuantumState(self.registry, {k: v / n for k, v in self.terms.items()}, self.cap)

    def amplitude(self, occupations: Mapping[ModeId, int]) -> complex:
        """Amplitude of the basis ket with the given occupations (zero elsewhere)."""
        occ = [0] * self.registry.n_flat
        for (label, internal), n in occupations.items():
            occ[self.registry.flat_index(label, internal)] = n
        return self.terms.get(tuple(occ), 0j)

    def spatial_counts(self, occ: tuple[int, ...]) -> tuple[int, ...]:
        """Collapse a flat occupation vector to per-arm photon counts."""
        return tuple(occ[i] + occ[i + 1] for i in range(0, len(occ), N_INTERNAL))

    def total_photons(self) -> set[int]:
        """Distinct total photon numbers across stored terms."""
        return {sum(occ) for occ in self.terms}


def vacuum_state(reg: ModeRegistry, cap: int = PHOTON_CAP_DEFAULT) -> QuantumState:
    """The no-photon state; single term with amplitude 1."""
    if cap < 1:
        raise ConfigurationError("photon cap must be at least 1")
    return QuantumState(reg, {tuple([0] * reg.n_flat): 1.0 + 0j}, cap)


def basis_state(
    reg: ModeRegistry, occupations: Mapping[ModeId, int], cap: int = PHOTON_CAP_DEFAULT
) -> QuantumState:
    """Basis ket with the given occupations; convenience for tests and targets."""
    occ = [0] * reg.n_flat
    total = 0
    for (label, internal), n in occupations.items():
        if n < 0:
            raise ConfigurationError("occupations must be non-negative")
        occ[reg.flat_index(label, internal)] += n
        total += n
    if total > cap:
        raise CapacityError(f"{total} photons exceed the cap of {cap}")
    return QuantumState(reg, {tuple(occ): 1.0 + 0j}, cap)


def combine(parts: Iterable[tuple[complex, QuantumState]]) -> QuantumState:
    """Linear combination of states sharing one registry (no renormalisation)."""
    parts = list(parts)
    if not parts:
        raise ValidationError("combine needs at least one state")
    reg = parts[0][1].registry
    cap = parts[0][1].cap
    terms: dict[tuple[int, ...], complex] = {}
    for coeff, state in parts:
        if state.registry != reg:
            raise ValidationError("combined states must share a registry")
        for occ, amp in state.terms.items():
            terms[occ] = terms.get(occ, 0j) + coeff * amp
    return _pruned(QuantumState(reg, terms, cap))


def add_photon(state: QuantumState, mode: ModeId) -> QuantumState:
    """Apply the creation operator on ``mode``.

    Each term's occupation is incremented and its amplitude scaled by
    the bosonic factor sqrt(n + 1); the result is not renormalised, so
    preparing |2> from vacuum yields amplitude sqrt(2) until the caller
    normalises.
    """
    idx = state.registry.flat_index(*mode)
    terms: dict[tuple[int, ...], complex] = {}
    for occ, amp in state.terms.items():
        if sum(occ) + 1 > state.cap:
            raise CapacityError(f"adding a photon would exceed the cap of {state.cap}")
        n = occ[idx]
        new = list(occ)
        new[idx] = n + 1
        key = tuple(new)
        terms[key] = terms.get(key, 0j) + amp * math.sqrt(n + 1)
    return QuantumState(state.registry, terms, state.cap)


def _check_unitary(matrix: np.ndarray) -> None:
    if matrix.shape != (2, 2):
        raise ValidationError("two-mode transformation must be a 2x2 matrix")
    dev = np.abs(matrix.conj().T @ matrix - np.eye(2)).max()
    if dev > UNITARITY_TOL:
        raise ValidationError(f"matrix is not unitary (deviation {dev:.2e})")


def apply_two_mode(
    state: QuantumState,
    mode_a: ModeId,
    mode_b: ModeId,
    matrix,
    prune: float = PRUNE_THRESHOLD,
) -> QuantumState:
    """Evolve two modes by a single-particle unitary ``matrix``.

    Convention: column j of ``matrix`` is the image of input mode j, so
    creation operators transform as

        a_dag -> U[0,0] a_dag + U[1,0] b_dag
        b_dag -> U[0,1] a_dag + U[1,1] b_dag

    and a photon entering mode a leaves as U[0,0]|a> + U[1,0]|b>.  The
    occupied product (a_dag)^n (b_dag)^m is expanded multinomially per
    term, which is exact for any photon number under the cap.
    """
    mat = np.asarray(matrix, dtype=complex)
    _check_unitary(mat)
    ia = state.registry.flat_index(*mode_a)
    ib = state.registry.flat_index(*mode_b)
    if ia == ib:
        raise ValidationError("the two modes must differ")

    u_aa, u_ab = mat[0, 0], mat[0, 1]
    u_ba, u_bb = mat[1, 0], mat[1, 1]
    terms: dict[tuple[int, ...], complex] = {}
    for occ, amp in state.terms.items():
        na, nb = occ[ia], occ[ib]
        if na == 0 and nb == 0:
            terms[occ] = terms.get(occ, 0j) + amp
            continue
        base = list(occ)
        scale = amp / (_SQRT_FACT[na] * _SQRT_FACT[nb])
        for j in range(na + 1):
            ca = math.comb(na, j) * u_aa**j * u_ba ** (na - j)
            for k in range(nb + 1):
                c = ca * math.comb(nb, k) * u_ab**k * u_bb ** (nb - k)
                p = j + k
                q = na + nb - p
                base[ia], base[ib] = p, q
                key = tuple(base)
                terms[key] = terms.get(key, 0j) + scale * c * _SQRT_FACT[p] * _SQRT_FACT[q]
        base[ia], base[ib] = na, nb
    return _pruned(QuantumState(state.registry, terms, state.cap), prune)


def apply_phase(state: QuantumState, mode: ModeId, angle: float) -> QuantumState:
    """Multiply each term by exp(i * angle * n) for n photons in ``mode``."""
    idx = state.registry.flat_index(*mode)
    terms = {}
    for occ, amp in state.terms.items():
        n = occ[idx]
        terms[occ] = amp * cmath.exp(1j * angle * n) if n else amp
    return QuantumState(state.registry, terms, state.cap)


def pattern_probability(state: QuantumState, pattern: Mapping[str, int]) -> float:
    """Probability of observing the given per-arm photon counts.

    ``pattern`` constrains a subset of spatial arms; internal labels are
    summed per arm and unconstrained arms are marginalised, so the
    result is a genuine detection probability rather than an amplitude
    overlap.
    """
    slots = {label: state.registry.slots(label) for label in pattern}
    total = 0.0
    for occ, amp in state.terms.items():
        if all(occ[i0] + occ[i1] == pattern[label] for label, (i0, i1) in slots.items()):
            total += abs(amp) ** 2
    return total


def component_probability(state: QuantumState, constraint: Mapping[ModeId, int]) -> float:
    """Probability with internal labels resolved (diagnostic variant)."""
    idx = {state.registry.flat_index(*mode): n for mode, n in constraint.items()}
    total = 0.0
    for occ, amp in state.terms.items():
        if all(occ[i] == n for i, n in idx.items()):
            total += abs(amp) ** 2
    return total


def inner_product(a: QuantumState, b: QuantumState) -> complex:
    """<a|b> over the shared occupation basis."""
    if a.registry != b.registry:
        raise ValidationError("states live on different registries")
    acc = 0j
    for occ, amp_a in a.terms.items():
        amp_b = b.terms.get(occ)
        if amp_b is not None:
            acc += amp_a.conjugate() * amp_b
    return acc


def _pruned(state: QuantumState, threshold: float = PRUNE_THRESHOLD) -> QuantumState:
    """Drop residue from exact cancellations without touching real amplitudes."""
    terms = {k: v for k, v in state.terms.items() if abs(v) >= threshold}
    return QuantumState(state.registry, terms, state.cap)
