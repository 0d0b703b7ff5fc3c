"""Fock-core tests: ladder operators, two-mode mixing, probabilities.

The two-mode transformation is cross-checked against an independent
oracle: the truncated Fock-space unitary expm(i * theta * (a'b + ab'))
whose single-particle matrix is [[cos t, i sin t], [i sin t, cos t]].
"""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from hardysim import (
    CapacityError,
    ConfigurationError,
    ValidationError,
    add_photon,
    apply_two_mode,
    basis_state,
    combine,
    inner_product,
    pattern_probability,
    vacuum_state,
)
from hardysim.fock import ModeRegistry, component_probability

BALANCED = ((math.sqrt(0.5), 1j * math.sqrt(0.5)), (1j * math.sqrt(0.5), math.sqrt(0.5)))


def two_arm_registry():
    return ModeRegistry(("a", "b"))


# --- construction and ladder -------------------------------------------------


def test_vacuum_single_term_amplitude_one():
    state = vacuum_state(two_arm_registry())
    assert state.amplitude({}) == 1.0 + 0j
    assert state.norm() == pytest.approx(1.0, abs=1e-15)


def test_duplicate_mode_label_rejected():
    with pytest.raises(ConfigurationError):
        ModeRegistry(("a", "a"))


def test_add_photon_ladder_factors():
    state = vacuum_state(two_arm_registry())
    one = add_photon(state, ("a", 0))
    assert one.amplitude({("a", 0): 1}) == pytest.approx(1.0)
    two = add_photon(one, ("a", 0))
    assert two.amplitude({("a", 0): 2}) == pytest.approx(math.sqrt(2.0))
    # renormalising recovers the unit-amplitude |2> ket
    assert two.normalized().amplitude({("a", 0): 2}) == pytest.approx(1.0)


def test_add_photon_to_both_arms():
    state = vacuum_state(two_arm_registry())
    pair = add_photon(add_photon(state, ("a", 0)), ("b", 0))
    assert pair.amplitude({("a", 0): 1, ("b", 0): 1}) == pytest.approx(1.0)


def test_photon_cap_enforced():
    state = vacuum_state(two_arm_registry(), cap=2)
    two = add_photon(add_photon(state, ("a", 0)), ("a", 0))
    with pytest.raises(CapacityError):
        add_photon(two, ("b", 0))


# --- two-mode transformation -------------------------------------------------


def test_balanced_splitter_on_single_photon():
    state = basis_state(two_arm_registry(), {("a", 0): 1})
    out = apply_two_mode(state, ("a", 0), ("b", 0), BALANCED)
    assert out.amplitude({("a", 0): 1}) == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert out.amplitude({("b", 0): 1}) == pytest.approx(1j * math.sqrt(0.5), abs=1e-15)


def test_hom_bunching_kills_the_coincidence_term():
    state = basis_state(two_arm_registry(), {("a", 0): 1, ("b", 0): 1})
    out = apply_two_mode(state, ("a", 0), ("b", 0), BALANCED)
    assert abs(out.amplitude({("a", 0): 1, ("b", 0): 1})) < 1e-14
    assert out.amplitude({("a", 0): 2}) == pytest.approx(1j / math.sqrt(2.0), abs=1e-14)
    assert out.amplitude({("b", 0): 2}) == pytest.approx(1j / math.sqrt(2.0), abs=1e-14)


def test_distinguishable_pair_keeps_half_coincidence():
    # photons in orthogonal wave packets: expand the four independent-mode
    # amplitudes by hand -> cross-arm terms t*t and (ir)*(ir), total 1/2
    state = basis_state(two_arm_registry(), {("a", 0): 1, ("b", 1): 1})
    out = state
    for internal in (0, 1):
        out = apply_two_mode(out, ("a", internal), ("b", internal), BALANCED)
    coincidence = pattern_probability(out, {"a": 1, "b": 1})
    assert coincidence == pytest.approx(0.5, abs=1e-12)


def test_non_unitary_matrix_rejected():
    state = basis_state(two_arm_registry(), {("a", 0): 1})
    with pytest.raises(ValidationError):
        apply_two_mode(state, ("a", 0), ("b", 0), ((1.0, 0.0), (0.0, 1.1)))


def test_same_mode_rejected():
    state = basis_state(two_arm_registry(), {("a", 0): 1})
    with pytest.raises(ValidationError):
        apply_two_mode(state, ("a", 0), ("a", 0), BALANCED)


def _dense_oracle_matrices(cap):
    dim = cap + 1
    lower = np.diag([math.sqrt(n) for n in range(1, dim)], 1)  # annihilator
    a = np.kron(lower, np.eye(dim))
    b = np.kron(np.eye(dim), lower)
    return a, b


def _to_dense(state, cap):
    dim = cap + 1
    vec = np.zeros(dim * dim, dtype=complex)
    for occ, amp in state.terms.items():
        vec[occ[0] * dim + occ[2]] = amp  # internal 0 of arms a and b
    return vec


@pytest.mark.parametrize("theta", [0.1, math.pi / 4, 1.1, 2.9])
def test_matches_exponentiated_hopping_oracle(theta):
    # independent route: exact Fock-space unitary from the hopping generator
    cap = 4
    reg = two_arm_registry()
    a, b = _dense_oracle_matrices(cap)
    unitary = expm(1j * theta * (a.conj().T @ b + b.conj().T @ a))

    rng = np.random.default_rng(4)
    occupations = [(na, nb) for na in range(3) for nb in range(3) if na + nb <= cap]
    amps = rng.normal(size=len(occupations)) + 1j * rng.normal(size=len(occupations))
    amps /= np.linalg.norm(amps)
    state = combine(
        [
            (amp, basis_state(reg, {("a", 0): na, ("b", 0): nb}, cap=cap))
            for amp, (na, nb) in zip(amps, occupations)
        ]
    )

    matrix = (
        (math.cos(theta), 1j * math.sin(theta)),
        (1j * math.sin(theta), math.cos(theta)),
    )
    evolved = apply_two_mode(state, ("a", 0), ("b", 0), matrix)
    expected = unitary @ _to_dense(state, cap)
    assert np.allclose(_to_dense(evolved, cap), expected, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.05, math.pi / 2 - 0.05), min_size=1, max_size=6))
def test_norm_preserved_by_splitter_sequences(angles):
    reg = ModeRegistry(("a", "b", "c"))
    state = basis_state(reg, {("a", 0): 1, ("b", 0): 1})
    arms = [("a", "b"), ("b", "c"), ("a", "c")]
    for i, angle in enumerate(angles):
        t = math.cos(angle)
        r = math.sin(angle)
        matrix = ((t, 1j * r), (1j * r, t))
        m1, m2 = arms[i % len(arms)]
        state = apply_two_mode(state, (m1, 0), (m2, 0), matrix)
    assert abs(state.norm() - 1.0) < 1e-12


def test_photon_number_conserved_per_term():
    reg = ModeRegistry(("a", "b", "c"))
    state = basis_state(reg, {("a", 0): 2})
    for m1, m2 in (("a", "b"), ("b", "c"), ("a", "c")):
        state = apply_two_mode(state, (m1, 0), (m2, 0), BALANCED)
    assert state.total_photons() == {2}


def test_internal_labels_never_interfere():
    # same spatial pattern, different internal populations: the pattern
    # probability must be the sum of squared amplitudes, not of amplitudes
    reg = two_arm_registry()
    mixed = combine(
        [
            (math.sqrt(0.5), basis_state(reg, {("a", 0): 1})),
            (-math.sqrt(0.5), basis_state(reg, {("a", 1): 1})),
        ]
    )
    assert pattern_probability(mixed, {"a": 1}) == pytest.approx(1.0, abs=1e-12)
    assert component_probability(mixed, {("a", 0): 1, ("a", 1): 0}) == pytest.approx(0.5)


# --- probabilities and inner products ---------------------------------------


def test_full_constraint_on_normalized_single_term():
    state = basis_state(two_arm_registry(), {("a", 0): 1})
    assert pattern_probability(state, {"a": 1, "b": 0}) == pytest.approx(1.0)


def test_exhaustive_partition_sums_to_one():
    state = basis_state(two_arm_registry(), {("a", 0): 1, ("b", 0): 1})
    out = apply_two_mode(state, ("a", 0), ("b", 0), BALANCED)
    total = sum(
        pattern_probability(out, {"a": na, "b": nb})
        for na, nb in itertools.product(range(3), repeat=2)
        if na + nb == 2
    )
    assert total == pytest.approx(1.0, abs=1e-12)


def test_unknown_pattern_mode_rejected():
    state = vacuum_state(two_arm_registry())
    with pytest.raises(ValidationError):
        pattern_probability(state, {"nope": 0})


def test_inner_product_norm_and_orthogonality():
    reg = two_arm_registry()
    vac = vacuum_state(reg)
    one = basis_state(reg, {("a", 0): 1})
    assert inner_product(one, one) == pytest.approx(1.0)
    assert inner_product(vac, one) == 0j


def test_inner_product_conjugates_the_left_side():
    reg = two_arm_registry()
    left = combine([(0.6, basis_state(reg, {("a", 0): 1})), (0.8j, basis_state(reg, {("b", 0): 1}))])
    right = basis_state(reg, {("b", 0): 1})
    assert inner_product(left, right) == pytest.approx(-0.8j)


def test_inner_product_registry_mismatch():
    with pytest.raises(ValidationError):
        inner_product(vacuum_state(two_arm_registry()), vacuum_state(ModeRegistry(("x", "y"))))


def test_prune_removes_cancellation_residue():
    reg = two_arm_registry()
    ket = basis_state(reg, {("a", 0): 1})
    out = combine([(1.0, ket), (-1.0 + 1e-16, ket)])
    assert out.terms == {}
