"""Circuit description tests: parser, serialisation, evolution."""

import math

import pytest

from hardysim import (
    NetworkParseError,
    ValidationError,
    apply_network,
    basis_state,
    parse_network,
    serialize_network,
    tuning_residual,
    vacuum_state,
    with_shutters,
)
from hardysim.fock import ModeRegistry, pattern_probability
from hardysim.network import Element, NetworkDescription

ROOT_HALF = repr(math.sqrt(0.5))

SINGLE_MZ = f"""
# one tuned interferometer: a photon entering arm a leaves in arm b
mode a b
bs a b {ROOT_HALF}
bs a b {ROOT_HALF}
"""

BLOCKED_MZ = f"""
mode a b l
bs a b {ROOT_HALF}
shutter b closed loss=l
bs a b {ROOT_HALF}
"""


# --- parsing -----------------------------------------------------------------


def test_parse_minimal_network():
    net = parse_network("mode a b\nbs a b 0.7071")
    assert net.registry == ("a", "b")
    assert len(net.elements) == 1
    assert net.elements[0] == Element.beamsplitter("a", "b", 0.7071)


def test_parse_default_transmissivity():
    net = parse_network("mode a b\nbs a b")
    assert net.elements[0].transmissivity == pytest.approx(0.70710678)


def test_parse_comments_and_blank_lines():
    net = parse_network("# header\n\nmode a b  # trailing\nbs a b\n")
    assert net.registry == ("a", "b")


def test_parse_all_directives_round_trip():
    text = (
        "mode a b l g\n"
        f"bs a b {ROOT_HALF}\n"
        "phase a 0.25\n"
        "shutter b closed loss=l\n"
        "annihilate a b gamma=g\n"
    )
    net = parse_network(text)
    assert net.loss_modes == ("l",)
    assert net.gamma_mode == "g"
    assert parse_network(serialize_network(net)) == net


@pytest.mark.parametrize(
    "text, fragment, line",
    [
        ("bs a a", "beamsplitter modes must differ", 1),
        ("mode a\nbs a a", "beamsplitter modes must differ", 2),
        ("mode a b\nbs a c", "undeclared mode", 2),
        ("mode a b\nbs a b 1.5", "strictly between 0 and 1", 2),
        ("mode a b\nbs a b 0", "strictly between 0 and 1", 2),
        ("mode a b\nbs a", "optional transmissivity", 2),
        ("mode a b\nsplit a b", "unknown directive", 2),
        ("mode a b\nphase a x", "bad phase angle", 2),
        ("mode a b\nshutter a ajar loss=b", "open or closed", 2),
        ("mode a b\nshutter a closed loss=c", "undeclared mode", 2),
        ("mode a b\nshutter a closed drop=b", "expected loss=<mode>", 2),
        ("mode a\nmode a", "duplicate mode", 2),
        ("mode a b\nannihilate a b", "gamma=<mode>", 2),
    ],
)
def test_parse_errors_carry_line_numbers(text, fragment, line):
    with pytest.raises(NetworkParseError) as err:
        parse_network(text)
    assert fragment in str(err.value)
    assert f"line {line}" in str(err.value)
    assert err.value.line == line


def test_bs_same_mode_message_format():
    with pytest.raises(NetworkParseError, match="beamsplitter modes must differ, line 1"):
        parse_network("bs a a")


# --- evolution ---------------------------------------------------------------


def single_photon(net, arm="a"):
    reg = ModeRegistry(net.registry)
    return basis_state(reg, {(arm, 0): 1})


def test_empty_element_list_is_identity():
    net = NetworkDescription.from_elements(("a", "b"), ())
    state = single_photon(net)
    assert apply_network(net, state).terms == state.terms


def test_tuned_interferometer_exits_one_port():
    net = parse_network(SINGLE_MZ)
    out = apply_network(net, single_photon(net))
    assert pattern_probability(out, {"b": 1}) == pytest.approx(1.0, abs=1e-12)
    assert pattern_probability(out, {"a": 1}) == pytest.approx(0.0, abs=1e-12)


def test_blocked_interferometer_restores_the_dark_port():
    net = parse_network(BLOCKED_MZ)
    out = apply_network(net, single_photon(net))
    # with the crossing arm blocked, the dark port lights up with p = 1/4
    assert pattern_probability(out, {"a": 1}) == pytest.approx(0.25, abs=1e-12)
    assert pattern_probability(out, {"b": 1}) == pytest.approx(0.25, abs=1e-12)
    assert pattern_probability(out, {"l": 1}) == pytest.approx(0.5, abs=1e-12)
    assert abs(out.norm() - 1.0) < 1e-12


def test_with_shutters_toggles_and_validates():
    net = parse_network(BLOCKED_MZ)
    reopened = with_shutters(net, {"b": "open"})
    out = apply_network(reopened, single_photon(reopened))
    assert pattern_probability(out, {"b": 1}) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValidationError):
        with_shutters(net, {"a": "closed"})


def test_annihilator_moves_pairs_to_gamma():
    text = "mode a b g\nannihilate a b gamma=g"
    net = parse_network(text)
    reg = ModeRegistry(net.registry)
    pair = basis_state(reg, {("a", 0): 1, ("b", 0): 1})
    out = apply_network(net, pair)
    assert out.amplitude({("g", 0): 2}) == pytest.approx(1.0)
    # a lone photon is untouched
    one = basis_state(reg, {("a", 0): 1})
    assert apply_network(net, one).terms == one.terms


def test_commuting_elements_on_disjoint_modes():
    reg_labels = ("a", "b", "c", "d")
    first = NetworkDescription.from_elements(
        reg_labels,
        (Element.beamsplitter("a", "b"), Element.beamsplitter("c", "d"), Element.phase("c", 0.4)),
    )
    second = NetworkDescription.from_elements(
        reg_labels,
        (Element.phase("c", 0.4), Element.beamsplitter("c", "d"), Element.beamsplitter("a", "b")),
    )
    reg = ModeRegistry(reg_labels)
    state = basis_state(reg, {("a", 0): 1, ("c", 0): 1})
    out1 = apply_network(first, state)
    out2 = apply_network(second, state)
    for occ, amp in out1.terms.items():
        assert amp == pytest.approx(out2.terms.get(occ, 0j), abs=1e-12)


def test_norm_preserved_with_shutters_and_annihilator():
    text = (
        "mode a b l g\n"
        "bs a b 0.6\n"
        "shutter a closed loss=l\n"
        "annihilate a b gamma=g\n"
        "phase b 1.0\n"
        "bs a b 0.3\n"
    )
    net = parse_network(text)
    reg = ModeRegistry(net.registry)
    state = basis_state(reg, {("a", 0): 1, ("b", 0): 1})
    assert abs(apply_network(net, state).norm() - 1.0) < 1e-12


def test_state_registry_must_cover_network():
    net = parse_network("mode a b\nbs a b")
    with pytest.raises(ValidationError):
        apply_network(net, vacuum_state(ModeRegistry(("a", "x"))))


def test_tuning_residual_on_the_single_interferometer():
    net = parse_network(SINGLE_MZ)
    assert tuning_residual(net, "a", "a") < 1e-12
    assert tuning_residual(net, "a", "b") == pytest.approx(1.0, abs=1e-12)
