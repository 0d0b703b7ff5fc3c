"""Two bunching-coupled Mach-Zehnder interferometers and their statistics.

Topology (per side s in {+, -}): an input splitter divides arm e_s into a
short arm v_s and a crossing arm w_s; an outer splitter attenuates the
short arm to balance what the central splitter removes; the central
splitter couples w+ and w-, where indistinguishable photons bunch; a
final splitter recombines the short arm with the returning crossing arm
into detectors c_s and d_s.  Path lengths are tuned so that a lone
photon entering e_s can only reach c_s; a d_s click therefore signals
that the other interferometer's photon obstructed the crossing arm.

Rail bookkeeping.  Elements move amplitude between registered arms with
fixed labels, so arms that physically change name along a beam keep one
registry label throughout:

=========  =================  =====================================
registry   after the central  after the final splitters
label      splitter carries   carries
=========  =================  =====================================
``e+``     outer-loss dump    outer-loss dump
``v+``     short arm v+       detector d+
``w+``     return arm u-      detector c-
``w-``     return arm u+      detector c+
``v-``     short arm v-       detector d-
``e-``     outer-loss dump    outer-loss dump
=========  =================  =====================================

``DETECTOR_RAILS`` and ``RETURN_RAILS`` expose this mapping so callers
can keep talking about c/d/u arms.  Each blockable arm (v+, v-, w+, w-)
carries a shutter with its own dump arm (lv+, lv-, lw+, lw-), open by
default.

The thought-experiment variant drops the outer splitters and replaces
the central splitter by an exact pair annihilator into a gamma arm; this
is the idealised two-particle version of the same paradox.

Measurement settings follow the shutter protocol: to project one side
onto its v arm, close that side's w shutter and accept either detector
on that side; to project onto the u arms, close both v shutters.  Joint
probabilities are reported per source pair (no renormalisation), with
post-selection carried entirely by the coincidence count rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from . import fock, network, source
from .exceptions import ConfigurationError, ValidationError
from .fock import ModeRegistry, QuantumState
from .network import Element, NetworkDescription
from .source import SourceParams

BALANCED_T = math.sqrt(0.5)

REGISTRY = ("e+", "e-", "v+", "v-", "w+", "w-", "lv+", "lv-", "lw+", "lw-")

# Detector name -> registry rail holding its amplitude after the final splitters.
DETECTOR_RAILS = {"c+": "w-", "d+": "v+", "c-": "w+", "d-": "v-"}
# Return-arm name -> registry rail holding it between central and final splitters.
RETURN_RAILS = {"u+": "w-", "u-": "w+"}

DETECTORS = ("c+", "d+", "c-", "d-")
LEFT_DETECTORS = ("c+", "d+")
RIGHT_DETECTORS = ("c-", "d-")
PAIRS = ("c+c-", "c+d-", "d+c-", "d+d-")

SETTING_NAMES = ("dd", "dv", "vd", "uu")

_THOUGHT_REGISTRY = ("e+", "e-", "w+", "w-", "gamma")
THOUGHT_DETECTOR_RAILS = {"c+": "w+", "d+": "e+", "c-": "w-", "d-": "e-"}
GAMMA = "gamma"


@dataclass(frozen=True)
class HardyParams:
    """Interferometer alignment and source quality knobs."""

    phase_plus: float = 0.0
    phase_minus: float = 0.0
    central_t: float = BALANCED_T
    outer_t: float = BALANCED_T
    source: SourceParams = field(default_factory=SourceParams)

    def __post_init__(self):
        for name, t in (("central_t", self.central_t), ("outer_t", self.outer_t)):
            if not 0.0 < t < 1.0:
                raise ConfigurationError(f"{name} must lie strictly between 0 and 1")


@dataclass(frozen=True)
class MeasurementSetting:
    """Shutter configuration plus the coincidence pairs summed for it."""

    name: str
    shutters: dict[str, str]
    count_rule: tuple[str, ...]


_SETTINGS = {
    "dd": MeasurementSetting("dd", {}, ("d+d-",)),
    "dv": MeasurementSetting("dv", {"w-": network.CLOSED}, ("d+c-", "d+d-")),
    "vd": MeasurementSetting("vd", {"w+": network.CLOSED}, ("c+d-", "d+d-")),
    "uu": MeasurementSetting(
        "uu", {"v+": network.CLOSED, "v-": network.CLOSED}, PAIRS
    ),
}


def setting(name: str) -> MeasurementSetting:
    try:
        return _SETTINGS[name]
    except KeyError:
        raise ValidationError(f"unknown setting {name!r}; expected one of {SETTING_NAMES}") from None


def _hardy_elements(params: HardyParams, include_final: bool = True) -> tuple[Element, ...]:
    elements = [
        # Input splitters: the short arm continues in e+/e- for now, the
        # crossing arm picks up i/sqrt(2) in w+/w-.
        Element.beamsplitter("e+", "w+", BALANCED_T),
        Element.beamsplitter("e-", "w-", BALANCED_T),
        # Outer splitters: the reflection continues the short arm into
        # v+/v-, the transmitted remainder stays behind in e+/e- as the
        # balancing loss.
        Element.beamsplitter("e+", "v+", params.outer_t),
        Element.beamsplitter("e-", "v-", params.outer_t),
        Element.shutter("w+", network.OPEN, "lw+"),
        Element.shutter("w-", network.OPEN, "lw-"),
        Element.shutter("v+", network.OPEN, "lv+"),
        Element.shutter("v-", network.OPEN, "lv-"),
        # Central splitter: transmission carries w+ onward as the return
        # arm u- (rail w+) and reflects into u+ (rail w-), and mirrored.
        Element.beamsplitter("w+", "w-", params.central_t),
        Element.phase("v+", params.phase_plus),
        Element.phase("v-", params.phase_minus),
    ]
    if include_final:
        elements += [
            # Final splitters, oriented so the tuned single-photon
            # amplitude cancels on the d rails (v+ and v-).
            Element.beamsplitter("v+", "w-", BALANCED_T),
            Element.beamsplitter("v-", "w+", BALANCED_T),
        ]
    return tuple(elements)


def build_hardy_network(params: HardyParams | None = None) -> NetworkDescription:
    """The seven-splitter two-interferometer circuit of the experiment."""
    params = params or HardyParams()
    return NetworkDescription.from_elements(REGISTRY, _hardy_elements(params))


def build_thought_network() -> NetworkDescription:
    """Idealised variant: no balancing losses, exact annihilation of w+/w- pairs."""
    elements = (
        Element.beamsplitter("e+", "w+", BALANCED_T),
        Element.beamsplitter("e-", "w-", BALANCED_T),
        Element.annihilator("w+", "w-", GAMMA),
        Element.beamsplitter("e+", "w+", BALANCED_T),
        Element.beamsplitter("e-", "w-", BALANCED_T),
    )
    return NetworkDescription.from_elements(_THOUGHT_REGISTRY, elements)


def _input_state(net: NetworkDescription, params: HardyParams) -> QuantumState:
    return source.prepare_pair(ModeRegistry(net.registry), params.source)


def _configured(net: NetworkDescription, ms: MeasurementSetting | None) -> NetworkDescription:
    if ms is None or not ms.shutters:
        return net
    return network.with_shutters(net, ms.shutters)


def final_state(
    params: HardyParams,
    ms: MeasurementSetting | None = None,
    net: NetworkDescription | None = None,
) -> QuantumState:
    """Exact output state for a source pair under the given setting."""
    net = net or build_hardy_network(params)
    return network.apply_network(_configured(net, ms), _input_state(net, params))


def prefinal_state(params: HardyParams, ms: MeasurementSetting | None = None) -> QuantumState:
    """State just before the final splitters (v/u arms still separate)."""
    net = NetworkDescription.from_elements(REGISTRY, _hardy_elements(params, include_final=False))
    return network.apply_network(_configured(net, ms), _input_state(net, params))


def detector_pattern_probability(
    state: QuantumState, pattern: dict[str, int], rails: dict[str, str] = DETECTOR_RAILS
) -> float:
    """Probability of a per-detector photon count pattern on an output state."""
    return fock.pattern_probability(state, {rails[d]: n for d, n in pattern.items()})


def _pair_pattern(pair: str) -> dict[str, int]:
    left, right = pair[:2], pair[2:]
    return {d: (1 if d in (left, right) else 0) for d in DETECTORS}


def analytic_table(
    params: HardyParams | None = None, net: NetworkDescription | None = None
) -> dict[str, dict[str, float]]:
    """Exact cross-coincidence probability per source pair, per setting.

    Rows are not conditioned on post-selection: each entry is the
    probability that a single emitted pair ends with exactly one photon
    at the named left detector and one at the named right detector.
    """
    params = params or HardyParams()
    table: dict[str, dict[str, float]] = {}
    for name in SETTING_NAMES:
        out = final_state(params, setting(name), net)
        table[name] = {
            pair: detector_pattern_probability(out, _pair_pattern(pair)) for pair in PAIRS
        }
    return table


def thought_experiment_table() -> dict[str, float]:
    """Exact outcome probabilities of the annihilation variant.

    Keys are the four detector pairs plus ``gamma`` (the pair
    annihilated); the five probabilities sum to one because nothing else
    can happen to the pair.
    """
    net = build_thought_network()
    reg = ModeRegistry(net.registry)
    pair_in = fock.add_photon(fock.add_photon(fock.vacuum_state(reg), ("e+", 0)), ("e-", 0))
    out = network.apply_network(net, pair_in)
    table = {
        pair: detector_pattern_probability(out, _pair_pattern(pair), THOUGHT_DETECTOR_RAILS)
        for pair in PAIRS
    }
    table["gamma"] = fock.pattern_probability(out, {GAMMA: 2})
    return table


def ideal_postselected_target(reg: ModeRegistry) -> QuantumState:
    """The three-path entangled state (|v+ v-> + i|u+ v-> + i|u- v+>)/sqrt(3).

    Written on the pre-final rails (u+ on rail w-, u- on rail w+), with
    both photons in the reference wave packet.
    """
    u_plus, u_minus = RETURN_RAILS["u+"], RETURN_RAILS["u-"]
    c = 1.0 / math.sqrt(3.0)
    return fock.combine(
        [
            (c, fock.basis_state(reg, {("v+", 0): 1, ("v-", 0): 1})),
            (1j * c, fock.basis_state(reg, {(u_plus, 0): 1, ("v-", 0): 1})),
            (1j * c, fock.basis_state(reg, {(u_minus, 0): 1, ("v+", 0): 1})),
        ]
    )


def postselected_state(params: HardyParams | None = None) -> tuple[QuantumState, float]:
    """Pre-final state projected onto one photon per side, renormalised.

    Returns the normalised projected state and the projection
    probability (the coincidence fraction of emitted pairs).
    """
    params = params or HardyParams()
    state = prefinal_state(params)
    reg = state.registry
    left = (reg.slots("v+"), reg.slots(RETURN_RAILS["u+"]))
    right = (reg.slots("v-"), reg.slots(RETURN_RAILS["u-"]))

    def side_count(occ, side):
        return sum(occ[i0] + occ[i1] for (i0, i1) in side)

    kept = {
        occ: amp
        for occ, amp in state.terms.items()
        if side_count(occ, left) == 1 and side_count(occ, right) == 1
    }
    projected = QuantumState(reg, kept, state.cap)
    probability = projected.norm() ** 2
    if probability == 0.0:
        return projected, 0.0
    return projected.normalized(), probability


def u_coincidence_probability(params: HardyParams, blocked: bool = True) -> float:
    """Probability of one photon in each return arm before the final splitters.

    With ``blocked`` the v arms are shuttered as in the uu setting; the
    value must coincide with the uu setting's summed cross counts, since
    the final splitters send each return-arm photon to its own side's
    detectors with certainty.
    """
    ms = setting("uu") if blocked else None
    state = prefinal_state(params, ms)
    return fock.pattern_probability(
        state, {RETURN_RAILS["u+"]: 1, RETURN_RAILS["u-"]: 1}
    )


def fringe_probability(params: HardyParams, side: str = "+") -> float:
    """Single-photon p(d | detected at c or d) for one interferometer.

    Scanning the corresponding v-arm phase traces the interference
    fringe sin^2(phase / 2) of a tuned interferometer.
    """
    if side not in ("+", "-"):
        raise ValidationError("side must be '+' or '-'")
    net = build_hardy_network(params)
    reg = ModeRegistry(net.registry)
    photon = fock.basis_state(reg, {(f"e{side}", 0): 1})
    out = network.apply_network(net, photon)
    p_d = fock.pattern_probability(out, {DETECTOR_RAILS[f"d{side}"]: 1})
    p_c = fock.pattern_probability(out, {DETECTOR_RAILS[f"c{side}"]: 1})
    if p_c + p_d == 0.0:
        raise ValidationError("photon never reaches the side's detectors")
    return p_d / (p_c + p_d)


def swap_channel_decomposition(params: HardyParams | None = None) -> dict[str, float]:
    """Split the distinguishable pair's statistics by routing channel.

    Evaluated on the fully distinguishable source (the channels scale
    linearly with the distinguishable weight).  ``both_swap`` is the
    probability that the two photons exchange interferometers, the only
    channel that can produce a d+d- click; it fuels return-arm
    coincidences four times as often as d+d- clicks because each swapped
    photon exits its final splitter's d port with probability 1/2.
    ``both_reflect`` photons also register as return-arm coincidences
    but can never click d+d-.
    """
    params = params or HardyParams()
    dist = replace(params, source=replace(params.source, p_disting=1.0, mode=source.EXPLICIT_P))
    state = prefinal_state(dist, setting("uu"))
    reg = state.registry
    u_plus, u_minus = RETURN_RAILS["u+"], RETURN_RAILS["u-"]
    # The e- photon carries internal label 1, so label-resolved
    # occupancies identify who crossed the central splitter.
    both_swap = fock.component_probability(state, {(u_plus, 1): 1, (u_minus, 0): 1})
    both_reflect = fock.component_probability(state, {(u_plus, 0): 1, (u_minus, 1): 1})
    dd_click = analytic_table(dist)["dd"]["d+d-"]
    return {
        "both_swap_uu": both_swap,
        "both_reflect_uu": both_reflect,
        "uu_total": both_swap + both_reflect,
        "dd_click": dd_click,
        "swap_to_dd_ratio": both_swap / dd_click if dd_click else math.inf,
    }
