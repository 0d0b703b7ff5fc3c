"""Declarative linear-optical circuits: description, text format, evolution.

A network is an ordered list of elements over a fixed registry of
spatial arms.  Elements are applied strictly in list order; the circuits
in scope are shallow enough that explicit ordering keeps every
intermediate state auditable.

Text format (UTF-8, line oriented, ``#`` starts a comment)::

    mode <name> ...                         declare spatial arms
    bs <m1> <m2> [t]                        beam splitter, default t = 0.70710678
    phase <m> <radians>                     optical path-length offset
    shutter <m> <open|closed> loss=<mode>   blockable arm with its dump arm
    annihilate <m1> <m2> gamma=<mode>       pair-annihilation crossing

Beam splitters use one global symmetric convention

    U(t) = [[t, i r], [i r, t]],   r = sqrt(1 - t^2)

so a single photon entering either port transmits with amplitude ``t``
and crosses with ``i r``.  A closed shutter is the t = 0 limit routing
the arm into its dedicated dump arm, which keeps the evolution unitary
and the global norm testable.  The annihilator moves a photon pair
occupying both of its arms into the gamma arm with the amplitude (and
total photon number) preserved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import fock
from .exceptions import NetworkParseError, ValidationError
from .fock import QuantumState

DEFAULT_BS_T = 0.70710678

BEAMSPLITTER = "beamsplitter"
PHASE = "phase"
SHUTTER = "shutter"
ANNIHILATOR = "annihilator"

OPEN = "open"
CLOSED = "closed"


def splitter_matrix(transmissivity: float):
    """Symmetric beam-splitter unitary [[t, ir], [ir, t]]."""
    t = float(transmissivity)
    r = math.sqrt(max(0.0, 1.0 - t * t))
    return ((t, 1j * r), (1j * r, t))


@dataclass(frozen=True)
class Element:
    kind: str
    modes: tuple[str, ...]
    transmissivity: float | None = None
    angle: float | None = None
    state: str | None = None
    loss: str | None = None
    gamma: str | None = None

    @staticmethod
    def beamsplitter(m1: str, m2: str, transmissivity: float = DEFAULT_BS_T) -> "Element":
        return Element(BEAMSPLITTER, (m1, m2), transmissivity=float(transmissivity))

    @staticmethod
    def phase(mode: str, angle: float) -> "Element":
        return Element(PHASE, (mode,), angle=float(angle))

    @staticmethod
    def shutter(mode: str, state: str, loss: str) -> "Element":
        return Element(SHUTTER, (mode,), state=state, loss=loss)

    @staticmethod
    def annihilator(m1: str, m2: str, gamma: str) -> "Element":
        return Element(ANNIHILATOR, (m1, m2), gamma=gamma)


@dataclass(frozen=True)
class NetworkDescription:
    """Registry plus elements in causal order, with dump-arm bookkeeping."""

    registry: tuple[str, ...]
    elements: tuple[Element, ...]
    loss_modes: tuple[str, ...]
    gamma_mode: str | None

    @staticmethod
    def from_elements(registry: tuple[str, ...], elements: tuple[Element, ...]) -> "NetworkDescription":
        declared = set()
        for label in registry:
            if label in declared:
                raise ValidationError(f"duplicate mode label {label!r}")
            declared.add(label)
        losses: list[str] = []
        gamma: str | None = None
        for el in elements:
            for m in el.modes:
                if m not in declared:
                    raise ValidationError(f"element references undeclared mode {m!r}")
            if el.kind == BEAMSPLITTER:
                if len(el.modes) != 2 or el.modes[0] == el.modes[1]:
                    raise ValidationError("beamsplitter needs two distinct modes")
                if not 0.0 < el.transmissivity < 1.0:
                    raise ValidationError("transmissivity must lie strictly between 0 and 1")
            elif el.kind == PHASE:
                if len(el.modes) != 1:
                    raise ValidationError("phase acts on exactly one mode")
            elif el.kind == SHUTTER:
                if len(el.modes) != 1:
                    raise ValidationError("shutter acts on exactly one mode")
                if el.state not in (OPEN, CLOSED):
                    raise ValidationError(f"shutter state must be open or closed, got {el.state!r}")
                if el.loss not in declared:
                    raise ValidationError(f"shutter loss mode {el.loss!r} is not declared")
                if el.loss == el.modes[0]:
                    raise ValidationError("shutter loss mode must differ from the guarded arm")
                if el.loss not in losses:
                    losses.append(el.loss)
            elif el.kind == ANNIHILATOR:
                if len(el.modes) != 2 or el.modes[0] == el.modes[1]:
                    raise ValidationError("annihilator needs two distinct modes")
                if el.gamma not in declared:
                    raise ValidationError(f"gamma mode {el.gamma!r} is not declared")
                gamma = el.gamma
            else:
                raise ValidationError(f"unknown element kind {el.kind!r}")
        return NetworkDescription(registry, elements, tuple(losses), gamma)


def parse_network(text: str) -> NetworkDescription:
    """Parse the line-oriented circuit format; errors carry line numbers."""
    registry: list[str] = []
    declared: set[str] = set()
    elements: list[Element] = []

    def err(message: str, line: int):
        raise NetworkParseError(message, line)

    def need_declared(name: str, line: int) -> str:
        if name not in declared:
            err(f"undeclared mode {name!r}", line)
        return name

    def keyword(arg: str, key: str, line: int) -> str:
        prefix = key + "="
        if not arg.startswith(prefix) or len(arg) == len(prefix):
            err(f"expected {key}=<mode>, got {arg!r}", line)
        return arg[len(prefix):]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        directive, args = tokens[0], tokens[1:]
        if directive == "mode":
            if not args:
                err("mode directive needs at least one name", lineno)
            for name in args:
                if name in declared:
                    err(f"duplicate mode {name!r}", lineno)
                declared.add(name)
                registry.append(name)
        elif directive == "bs":
            if len(args) not in (2, 3):
                err("bs takes two modes and an optional transmissivity", lineno)
            if args[0] == args[1]:
                err("beamsplitter modes must differ", lineno)
            m1 = need_declared(args[0], lineno)
            m2 = need_declared(args[1], lineno)
            t = DEFAULT_BS_T
            if len(args) == 3:
                try:
                    t = float(args[2])
                except ValueError:
                    err(f"bad transmissivity {args[2]!r}", lineno)
                if not 0.0 < t < 1.0:
                    err("transmissivity must lie strictly between 0 and 1", lineno)
            elements.append(Element.beamsplitter(m1, m2, t))
        elif directive == "phase":
            if len(args) != 2:
                err("phase takes a mode and an angle in radians", lineno)
            m = need_declared(args[0], lineno)
            try:
                angle = float(args[1])
            except ValueError:
                err(f"bad phase angle {args[1]!r}", lineno)
            elements.append(Element.phase(m, angle))
        elif directive == "shutter":
            if len(args) != 3:
                err("shutter takes a mode, open|closed, and loss=<mode>", lineno)
            m = need_declared(args[0], lineno)
            state = args[1]
            if state not in (OPEN, CLOSED):
                err(f"shutter state must be open or closed, got {state!r}", lineno)
            loss = need_declared(keyword(args[2], "loss", lineno), lineno)
            if loss == m:
                err("shutter loss mode must differ from the guarded arm", lineno)
            elements.append(Element.shutter(m, state, loss))
        elif directive == "annihilate":
            if len(args) != 3:
                err("annihilate takes two modes and gamma=<mode>", lineno)
            m1 = need_declared(args[0], lineno)
            m2 = need_declared(args[1], lineno)
            if m1 == m2:
                err("annihilator modes must differ", lineno)
            gamma = need_declared(keyword(args[2], "gamma", lineno), lineno)
            elements.append(Element.annihilator(m1, m2, gamma))
        else:
            err(f"unknown directive {directive!r}", lineno)

    try:
        return NetworkDescription.from_elements(tuple(registry), tuple(elements))
    except ValidationError as exc:  # pragma: no cover - parse already validates
        raise NetworkParseError(str(exc), 0) from exc


def serialize_network(net: NetworkDescription) -> str:
    """Emit one directive per line in element order; reparses to an equal network."""
    lines = ["mode " + " ".join(net.registry)]
    for el in net.elements:
        if el.kind == BEAMSPLITTER:
            lines.append(f"bs {el.modes[0]} {el.modes[1]} {el.transmissivity!r}")
        elif el.kind == PHASE:
            lines.append(f"phase {el.modes[0]} {el.angle!r}")
        elif el.kind == SHUTTER:
            lines.append(f"shutter {el.modes[0]} {el.state} loss={el.loss}")
        elif el.kind == ANNIHILATOR:
            lines.append(f"annihilate {el.modes[0]} {el.modes[1]} gamma={el.gamma}")
    return "\n".join(lines) + "\n"


def with_shutters(net: NetworkDescription, states: dict[str, str]) -> NetworkDescription:
    """Copy of the network with the named arms' shutters set open/closed."""
    remaining = dict(states)
    elements = []
    for el in net.elements:
        if el.kind == SHUTTER and el.modes[0] in remaining:
            elements.append(Element.shutter(el.modes[0], remaining.pop(el.modes[0]), el.loss))
        else:
            elements.append(el)
    if remaining:
        raise ValidationError(f"no shutter guards arm(s) {sorted(remaining)}")
    return NetworkDescription.from_elements(net.registry, tuple(elements))


_CLOSED_MATRIX = ((0.0, 1j), (1j, 0.0))  # t = 0 limit: total routing into the dump arm


def _apply_annihilator(state: QuantumState, m1: str, m2: str, gamma: str) -> QuantumState:
    reg = state.registry
    s1 = reg.slots(m1)
    s2 = reg.slots(m2)
    g = reg.slots(gamma)
    terms: dict[tuple[int, ...], complex] = {}
    for occ, amp in state.terms.items():
        n1 = occ[s1[0]] + occ[s1[1]]
        n2 = occ[s2[0]] + occ[s2[1]]
        if n1 == 1 and n2 == 1:
            new = list(occ)
            for (i0, i1) in (s1, s2):
                for internal, idx in ((0, i0), (1, i1)):
                    if new[idx]:
                        new[idx] -= 1
                        new[g[internal]] += 1
            key = tuple(new)
        else:
            key = occ
        terms[key] = terms.get(key, 0j) + amp
    return QuantumState(reg, terms, state.cap)


def apply_element(element: Element, state: QuantumState) -> QuantumState:
    if element.kind == BEAMSPLITTER:
        u = splitter_matrix(element.transmissivity)
        for internal in range(fock.N_INTERNAL):
            state = fock.apply_two_mode(
                state, (element.modes[0], internal), (element.modes[1], internal), u
            )
        return state
    if element.kind == PHASE:
        for internal in range(fock.N_INTERNAL):
            state = fock.apply_phase(state, (element.modes[0], internal), element.angle)
        return state
    if element.kind == SHUTTER:
        if element.state == OPEN:
            return state
        for internal in range(fock.N_INTERNAL):
            state = fock.apply_two_mode(
                state, (element.modes[0], internal), (element.loss, internal), _CLOSED_MATRIX
            )
        return state
    if element.kind == ANNIHILATOR:
        return _apply_annihilator(state, element.modes[0], element.modes[1], element.gamma)
    raise ValidationError(f"unknown element kind {element.kind!r}")


def apply_network(net: NetworkDescription, state: QuantumState) -> QuantumState:
    """Apply all elements in order.  The state registry must cover the network's."""
    for label in net.registry:
        if label not in state.registry:
            raise ValidationError(f"state registry lacks network mode {label!r}")
    for element in net.elements:
        state = apply_element(element, state)
    return state


def tuning_residual(net: NetworkDescription, input_mode: str, forbidden_output: str) -> float:
    """Single-photon amplitude magnitude leaking into ``forbidden_output``.

    Sends one photon (internal label 0) through ``input_mode`` and
    returns sqrt of the probability of finding it in the forbidden arm;
    zero within 1e-12 for a correctly tuned interferometer.
    """
    reg = fock.ModeRegistry(net.registry)
    state = fock.basis_state(reg, {(input_mode, 0): 1})
    out = apply_network(net, state)
    return math.sqrt(fock.pattern_probability(out, {forbidden_output: 1}))
