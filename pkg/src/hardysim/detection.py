"""Seeded Monte Carlo detection: clicks, coincidences, calibration.

The physics is computed exactly (``hardy.analytic_table`` machinery);
this module only samples detector clicks from the exact output
distribution, one source pair per trial.  Detectors are non-number-
resolving threshold devices by default, with independent per-photon
efficiency thinning and per-window dark-click probabilities.

A trial is a coincidence when exactly one left detector (c+, d+) and
exactly one right detector (c-, d-) click; trials with two clicks on a
side are ambiguous and tallied separately, never counted.  Sampling uses
counter-based streams (see ``_rng``), so results are reproducible for a
given seed and independent of how the trial range is chunked across
calls, threads or backends.

Two interchangeable kernels execute the trial loop: a compiled Cython
extension and a vectorised numpy fallback, selected at import (override
with ``HARDYSIM_BACKEND=compiled|numpy`` or per call).  They are
bit-identical by construction; ``benchmarks/bench_kernels.py`` compares
their throughput.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import hardy
from ._kernel_numpy import run_kernel as _run_kernel_numpy
from ._rng import SLOT_DARK, SLOT_THIN, SLOTS_PER_TRIAL, counter_uniform
from .exceptions import ConfigurationError, StatisticsError, ValidationError
from .fock import QuantumState
from .hardy import DETECTORS, PAIRS, HardyParams
from .network import NetworkDescription

try:
    from . import _mc_kernel as _compiled
except ImportError:  # pure-python install; the numpy path covers everything
    _compiled = None

COMPILED_AVAILABLE = _compiled is not None

_MIN_CELL_EXPECTATION = 100.0


def available_backends() -> tuple[str, ...]:
    return ("compiled", "numpy") if COMPILED_AVAILABLE else ("numpy",)


def _select_kernel(backend: str | None):
    choice = backend or os.environ.get("HARDYSIM_BACKEND") or "auto"
    if choice == "auto":
        choice = "compiled" if COMPILED_AVAILABLE else "numpy"
    if choice == "compiled":
        if not COMPILED_AVAILABLE:
            raise ConfigurationError("compiled kernel requested but not built")
        return _compiled.run_kernel
    if choice == "numpy":
        return _run_kernel_numpy
    raise ConfigurationError(f"unknown backend {choice!r}")


@dataclass(frozen=True)
class DetectorModel:
    """Per-detector efficiency and dark-click probability per window."""

    efficiency: dict[str, float] = field(default_factory=dict)
    dark_prob: dict[str, float] = field(default_factory=dict)
    number_resolving: bool = False

    def __post_init__(self):
        for name, value in self.efficiency.items():
            if name not in DETECTORS:
                raise ConfigurationError(f"unknown detector {name!r}")
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError(f"efficiency of {name} outside [0, 1]")
        for name, value in self.dark_prob.items():
            if name not in DETECTORS:
                raise ConfigurationError(f"unknown detector {name!r}")
            if not 0.0 <= value < 1.0:
                raise ConfigurationError(f"dark probability of {name} outside [0, 1)")

    def efficiencies(self) -> np.ndarray:
        return np.array([self.efficiency.get(d, 1.0) for d in DETECTORS])

    def darks(self) -> np.ndarray:
        return np.array([self.dark_prob.get(d, 0.0) for d in DETECTORS])


@dataclass
class CountTable:
    """Coincidence counts per detector pair for one measurement setting."""

    setting: str
    counts: dict[str, int]
    trials: int
    seed: int
    discarded: int = 0

    def __post_init__(self):
        for pair, n in self.counts.items():
            if n > self.trials:
                raise ValidationError(f"count for {pair} exceeds the trial number")

    def total(self, pairs: tuple[str, ...] = PAIRS) -> int:
        return sum(self.counts[p] for p in pairs)

    def csv_rows(self) -> list[tuple]:
        return [(self.setting, p, self.counts[p], self.trials, self.seed) for p in PAIRS]

    def to_json_dict(self) -> dict:
        return {
            "setting": self.setting,
            "counts": dict(self.counts),
            "trials": self.trials,
            "seed": self.seed,
            "discarded": self.discarded,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def merge_tables(a: CountTable, b: CountTable) -> CountTable:
    """Associative merge of disjoint trial ranges of the same run."""
    if (a.setting, a.seed) != (b.setting, b.seed):
        raise ValidationError("tables to merge must share setting and seed")
    return CountTable(
        a.setting,
        {p: a.counts[p] + b.counts[p] for p in PAIRS},
        a.trials + b.trials,
        a.seed,
        a.discarded + b.discarded,
    )


@dataclass(frozen=True)
class OutputDistribution:
    """Exact distribution over detector photon-count patterns."""

    patterns: tuple[tuple[int, int, int, int], ...]
    probabilities: np.ndarray

    def __post_init__(self):
        total = float(self.probabilities.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"pattern probabilities sum to {total}, not 1")

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        cum = np.cumsum(self.probabilities)
        cum[-1] = max(cum[-1], 1.0)
        occ = np.array(self.patterns, dtype=np.int64).reshape(len(self.patterns), 4)
        offsets = np.zeros_like(occ)
        offsets[:, 1:] = np.cumsum(occ[:, :-1], axis=1)
        return cum, occ, offsets


def detector_distribution(
    state: QuantumState, rails: dict[str, str] = hardy.DETECTOR_RAILS
) -> OutputDistribution:
    """Collapse an output state to detector-occupancy probabilities."""
    slots = [state.registry.slots(rails[d]) for d in DETECTORS]
    acc: dict[tuple[int, int, int, int], float] = {}
    for occ, amp in state.terms.items():
        pattern = tuple(occ[i0] + occ[i1] for (i0, i1) in slots)
        acc[pattern] = acc.get(pattern, 0.0) + abs(amp) ** 2
    ordered = sorted(acc.items(), key=lambda kv: (-kv[1], kv[0]))
    return OutputDistribution(
        tuple(p for p, _ in ordered), np.array([w for _, w in ordered])
    )


def vacuum_distribution() -> OutputDistribution:
    """Physics switched off: no photons ever reach a detector."""
    return OutputDistribution(((0, 0, 0, 0),), np.array([1.0]))


def sample_trial(
    distribution: OutputDistribution,
    detectors: DetectorModel,
    seed: int,
    trial_index: int,
) -> frozenset[str]:
    """Clicked detectors of a single trial; reference for the kernels."""
    base = trial_index * SLOTS_PER_TRIAL
    u = counter_uniform(seed, base)
    cum, occ, offsets = distribution.arrays()
    k = int(np.searchsorted(cum, u, side="right"))
    k = min(k, len(cum) - 1)
    eff = detectors.efficiencies()
    dark = detectors.darks()
    clicked = set()
    for d in range(4):
        survivors = 0
        for j in range(int(occ[k, d])):
            if counter_uniform(seed, base + SLOT_THIN + int(offsets[k, d]) + j) < eff[d]:
                survivors += 1
        if survivors > 0:
            clicked.add(DETECTORS[d])
    for d in range(4):
        if counter_uniform(seed, base + SLOT_DARK + d) < dark[d]:
            clicked.add(DETECTORS[d])
    return frozenset(clicked)


def sample_counts(
    distribution: OutputDistribution,
    detectors: DetectorModel,
    n_trials: int,
    seed: int,
    setting_name: str = "dd",
    start_trial: int = 0,
    backend: str | None = None,
) -> CountTable:
    """Run the trial kernel over [start_trial, start_trial + n_trials)."""
    if n_trials < 1:
        raise ConfigurationError("n_trials must be at least 1")
    if not 0 <= seed < 2**64:
        raise ConfigurationError("seed must fit in 64 bits")
    kernel = _select_kernel(backend)
    cum, occ, offsets = distribution.arrays()
    counts, discarded = kernel(
        cum,
        occ,
        offsets,
        detectors.efficiencies(),
        detectors.darks(),
        detectors.number_resolving,
        seed,
        start_trial,
        n_trials,
    )
    return CountTable(
        setting_name,
        {pair: int(counts[i]) for i, pair in enumerate(PAIRS)},
        n_trials,
        seed,
        int(discarded),
    )


def run_counts(
    params: HardyParams,
    setting_name: str,
    detectors: DetectorModel,
    n_trials: int,
    seed: int,
    net: NetworkDescription | None = None,
    backend: str | None = None,
) -> CountTable:
    """Simulate coincidence counting for one measurement setting."""
    state = hardy.final_state(params, hardy.setting(setting_name), net)
    distribution = detector_distribution(state)
    return sample_counts(
        distribution, detectors, n_trials, seed, setting_name, backend=backend
    )


def run_all_settings(
    params: HardyParams,
    detectors: DetectorModel,
    n_trials: int,
    seed: int,
    net: NetworkDescription | None = None,
    backend: str | None = None,
) -> dict[str, CountTable]:
    """One CountTable per measurement setting, with decorrelated seeds."""
    return {
        name: run_counts(
            params, name, detectors, n_trials, seed + i, net, backend
        )
        for i, name in enumerate(hardy.SETTING_NAMES)
    }


# --- efficiency-calibration check -------------------------------------------

_BLOCK_CHOICES = (None, "v", "w")


def blocking_combinations() -> dict[str, dict[str, str]]:
    """The nine one-arm-per-side blocking configurations used for calibration."""
    combos = {}
    for left, right in itertools.product(_BLOCK_CHOICES, repeat=2):
        shutters = {}
        if left:
            shutters[f"{left}+"] = "closed"
        if right:
            shutters[f"{right}-"] = "closed"
        name = f"{left or 'open'}|{right or 'open'}"
        combos[name] = shutters
    return combos


def expected_calibration_probabilities(
    params: HardyParams, net: NetworkDescription | None = None
) -> dict[str, dict[str, float]]:
    """Unit-efficiency pair probabilities for every blocking combination."""
    expected = {}
    for name, shutters in blocking_combinations().items():
        ms = hardy.MeasurementSetting(name, shutters, PAIRS)
        out = hardy.final_state(params, ms, net)
        expected[name] = {
            pair: hardy.detector_pattern_probability(out, hardy._pair_pattern(pair))
            for pair in PAIRS
        }
    return expected


def simulate_calibration(
    params: HardyParams,
    detectors: DetectorModel,
    n_trials: int,
    seed: int,
    net: NetworkDescription | None = None,
    backend: str | None = None,
) -> dict[str, CountTable]:
    """Counts for all nine blocking combinations (one seed offset each)."""
    tables = {}
    for i, (name, shutters) in enumerate(blocking_combinations().items()):
        ms = hardy.MeasurementSetting(name, shutters, PAIRS)
        state = hardy.final_state(params, ms, net)
        tables[name] = sample_counts(
            detector_distribution(state), detectors, n_trials, seed + i, name, backend=backend
        )
    return tables


@dataclass(frozen=True)
class CalibrationReport:
    spread: float
    efficiencies: dict[str, float]
    lowest_pair: str
    threshold: float
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "spread": self.spread,
            "efficiencies": dict(self.efficiencies),
            "lowest_pair": self.lowest_pair,
            "threshold": self.threshold,
            "passed": self.passed,
        }


def calibration_spread(
    tables: dict[str, CountTable],
    expected: dict[str, dict[str, float]],
    threshold: float = 0.10,
) -> CalibrationReport:
    """Fair-measurement check: relative efficiency spread across pairs.

    Pools each pair's observed counts against the unit-efficiency
    predictions over all blocking combinations, then reports
    ``1 - min/max`` of the four pair efficiencies.  Raises when the
    experiment design is underpowered (an estimable cell predicts fewer
    than 100 events), so a dead detector reads as spread 1.0 rather than
    as missing data.
    """
    missing = set(expected) - set(tables)
    if missing:
        raise ValidationError(f"missing blocking combinations: {sorted(missing)}")
    observed = {pair: 0.0 for pair in PAIRS}
    predicted = {pair: 0.0 for pair in PAIRS}
    for name, probs in expected.items():
        table = tables[name]
        for pair in PAIRS:
            expectation = probs[pair] * table.trials
            if expectation <= 1e-9 * table.trials:
                continue
            if expectation < _MIN_CELL_EXPECTATION:
                raise StatisticsError(
                    f"cell ({name}, {pair}) expects only {expectation:.1f} events; "
                    "increase the trial count"
                )
            observed[pair] += table.counts[pair]
            predicted[pair] += expectation
    efficiencies = {
        pair: (observed[pair] / predicted[pair]) if predicted[pair] > 0 else 0.0
        for pair in PAIRS
    }
    top = max(efficiencies.values())
    spread = 1.0 if top == 0.0 else 1.0 - min(efficiencies.values()) / top
    lowest = min(efficiencies, key=efficiencies.get)
    return CalibrationReport(spread, efficiencies, lowest, threshold, spread <= threshold)
