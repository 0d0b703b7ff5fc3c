"""Local-hidden-variable analysis: strategies, inequality chain, violations.

A local deterministic strategy assigns each side a fixed outcome for both
complementary measurements: c or d for the detector basis, u or v for
the path basis.  There are exactly 2^4 = 16 such strategies, and every
LHV model is a probabilistic mixture of them.  For any mixture the four
measurable joints obey

    p(d+;d-)  <=  p(u+;u-) + p(d+;v-) + p(v+;d-)

a Clauser-Horne-style bound.  The chain checker verifies not just this
final inequality but each marginalisation identity and positivity bound
it is derived from, so a regression is localised to the step that
breaks.  Injecting measured (or exact quantum) joints as a
pseudo-mixture shows which step fails for statistics that admit no LHV
model.

Measured counts enter through ``evaluate_violation``: the left-hand side
is the dd-setting d+d- count, the right-hand side the summed counts of
the three projecting settings, and the significance is the margin in
independent-Poisson standard deviations.  The significance of an
exact-rate violation grows as sqrt(trials); it is reported per run, not
as a fixed number.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from . import hardy
from .detection import CountTable
from .exceptions import ValidationError
from .hardy import HardyParams

IDENTITY_TOL = 1e-12


class LocalStrategy(NamedTuple):
    """Predetermined outcomes (detector basis, path basis) per side."""

    cd_plus: str
    uv_plus: str
    cd_minus: str
    uv_minus: str


def enumerate_strategies() -> list[LocalStrategy]:
    """All sixteen deterministic assignments, in lexicographic order."""
    return [
        LocalStrategy(*combo)
        for combo in itertools.product("cd", "uv", "cd", "uv")
    ]


def strategy_probabilities(strategy: LocalStrategy) -> dict[str, int]:
    """The four measurable joints, each 0 or 1 for a deterministic strategy."""
    return {
        "dd": int(strategy.cd_plus == "d" and strategy.cd_minus == "d"),
        "uu": int(strategy.uv_plus == "u" and strategy.uv_minus == "u"),
        "dv": int(strategy.cd_plus == "d" and strategy.uv_minus == "v"),
        "vd": int(strategy.uv_plus == "v" and strategy.cd_minus == "d"),
    }


def _atom(distribution: Mapping[LocalStrategy, float], cd_p, uv_p, cd_m, uv_m):
    return distribution.get(LocalStrategy(cd_p, uv_p, cd_m, uv_m), 0)


def _joint(distribution, key: str):
    total = 0
    for strategy, weight in distribution.items():
        if strategy_probabilities(strategy)[key]:
            total = total + weight
    return total


@dataclass(frozen=True)
class ChainCheck:
    name: str
    kind: str  # "identity" or "inequality"
    lhs: float
    rhs: float
    slack: float
    passed: bool


@dataclass(frozen=True)
class ChainReport:
    checks: tuple[ChainCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "kind": c.kind,
                    "lhs": float(c.lhs),
                    "rhs": float(c.rhs),
                    "slack": float(c.slack),
                    "passed": c.passed,
                }
                for c in self.checks
            ],
        }


def verify_inequality_chain(distribution: Mapping[LocalStrategy, float]) -> ChainReport:
    """Check every step of the derivation on a strategy mixture.

    Weights may be ``Fraction`` (checked exactly) or float (tolerance
    1e-12 on identities).  Negative weights are allowed on purpose:
    feeding a pseudo-mixture that reproduces non-LHV statistics shows
    which positivity step gives way while the marginal identities hold.
    """
    total = sum(distribution.values())
    exact = all(isinstance(w, Fraction) for w in distribution.values())
    tol = 0 if exact else IDENTITY_TOL
    if abs(total - 1) > max(tol, 1e-9):
        raise ValidationError(f"distribution sums to {float(total)}, not 1")

    p_dd = _joint(distribution, "dd")
    p_uu = _joint(distribution, "uu")
    p_dv = _joint(distribution, "dv")
    p_vd = _joint(distribution, "vd")

    def atom(cd_p, uv_p, cd_m, uv_m):
        return _atom(distribution, cd_p, uv_p, cd_m, uv_m)

    checks = []

    def identity(name, lhs, rhs):
        slack = rhs - lhs
        checks.append(ChainCheck(name, "identity", float(lhs), float(rhs), float(slack), abs(slack) <= tol))

    def inequality(name, lhs, rhs):
        slack = rhs - lhs
        checks.append(ChainCheck(name, "inequality", float(lhs), float(rhs), float(slack), slack >= -tol))

    # p(u+;u-) marginalises over both detector-basis outcomes.
    identity(
        "uu-marginal",
        p_uu,
        atom("d", "u", "d", "u") + atom("d", "u", "c", "u")
        + atom("c", "u", "d", "u") + atom("c", "u", "c", "u"),
    )
    # Positivity: one term of that sum cannot exceed it.
    inequality("uu-lower-bound", atom("d", "u", "d", "u"), p_uu)
    # p(d+;d-) marginalises over both path-basis outcomes.
    identity(
        "dd-expansion",
        p_dd,
        atom("d", "u", "d", "u") + atom("d", "u", "d", "v")
        + atom("d", "v", "d", "u") + atom("d", "v", "d", "v"),
    )
    # Substitute the bound into the expansion.
    inequality(
        "dd-bound",
        p_dd,
        p_uu + atom("d", "u", "d", "v") + atom("d", "v", "d", "u") + atom("d", "v", "d", "v"),
    )
    # The mixed joints marginalise the same way.
    identity(
        "dv-marginal",
        p_dv,
        atom("d", "u", "c", "v") + atom("d", "u", "d", "v")
        + atom("d", "v", "c", "v") + atom("d", "v", "d", "v"),
    )
    identity(
        "vd-marginal",
        p_vd,
        atom("c", "v", "d", "u") + atom("c", "v", "d", "v")
        + atom("d", "v", "d", "u") + atom("d", "v", "d", "v"),
    )
    # Dropping non-negative terms from the two marginals bounds the cross atoms.
    inequality(
        "cross-terms-bound",
        atom("d", "u", "d", "v") + atom("d", "v", "d", "u") + atom("d", "v", "d", "v"),
        p_dv + p_vd,
    )
    # The combination of all of the above.
    inequality("final-inequality", p_dd, p_uu + p_dv + p_vd)

    return ChainReport(tuple(checks))


def eq7_slack(strategy_or_mixture) -> float:
    """Right minus left of the final inequality; >= 0 for every LHV mixture."""
    if isinstance(strategy_or_mixture, LocalStrategy):
        mixture = {strategy_or_mixture: 1}
    else:
        mixture = strategy_or_mixture
    return float(
        _joint(mixture, "uu") + _joint(mixture, "dv") + _joint(mixture, "vd")
        - _joint(mixture, "dd")
    )


def pseudo_distribution_from_joints(
    p_dd: float, p_uu: float, p_dv: float, p_vd: float
) -> dict[LocalStrategy, float]:
    """Minimum-norm signed mixture reproducing the four joints (and total 1).

    Ordinary statistics give an ordinary mixture; statistics that
    violate the final inequality force negative weights, which is what
    lets the chain checker point at the step that breaks.
    """
    strategies = enumerate_strategies()
    rows = [
        [strategy_probabilities(s)[key] for s in strategies]
        for key in ("dd", "uu", "dv", "vd")
    ]
    rows.append([1.0] * len(strategies))
    a = np.array(rows, dtype=float)
    b = np.array([p_dd, p_uu, p_dv, p_vd, 1.0])
    weights, *_ = np.linalg.lstsq(a, b, rcond=None)
    return dict(zip(strategies, weights.tolist()))


@dataclass(frozen=True)
class LhvReport:
    """Outcome of one inequality test on measured counts."""

    lhs: float
    rhs: float
    margin: float
    sigma: float
    n_sigma: float
    verdict: str  # "violation" | "consistent" | "inconclusive"

    def to_json_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "sigma": self.sigma,
            "n_sigma": self.n_sigma,
            "verdict": self.verdict,
            "error_model": "independent Poisson counts per setting",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    def summary_line(self) -> str:
        if self.verdict == "inconclusive":
            return "inconclusive: no coincidences recorded"
        if self.verdict == "violation":
            return (
                f"violation: N(d+d-)={self.lhs:.0f} exceeds the LHV bound "
                f"{self.rhs:.0f} by {self.n_sigma:.1f} standard deviations"
            )
        return (
            f"consistent with LHV: N(d+d-)={self.lhs:.0f} within the bound {self.rhs:.0f}"
        )


def evaluate_violation(
    tables: Mapping[str, CountTable],
    efficiencies: Mapping[str, float] | None = None,
) -> LhvReport:
    """Test the final inequality on coincidence counts of the four settings.

    All four tables must hold the same trial count (equal source flux).
    ``efficiencies`` (per detector pair, e.g. from a calibration report)
    optionally rescales counts before combining; errors then propagate
    as scaled Poisson variances.
    """
    missing = [s for s in hardy.SETTING_NAMES if s not in tables]
    if missing:
        raise ValidationError(f"missing settings: {missing}")
    trials = {tables[s].trials for s in hardy.SETTING_NAMES}
    if len(trials) != 1:
        raise ValidationError(
            "settings were sampled with different trial counts; normalise first"
        )

    def corrected(setting_name: str, pair: str) -> tuple[float, float]:
        count = tables[setting_name].counts[pair]
        scale = 1.0
        if efficiencies is not None:
            eff = efficiencies.get(pair, 1.0)
            if eff <= 0.0:
                raise ValidationError(f"non-positive efficiency for pair {pair}")
            scale = 1.0 / eff
        return count * scale, count * scale * scale  # value, Poisson variance

    lhs, var = corrected("dd", "d+d-")
    rhs = 0.0
    for name in ("dv", "vd", "uu"):
        for pair in hardy.setting(name).count_rule:
            value, variance = corrected(name, pair)
            rhs += value
            var += variance

    if lhs == 0.0 and rhs == 0.0:
        return LhvReport(0.0, 0.0, 0.0, 0.0, 0.0, "inconclusive")
    sigma = math.sqrt(var)
    margin = rhs - lhs
    if margin < 0.0:
        return LhvReport(lhs, rhs, margin, sigma, -margin / sigma, "violation")
    return LhvReport(lhs, rhs, margin, sigma, 0.0, "consistent")


@dataclass(frozen=True)
class ThresholdScan:
    """Analytic inequality margin per source pair as distinguishability varies."""

    p_values: tuple[float, ...]
    lhs: tuple[float, ...]
    rhs: tuple[float, ...]
    margins: tuple[float, ...]
    root: float | None
    decomposition: dict[str, float]


def _analytic_margin(params: HardyParams, p: float) -> tuple[float, float]:
    from dataclasses import replace

    from . import source as source_mod

    probed = replace(
        params, source=replace(params.source, p_disting=p, mode=source_mod.EXPLICIT_P)
    )
    table = hardy.analytic_table(probed)
    lhs = table["dd"]["d+d-"]
    rhs = 0.0
    for name in ("dv", "vd", "uu"):
        rhs += sum(table[name][pair] for pair in hardy.setting(name).count_rule)
    return lhs, rhs


def threshold_scan(
    p_values: Sequence[float], params: HardyParams | None = None
) -> ThresholdScan:
    """Scan the analytic margin over distinguishability and locate its zero.

    The margin is exact (no sampling).  For the aligned network it
    crosses zero where the return-arm coincidence rate overtakes the
    d+d- rate; the channel decomposition of the fully distinguishable
    pair is attached for reference.
    """
    params = params or HardyParams()
    lhs_list, rhs_list, margins = [], [], []
    for p in p_values:
        lhs, rhs = _analytic_margin(params, p)
        lhs_list.append(lhs)
        rhs_list.append(rhs)
        margins.append(rhs - lhs)

    root = None
    if margins and min(margins) < 0.0 < max(margins):
        root = float(
            brentq(lambda p: _analytic_margin(params, p)[1] - _analytic_margin(params, p)[0],
                   min(p_values), max(p_values), xtol=1e-12)
        )
    return ThresholdScan(
        tuple(float(p) for p in p_values),
        tuple(lhs_list),
        tuple(rhs_list),
        tuple(margins),
        root,
        hardy.swap_channel_decomposition(params),
    )
