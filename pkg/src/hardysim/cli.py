"""Command-line front end: `hardy-sim <subcommand>`.

Every subcommand writes machine-readable data (CSV or JSON) to the
``--out`` path or standard output and keeps human summaries on standard
error, so artifacts stay pipeline-friendly.  Configuration precedence is
flag > config file > built-in default.  Exit codes: 0 success, 2
configuration or parse error, 3 inconclusive statistics.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import detection, hardy, lhv, network, source
from .exceptions import HardySimError, StatisticsError
from .hardy import HardyParams
from .source import SourceParams

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INCONCLUSIVE = 3

_SIMULATE_TRIALS = 1_000_000
_SCAN_TRIALS = 100_000

DEFAULTS = {
    "p_disting": 0.0,
    "delay_fs": None,
    "coherence_time_fs": source.DEFAULT_COHERENCE_FS,
    "phase_plus": 0.0,
    "phase_minus": 0.0,
    "central_t": hardy.BALANCED_T,
    "outer_t": hardy.BALANCED_T,
    "efficiency": {},
    "dark_prob": {},
    "number_resolving": False,
    "trials": None,
    "seed": 12345,
    "format": "csv",
    "out": None,
    "network": None,
    "backend": None,
}


@dataclasses.dataclass
class RunConfig:
    params: HardyParams
    detectors: detection.DetectorModel
    trials: int | None
    seed: int
    out: str | None
    format: str
    network_path: str | None
    backend: str | None

    def network(self):
        if self.network_path is None:
            return None
        text = Path(self.network_path).read_text(encoding="utf-8")
        return network.parse_network(text)


def _load_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(DEFAULTS)
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            try:
                document = json.load(fh)
            except json.JSONDecodeError as exc:
                raise HardySimError(f"bad config file: {exc}") from exc
        unknown = set(document) - set(DEFAULTS)
        if unknown:
            raise HardySimError(f"unknown config keys: {sorted(unknown)}")
        merged.update(document)
    for key in (
        "p_disting",
        "phase_plus",
        "phase_minus",
        "trials",
        "seed",
        "format",
        "out",
        "network",
        "backend",
    ):
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            merged[key] = value
    if getattr(args, "delay", None) is not None:
        merged["delay_fs"] = args.delay

    if merged["delay_fs"] is not None:
        src = SourceParams(
            p_disting=merged["p_disting"],
            delay_fs=merged["delay_fs"],
            coherence_time_fs=merged["coherence_time_fs"],
            mode=source.FROM_DELAY,
        )
    else:
        src = SourceParams(
            p_disting=merged["p_disting"],
            coherence_time_fs=merged["coherence_time_fs"],
        )
    params = HardyParams(
        phase_plus=merged["phase_plus"],
        phase_minus=merged["phase_minus"],
        central_t=merged["central_t"],
        outer_t=merged["outer_t"],
        source=src,
    )
    detectors = detection.DetectorModel(
        efficiency=dict(merged["efficiency"]),
        dark_prob=dict(merged["dark_prob"]),
        number_resolving=bool(merged["number_resolving"]),
    )
    if merged["format"] not in ("csv", "json"):
        raise HardySimError(f"format must be csv or json, got {merged['format']!r}")
    seed = int(merged["seed"])
    if not 0 <= seed < 2**64:
        raise HardySimError("seed must fit in 64 bits")
    trials = merged["trials"]
    if trials is not None:
        trials = int(trials)
        if trials < 1:
            raise HardySimError("trials must be at least 1")
    return RunConfig(
        params,
        detectors,
        trials,
        seed,
        merged["out"],
        merged["format"],
        merged["network"],
        merged["backend"],
    )


def _write_csv(header: tuple[str, ...], rows: list[tuple]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue()


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit(config: RunConfig, text: str) -> None:
    if config.out:
        Path(config.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_json(config: RunConfig, payload) -> None:
    _emit(config, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _say(message: str) -> None:
    print(message, file=sys.stderr)


# --- subcommands -------------------------------------------------------------


def _cmd_analytic(config: RunConfig, args) -> int:
    table = hardy.analytic_table(config.params, config.network())
    if config.format == "json":
        _emit_json(config, {"table": table})
    else:
        rows = [
            (name, pair, table[name][pair])
            for name in hardy.SETTING_NAMES
            for pair in hardy.PAIRS
        ]
        _emit(config, _write_csv(("setting", "pair", "probability"), rows))
    _say("exact per-pair coincidence probabilities for all four settings")
    return EXIT_OK


def _cmd_thought(config: RunConfig, args) -> int:
    table = hardy.thought_experiment_table()
    if config.format == "json":
        _emit_json(config, {"table": table})
    else:
        rows = [(key, table[key]) for key in (*hardy.PAIRS, "gamma")]
        _emit(config, _write_csv(("pair", "probability"), rows))
    _say(f"annihilation variant: p(d+d-)={table['d+d-']:.6f}, p(gamma)={table['gamma']:.6f}")
    return EXIT_OK


def _cmd_simulate(config: RunConfig, args) -> int:
    trials = config.trials or _SIMULATE_TRIALS
    tables = detection.run_all_settings(
        config.params, config.detectors, trials, config.seed,
        config.network(), config.backend,
    )
    report = lhv.evaluate_violation(tables)
    if config.format == "json":
        payload = {
            "counts": {name: tables[name].to_json_dict() for name in tables},
            "report": report.to_json_dict(),
        }
        _emit_json(config, payload)
    else:
        rows = [row for name in hardy.SETTING_NAMES for row in tables[name].csv_rows()]
        _emit(config, _write_csv(("setting", "pair", "count", "trials", "seed"), rows))
    _say(report.summary_line())
    return EXIT_INCONCLUSIVE if report.verdict == "inconclusive" else EXIT_OK


def _cmd_scan_delay(config: RunConfig, args) -> int:
    trials = config.trials or _SCAN_TRIALS
    delays = np.linspace(args.delay_min, args.delay_max, args.steps)
    uu_rule = hardy.setting("uu").count_rule
    rows = []
    for i, delay in enumerate(delays):
        src = dataclasses.replace(
            config.params.source, delay_fs=float(delay), mode=source.FROM_DELAY
        )
        params = dataclasses.replace(config.params, source=src)
        p = source.effective_distinguishability(src)
        table = hardy.analytic_table(params, config.network())["uu"]
        rate = sum(table[pair] for pair in uu_rule)
        counts = detection.run_counts(
            params, "uu", config.detectors, trials, config.seed + i,
            config.network(), config.backend,
        )
        rows.append((float(delay), p, rate, counts.total(uu_rule), trials, config.seed + i))
    if config.format == "json":
        _emit_json(
            config,
            {
                "scan": [
                    {
                        "delay_fs": r[0],
                        "p_disting": r[1],
                        "uu_probability": r[2],
                        "counts": r[3],
                        "trials": r[4],
                        "seed": r[5],
                    }
                    for r in rows
                ]
            },
        )
    else:
        _emit(
            config,
            _write_csv(
                ("delay_fs", "p_disting", "uu_probability", "counts", "trials", "seed"),
                rows,
            ),
        )
    _say(f"return-arm coincidence dip over {args.steps} delays")
    return EXIT_OK


def _cmd_scan_phase(config: RunConfig, args) -> int:
    phases = np.linspace(args.phase_min, args.phase_max, args.steps)
    rows = []
    for phi in phases:
        for side, key in (("+", "phase_plus"), ("-", "phase_minus")):
            params = dataclasses.replace(config.params, **{key: float(phi)})
            rows.append((float(phi), side, hardy.fringe_probability(params, side)))
    if config.format == "json":
        _emit_json(
            config,
            {
                "scan": [
                    {"phase_rad": r[0], "side": r[1], "p_d_given_detected": r[2]}
                    for r in rows
                ]
            },
        )
    else:
        _emit(config, _write_csv(("phase_rad", "side", "p_d_given_detected"), rows))
    _say(f"interferometer fringes over {args.steps} phases per side")
    return EXIT_OK


def _cmd_verify_lhv(config: RunConfig, args) -> int:
    strategies = lhv.enumerate_strategies()
    slacks = {s: lhv.eq7_slack(s) for s in strategies}
    satisfied = sum(1 for v in slacks.values() if v >= 0)
    chain_ok = all(lhv.verify_inequality_chain({s: 1}).passed for s in strategies)

    rng = np.random.default_rng(config.seed)
    mixtures_ok = 0
    for _ in range(args.mixtures):
        weights = rng.dirichlet(np.ones(len(strategies)))
        mixture = dict(zip(strategies, weights.tolist()))
        if lhv.eq7_slack(mixture) >= -lhv.IDENTITY_TOL and lhv.verify_inequality_chain(mixture).passed:
            mixtures_ok += 1

    if config.format == "json":
        payload = {
            "strategies": [
                {
                    "cd_plus": s.cd_plus,
                    "uv_plus": s.uv_plus,
                    "cd_minus": s.cd_minus,
                    "uv_minus": s.uv_minus,
                    "slack": slacks[s],
                }
                for s in strategies
            ],
            "satisfied": satisfied,
            "chain_passed": chain_ok,
            "mixtures_checked": args.mixtures,
            "mixtures_satisfied": mixtures_ok,
        }
        _emit_json(config, payload)
    else:
        rows = [
            (f"{s.cd_plus}{s.uv_plus}{s.cd_minus}{s.uv_minus}",
             s.cd_plus, s.uv_plus, s.cd_minus, s.uv_minus, slacks[s])
            for s in strategies
        ]
        _emit(
            config,
            _write_csv(
                ("strategy", "cd_plus", "uv_plus", "cd_minus", "uv_minus", "slack"), rows
            ),
        )
    _say(f"{satisfied}/{len(strategies)} strategies satisfy the coincidence inequality")
    _say(
        f"derivation chain holds for all strategies and {mixtures_ok}/{args.mixtures} random mixtures"
    )
    if satisfied == len(strategies) and chain_ok and mixtures_ok == args.mixtures:
        return EXIT_OK
    return EXIT_INCONCLUSIVE


def _cmd_threshold(config: RunConfig, args) -> int:
    p_values = np.linspace(args.p_min, args.p_max, args.steps)
    scan = lhv.threshold_scan(p_values.tolist(), config.params)
    if config.format == "json":
        payload = {
            "scan": [
                {"p_disting": p, "lhs": l, "rhs": r, "margin": m}
                for p, l, r, m in zip(scan.p_values, scan.lhs, scan.rhs, scan.margins)
            ],
            "root": scan.root,
            "decomposition": scan.decomposition,
        }
        _emit_json(config, payload)
    else:
        rows = list(zip(scan.p_values, scan.lhs, scan.rhs, scan.margins))
        _emit(config, _write_csv(("p_disting", "lhs", "rhs", "margin"), rows))
    if scan.root is not None:
        _say(f"p*={scan.root:.6f}")
    else:
        _say("no zero crossing inside the scanned range")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardy-sim",
        description=(
            "Exact simulator of two bunching-coupled Mach-Zehnder interferometers "
            "with local-hidden-variable analysis"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--config", help="JSON config file; flags override its fields")
        p.add_argument("--seed", type=int, help="64-bit sampling seed")
        p.add_argument("--trials", type=int, help="Monte Carlo trials per run")
        p.add_argument("--p-disting", type=float, dest="p_disting",
                       help="distinguishable fraction of the photon pair")
        p.add_argument("--delay", type=float,
                       help="pair delay in fs (switches the source to delay mode)")
        p.add_argument("--phase-plus", type=float, dest="phase_plus",
                       help="v+ arm phase in radians")
        p.add_argument("--phase-minus", type=float, dest="phase_minus",
                       help="v- arm phase in radians")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), help="output format")
        p.add_argument("--network", help="circuit file to use instead of the builder")
        p.add_argument("--backend", choices=("compiled", "numpy"),
                       help="sampling kernel (default: compiled when built)")

    p = sub.add_parser("analytic", help="exact coincidence probabilities per setting")
    common(p)
    p.set_defaults(func=_cmd_analytic)

    p = sub.add_parser("simulate", help="sampled counts for all settings plus the inequality test")
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("thought", help="exact table of the annihilation variant")
    common(p)
    p.set_defaults(func=_cmd_thought)

    p = sub.add_parser("scan-delay", help="return-arm coincidence rate versus pair delay")
    common(p)
    p.add_argument("--delay-min", type=float, default=-1500.0)
    p.add_argument("--delay-max", type=float, default=1500.0)
    p.add_argument("--steps", type=int, default=61)
    p.set_defaults(func=_cmd_scan_delay)

    p = sub.add_parser("scan-phase", help="single-photon fringe versus v-arm phase")
    common(p)
    p.add_argument("--phase-min", type=float, default=0.0)
    p.add_argument("--phase-max", type=float, default=2.0 * math.pi)
    p.add_argument("--steps", type=int, default=25)
    p.set_defaults(func=_cmd_scan_phase)

    p = sub.add_parser("verify-lhv", help="check the inequality chain on all strategies")
    common(p)
    p.add_argument("--mixtures", type=int, default=1000,
                   help="random mixtures to test on top of the 16 strategies")
    p.set_defaults(func=_cmd_verify_lhv)

    p = sub.add_parser("threshold", help="analytic inequality margin versus distinguishability")
    common(p)
    p.add_argument("--p-min", type=float, default=0.0)
    p.add_argument("--p-max", type=float, default=0.3)
    p.add_argument("--steps", type=int, default=61)
    p.set_defaults(func=_cmd_threshold)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
        return args.func(config, args)
    except StatisticsError as exc:
        _say(f"error: {exc}")
        return EXIT_INCONCLUSIVE
    except (HardySimError, OSError) as exc:
        _say(f"error: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
