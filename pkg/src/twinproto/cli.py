"""Command-line interface: predict exact tables, simulate scenarios, verify.

Exit codes for ``simulate``: 0 success, 1 unusable scenario or overrides,
2 an oracle deviation bound was violated, 3 a deadlock occurred in a
scenario that does not expect one.
"""

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .fock_optics import CONFIGS
from .harness import run_batch, unexpected_deadlock
from .predictions import conditional, forbidden_set, marginal, tables_for
from .scenarios import ScenarioError, apply_overrides, load_scenario
from .verify import format_result, run_all

_PLACEMENT_TEXT = {
    "e1": "branch detectors in place on R- only",
    "e2": "branch detectors in place on R+ only",
    "e3": "both sides behind the final splitters",
    "h": "branch detectors in place on both sides",
}


def _annotate(p: float) -> str:
    """12-digit value plus an exact small-rational note when one exists."""
    frac = Fraction(p).limit_denominator(100)
    note = f"  = {frac}" if abs(float(frac) - p) <= 1e-9 else ""
    return f"{p:.12f}{note}"


def cmd_predict(args) -> int:
    name = args.config.lower()
    if name not in CONFIGS:
        print(
            f"unknown config {args.config!r}; choose from e1, e2, e3, h",
            file=sys.stderr,
        )
        return 2
    tables = tables_for(name)
    print(f"config {name}: {_PLACEMENT_TEXT[name]}")
    print("joint coincidences:")
    for (red, yellow), p in tables.joint.sorted_items():
        print(f"  ({red},{yellow})  {_annotate(p)}")
    for side, label in (("R+", "R+"), ("R-", "R-")):
        entries = marginal(tables.joint, side)
        row = ",  ".join(f"{det} {_annotate(p)}" for det, p in sorted(entries.items()))
        print(f"marginal {label}:  {row}")
    print("conditionals:")
    for det in tables.red_detectors + tables.yellow_detectors:
        try:
            cond = conditional(tables.joint, det)
        except ValueError:
            continue
        row = ",  ".join(f"{d} {_annotate(p)}" for d, p in sorted(cond.items()))
        print(f"  given {det}:  {row}")
    forbidden = sorted(forbidden_set(tables.joint))
    if forbidden:
        print("forbidden: " + ", ".join(f"({r},{y})" for r, y in forbidden))
    else:
        print("forbidden: none")
    return 0


def cmd_simulate(args) -> int:
    try:
        spec = load_scenario(args.scenario)
        spec = apply_overrides(
            spec,
            trials=args.trials,
            seed=args.seed,
            config=args.config,
            version=args.protocol_version,
            leader_rule=args.leader_rule,
            identity_mode=args.identity_mode,
            pairing_rule=args.pairing_rule,
        )
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    result = run_batch(spec, workers=args.workers)

    if args.format == "json":
        payload = result.to_json()
    elif args.format == "csv":
        payload = result.to_csv()
    else:
        payload = None

    if args.out:
        text = payload if payload is not None else result.to_json()
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"report written to {args.out}")
    elif payload is not None:
        print(payload, end="")

    print(result.summary_table())

    if unexpected_deadlock(result):
        print("error: deadlock in a scenario that does not expect one",
              file=sys.stderr)
        return 3
    if not result.all_bounds_ok:
        print("error: oracle deviation bound violated", file=sys.stderr)
        return 2
    return 0


def cmd_verify(_args) -> int:
    results = run_all()
    for result in results:
        print(format_result(result))
    failed = [r for r in results if not r.ok]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 0 if not failed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twinproto",
        description=(
            "Exact biphoton interference tables and Monte Carlo runs of "
            "hypothetical faster-than-light signalling protocols."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_predict = sub.add_parser(
        "predict", help="print the exact quantum tables for a placement"
    )
    p_predict.add_argument("config", help="one of e1, e2, e3, h")
    p_predict.set_defaults(func=cmd_predict)

    p_sim = sub.add_parser("simulate", help="run a scenario batch")
    p_sim.add_argument("--scenario", required=True, help="scenario JSON file")
    p_sim.add_argument("--trials", type=int, default=None)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--config", default=None, help="placement override")
    p_sim.add_argument(
        "--protocol-version", choices=("v1", "v2"), default=None,
        dest="protocol_version",
    )
    p_sim.add_argument(
        "--leader-rule",
        choices=("fixed_red", "fixed_yellow", "bit_election"),
        default=None,
    )
    p_sim.add_argument(
        "--identity-mode",
        choices=("none", "per_pair", "triple_vote"),
        default=None,
    )
    p_sim.add_argument(
        "--pairing-rule",
        choices=("by_identity", "arrival_order", "random"),
        default=None,
    )
    p_sim.add_argument("--format", choices=("json", "csv", "table"), default="table")
    p_sim.add_argument("--out", default=None, help="write the report to this path")
    p_sim.add_argument("--workers", type=int, default=1)
    p_sim.set_defaults(func=cmd_simulate)

    p_verify = sub.add_parser("verify", help="run the built-in acceptance suite")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
