"""Monte Carlo batch runner with built-in oracle comparison.

Every batch is checked against the exact enumeration oracle: each reported
rate and each joint outcome probability must land within three binomial
standard deviations of its expectation.  Per-trial seeds derive from
(base seed, trial index), so results are byte-identical no matter how trials
are spread over worker threads.
"""

import csv
import io
import json
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

from .oracle import OracleStats, enumerate_protocol_statistics
from .rng import RandomChooser, trial_seed
from .scenarios import ScenarioSpec, expects_deadlock, outcome_key, plan_for

_FLOAT_SLACK = 1e-12  # guards exact-zero bounds against float dust


def total_variation_distance(p: Mapping, q: Mapping) -> float:
    """(1/2) sum |p - q| over the union of both supports."""
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def binomial_bound(rate: float, trials: int) -> float:
    """Three-sigma band for an empirical frequency of a rate-``rate`` event."""
    return 3.0 * math.sqrt(max(rate * (1.0 - rate), 0.0) / trials)


def tvd_bound(reference: Mapping[str, float], trials: int) -> float:
    """Bound on |empirical TVD - expected TVD| via per-outcome 3-sigma bands.

    |tvd(f, q) - tvd(p, q)| <= tvd(f, p) <= (1/2) sum_k 3 sigma_k, where p is
    the expected empirical distribution.
    """
    return 0.5 * sum(binomial_bound(p, trials) for p in reference.values())


@dataclass
class BatchResult:
    """Aggregated statistics of one scenario batch plus its oracle targets."""

    spec: ScenarioSpec
    counts: dict[str, int]
    empirical: dict[str, float]
    rates: dict[str, float]
    deadlock_flag: bool
    tvd_vs_quantum: float
    quantum: dict[str, float]
    oracle: OracleStats
    bound_checks: list[dict]
    all_bounds_ok: bool

    def to_json_dict(self) -> dict:
        oracle_joint = {k: float(v) for k, v in self.oracle.joint.items()}
        oracle_rates = {k: float(v) for k, v in self.oracle.rates().items()}
        return {
            "scenario": self.spec.to_dict(),
            "counts": dict(sorted(self.counts.items())),
            "empirical": dict(sorted(self.empirical.items())),
            "rates": dict(sorted(self.rates.items())),
            "deadlock_flag": self.deadlock_flag,
            "tvd_vs_quantum": self.tvd_vs_quantum,
            "quantum": dict(sorted(self.quantum.items())),
            "oracle": {
                "joint": oracle_joint,
                "joint_exact": {k: str(v) for k, v in self.oracle.joint.items()},
                "rates": oracle_rates,
                "rates_exact": {k: str(v) for k, v in self.oracle.rates().items()},
                "tvd_vs_quantum": float(self.oracle.tvd_vs_quantum),
                "tvd_vs_quantum_exact": str(self.oracle.tvd_vs_quantum),
                "n_paths": self.oracle.n_paths,
            },
            "bound_checks": self.bound_checks,
            "all_bounds_ok": self.all_bounds_ok,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["row_type", "key", "empirical", "oracle", "quantum"])
        oracle_joint = self.oracle.joint
        for key in sorted(self.empirical):
            writer.writerow(
                [
                    "outcome",
                    key,
                    f"{self.empirical[key]:.12g}",
                    f"{float(oracle_joint.get(key, 0)):.12g}",
                    f"{self.quantum.get(key, 0.0):.12g}",
                ]
            )
        oracle_rates = self.oracle.rates()
        for key in sorted(self.rates):
            writer.writerow(
                ["rate", key, f"{self.rates[key]:.12g}",
                 f"{float(oracle_rates[key]):.12g}", ""]
            )
        writer.writerow(
            ["rate", "tvd_vs_quantum", f"{self.tvd_vs_quantum:.12g}",
             f"{float(self.oracle.tvd_vs_quantum):.12g}", ""]
        )
        return buffer.getvalue()

    def summary_table(self) -> str:
        spec = self.spec
        head = (
            f"scenario {spec.kind}"
            + (f" config={spec.config}" if spec.config else "")
            + f" version={spec.strategy.version}"
            f" leader={spec.strategy.leader_rule}"
            f" identity={spec.strategy.identity_mode}"
            f" pairing={spec.strategy.pairing_rule}"
            f" trials={spec.trials} seed={spec.seed}"
        )
        lines = [head, "", f"{'outcome':<24}{'empirical':>14}{'oracle':>14}{'quantum':>14}"]
        for key in sorted(self.empirical):
            lines.append(
                f"{key:<24}{self.empirical[key]:>14.6f}"
                f"{float(self.oracle.joint.get(key, 0)):>14.6f}"
                f"{self.quantum.get(key, 0.0):>14.6f}"
            )
        lines.append("")
        oracle_rates = self.oracle.rates()
        for key in sorted(self.rates):
            exact = oracle_rates[key]
            lines.append(
                f"{key:<28}empirical≈{self.rates[key]:.6f}  oracle={float(exact):.6f}"
                + (f" (= {exact})" if exact else "")
            )
        lines.append(
            f"{'tvd_vs_quantum':<28}empirical≈{self.tvd_vs_quantum:.6f}"
            f"  oracle={float(self.oracle.tvd_vs_quantum):.6f}"
            + (
                f" (= {self.oracle.tvd_vs_quantum})"
                if self.oracle.tvd_vs_quantum
                else ""
            )
        )
        lines.append(f"deadlock: {'true' if self.deadlock_flag else 'false'}")
        lines.append(
            "oracle bounds: "
            + ("all satisfied" if self.all_bounds_ok else "VIOLATED")
        )
        return "\n".join(lines)


class _Aggregate:
    __slots__ = ("counts", "clash", "ambiguity", "forbidden", "deadlock", "violation")

    def __init__(self):
        self.counts = Counter()
        self.clash = 0
        self.ambiguity = 0
        self.forbidden = 0
        self.deadlock = 0
        self.violation = 0

    def merge(self, other: "_Aggregate"):
        self.counts.update(other.counts)
        self.clash += other.clash
        self.ambiguity += other.ambiguity
        self.forbidden += other.forbidden
        self.deadlock += other.deadlock
        self.violation += other.violation


def _run_range(trial_fn, base_seed: int, start: int, stop: int) -> _Aggregate:
    agg = _Aggregate()
    counts = agg.counts
    for index in range(start, stop):
        stats = trial_fn(RandomChooser(trial_seed(base_seed, index)))
        counts[stats.outcome] += 1
        if stats.clash:
            agg.clash += 1
        if stats.ambiguity:
            agg.ambiguity += 1
        if stats.forbidden:
            agg.forbidden += 1
        if stats.deadlock:
            agg.deadlock += 1
        if stats.origin_violation:
            agg.violation += 1
    return agg


def run_batch(spec: ScenarioSpec, workers: int = 1) -> BatchResult:
    """Run ``spec.trials`` independent trials and compare against the oracle."""
    if spec.trials < 1:
        raise ValueError("need at least one trial")
    if workers < 1:
        raise ValueError("need at least one worker")
    plan = plan_for(spec)
    trial_fn = plan.trial_callable()

    if workers == 1 or spec.trials < 2 * workers:
        agg = _run_range(trial_fn, spec.seed, 0, spec.trials)
    else:
        chunk = (spec.trials + workers - 1) // workers
        ranges = [
            (lo, min(lo + chunk, spec.trials))
            for lo in range(0, spec.trials, chunk)
        ]
        agg = _Aggregate()
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_range, trial_fn, spec.seed, lo, hi)
                for lo, hi in ranges
            ]
            # merge in submission order: aggregation is commutative anyway
            for future in futures:
                agg.merge(future.result())

    oracle = enumerate_protocol_statistics(plan)
    quantum_floats, _ = plan.quantum_reference()

    n = spec.trials
    keys = sorted(set(oracle.joint) | {outcome_key(k) for k in agg.counts})
    counts = {key: 0 for key in keys}
    for outcome, count in agg.counts.items():
        counts[outcome_key(outcome)] = count
    empirical = {key: counts[key] / n for key in keys}
    rates = {
        "clash_rate": agg.clash / n,
        "ambiguity_rate": agg.ambiguity / n,
        "forbidden_coincidence_rate": agg.forbidden / n,
        "deadlock_rate": agg.deadlock / n,
        "origin_violation_rate": agg.violation / n,
    }
    tvd = total_variation_distance(empirical, quantum_floats)

    checks: list[dict] = []

    def check(name: str, observed: float, expected: float, bound: float):
        ok = abs(observed - expected) <= bound + _FLOAT_SLACK
        checks.append(
            {
                "name": name,
                "empirical": observed,
                "expected": expected,
                "bound": bound,
                "ok": ok,
            }
        )

    for key in keys:
        expected = float(oracle.joint.get(key, 0))
        check(f"p[{key}]", empirical[key], expected, binomial_bound(expected, n))
    oracle_rates = oracle.rates()
    for key, value in rates.items():
        expected = float(oracle_rates[key])
        check(key, value, expected, binomial_bound(expected, n))
    oracle_joint_floats = {k: float(v) for k, v in oracle.joint.items()}
    check(
        "tvd_vs_quantum",
        tvd,
        float(oracle.tvd_vs_quantum),
        tvd_bound(oracle_joint_floats, n),
    )

    return BatchResult(
        spec=spec,
        counts=counts,
        empirical=empirical,
        rates=rates,
        deadlock_flag=agg.deadlock > 0,
        tvd_vs_quantum=tvd,
        quantum=quantum_floats,
        oracle=oracle,
        bound_checks=checks,
        all_bounds_ok=all(c["ok"] for c in checks),
    )


def run_double_pair(spec: ScenarioSpec, workers: int = 1) -> BatchResult:
    """Batch runner for the simultaneous two-pair scenario."""
    if spec.kind != "double_pair":
        raise ValueError(f"expected a double_pair scenario, got {spec.kind!r}")
    return run_batch(spec, workers=workers)


def unexpected_deadlock(result: BatchResult) -> bool:
    return result.deadlock_flag and not expects_deadlock(result.spec)
