"""Built-in verification suite: every release criterion, checked end to end.

Each check returns a result record; the CLI prints one line per check and
the test suite asserts them individually.  Statistical checks use fixed
seeds and three-sigma binomial bands, so they are deterministic.
"""

import math
import time
from dataclasses import dataclass
from fractions import Fraction

from .fock_optics import (
    SourceParams,
    apply_g_network,
    crystal_state,
    equal_mod_global_phase,
    first_order_component,
    postselect_no_g,
    state_from_terms,
)
from .harness import binomial_bound, run_batch, tvd_bound
from .predictions import conditional, marginal, state_for_config, tables_for
from .protocol import Strategy, run_version1
from .scenarios import DEFAULT_SEED, ScenarioSpec

_SQRT3 = math.sqrt(3.0)
_SQRT6 = math.sqrt(6.0)
_SQRT12 = math.sqrt(12.0)

# Mixed-placement amplitude sets the engine must reproduce (up to one global
# phase): coefficient patterns (2, i, 1)*(i/sqrt 6) on each single-splitter
# side and (1, 3i, 1, i)*(i/sqrt 12) with both splitters in.
_EXPECTED_E1 = {
    ("c+", "v-"): 2j / _SQRT6,
    ("c+", "u-"): -1.0 / _SQRT6,
    ("d+", "u-"): 1j / _SQRT6,
}
_EXPECTED_E2 = {
    ("v+", "c-"): 2j / _SQRT6,
    ("u+", "c-"): -1.0 / _SQRT6,
    ("u+", "d-"): 1j / _SQRT6,
}
_EXPECTED_E3 = {
    ("c+", "d-"): 1j / _SQRT12,
    ("c+", "c-"): -3.0 / _SQRT12,
    ("d+", "c-"): 1j / _SQRT12,
    ("d+", "d-"): -1.0 / _SQRT12,
}

TOL = 1e-12


@dataclass
class CheckResult:
    number: int
    name: str
    ok: bool
    detail: str


def _pipeline():
    params = SourceParams()
    sources = [crystal_state(n, params) for n in (1, 2, 3)]
    networked = apply_g_network(first_order_component(*sources))
    return postselect_no_g(networked)


def check_state_reproduction() -> CheckResult:
    best = math.inf
    for _ in range(5):
        t0 = time.perf_counter()
        survivor, _ = _pipeline()
        best = min(best, time.perf_counter() - t0)
    expected = state_from_terms(
        [
            ("v+", "v-", 1.0 / _SQRT3),
            ("u+", "v-", 1j / _SQRT3),
            ("v+", "u-", 1j / _SQRT3),
        ]
    )
    ok = equal_mod_global_phase(survivor, expected, TOL) and best < 1e-3
    return CheckResult(
        1,
        "pipeline reproduces the post-selected state with (1, i, i)/sqrt(3)",
        ok,
        f"runtime {best * 1e6:.1f} us",
    )


def check_mixed_placement_states() -> CheckResult:
    ok = True
    details = []
    for name, expected in (
        ("e1", _EXPECTED_E1),
        ("e2", _EXPECTED_E2),
        ("e3", _EXPECTED_E3),
    ):
        produced = state_for_config(name)
        target = state_from_terms((r, y, a) for (r, y), a in expected.items())
        good = equal_mod_global_phase(produced, target, TOL)
        ok = ok and good
        details.append(f"{name}:{'ok' if good else 'MISMATCH'}")
    return CheckResult(
        2, "single/double splitter amplitude sets reproduced", ok, " ".join(details)
    )


def check_sampling_numbers() -> CheckResult:
    tables = tables_for("e3")
    red = marginal(tables.joint, "R+")
    given_c = conditional(tables.joint, "C+")
    given_d = conditional(tables.joint, "D+")
    values = [
        (red["C+"], 5 / 6),
        (red["D+"], 1 / 6),
        (given_c["C-"], 9 / 10),
        (given_c["D-"], 1 / 10),
        (given_d["C-"], 1 / 2),
        (given_d["D-"], 1 / 2),
    ]
    worst = max(abs(a - b) for a, b in values)
    return CheckResult(
        3,
        "both-splitters marginal 5/6,1/6 and conditionals 9/10,1/10 and 1/2,1/2",
        worst <= TOL,
        f"max error {worst:.2e}",
    )


def check_certainty_correlations() -> CheckResult:
    p1 = tables_for("e1").joint.prob("D+", "V-")
    p2 = tables_for("e2").joint.prob("V+", "D-")
    ok = p1 < TOL and p2 < TOL
    return CheckResult(
        4, "forbidden coincidences (D+,V-) and (V+,D-) vanish", ok,
        f"p={p1:.2e}, {p2:.2e}",
    )


def check_postselection_probability() -> CheckResult:
    _, probability = _pipeline()
    ok = abs(probability - 0.25) <= TOL
    return CheckResult(
        5, "no-veto post-selection keeps probability 1/4", ok,
        f"p = {probability!r}",
    )


def check_protocol_fidelity() -> CheckResult:
    spec = ScenarioSpec(
        kind="single_config",
        config="e1",
        strategy=Strategy(version="v2", leader_rule="bit_election",
                          identity_mode="none", pairing_rule="arrival_order"),
        trials=1_000_000,
        seed=DEFAULT_SEED,
    )
    t0 = time.perf_counter()
    result = run_batch(spec)
    elapsed = time.perf_counter() - t0
    ok = result.tvd_vs_quantum < 0.005 and elapsed < 10.0
    return CheckResult(
        6,
        "unconstrained elected-leader run matches the exact distribution",
        ok,
        f"tvd {result.tvd_vs_quantum:.5f}, {elapsed:.1f} s for 1e6 trials",
    )


def check_clash_rate() -> CheckResult:
    spec = ScenarioSpec(
        kind="clash_s7",
        config="e2",
        strategy=Strategy(version="v2", leader_rule="fixed_yellow",
                          identity_mode="per_pair", pairing_rule="arrival_order"),
        trials=1_000_000,
        seed=DEFAULT_SEED,
    )
    result = run_batch(spec)
    expected = Fraction(1, 9)
    oracle_ok = result.oracle.clash_rate == expected
    band = binomial_bound(float(expected), spec.trials)
    mc_ok = abs(result.rates["clash_rate"] - float(expected)) <= band
    return CheckResult(
        7,
        "identity clash rate equals 1/9 (oracle exact, Monte Carlo 3-sigma)",
        oracle_ok and mc_ok,
        f"oracle {result.oracle.clash_rate}, empirical {result.rates['clash_rate']:.6f}",
    )


def check_double_leader_deviation() -> CheckResult:
    spec = ScenarioSpec(
        kind="deadlock_v1",
        config="e3",
        strategy=Strategy(version="v1"),
        trials=1_000_000,
        seed=DEFAULT_SEED,
    )
    result = run_batch(spec)
    oracle_ok = result.oracle.tvd_vs_quantum == Fraction(1, 9)
    band = tvd_bound(
        {k: float(v) for k, v in result.oracle.joint.items()}, spec.trials
    )
    mc_ok = abs(result.tvd_vs_quantum - 1 / 9) <= band
    return CheckResult(
        8,
        "double-leader product distribution sits at TVD 1/9 from the joint",
        oracle_ok and mc_ok,
        f"oracle {result.oracle.tvd_vs_quantum}, empirical {result.tvd_vs_quantum:.6f}",
    )


def check_deadlock_detection() -> CheckResult:
    ok = True
    details = []
    for config in ("e3", "h"):
        spec = ScenarioSpec(
            kind="deadlock_v1",
            config=config,
            strategy=Strategy(version="v1"),
            trials=5_000,
            seed=DEFAULT_SEED,
        )
        result = run_batch(spec)
        every_trial = result.rates["deadlock_rate"] == 1.0
        transcript = run_version1(config, DEFAULT_SEED)
        has_event = bool(transcript.of_kind("deadlock"))
        ok = ok and every_trial and has_event
        details.append(f"{config}:{'ok' if every_trial and has_event else 'FAIL'}")
    return CheckResult(
        9, "symmetric placements deadlock on every trial", ok, " ".join(details)
    )


def check_double_pair() -> CheckResult:
    base = dict(kind="double_pair", config=None, trials=100_000, seed=DEFAULT_SEED)
    tagged = ScenarioSpec(
        strategy=Strategy(version="v2", leader_rule="fixed_yellow",
                          identity_mode="per_pair", pairing_rule="by_identity"),
        **base,
    )
    result_tagged = run_batch(tagged)
    tagged_ok = (
        result_tagged.rates["forbidden_coincidence_rate"] == 0.0
        and result_tagged.oracle.forbidden_rate == 0
    )
    random_spec = ScenarioSpec(
        strategy=Strategy(version="v2", leader_rule="fixed_yellow",
                          identity_mode="per_pair", pairing_rule="random"),
        **base,
    )
    result_random = run_batch(random_spec)
    expected = float(result_random.oracle.ambiguity_rate)
    band = binomial_bound(expected, random_spec.trials)
    random_ok = (
        result_random.oracle.ambiguity_rate > 0
        and result_random.rates["ambiguity_rate"] > 0.0
        and abs(result_random.rates["ambiguity_rate"] - expected) <= band
    )
    return CheckResult(
        10,
        "two-pair run: tagged pairing is clean, random pairing is ambiguous",
        tagged_ok and random_ok,
        f"tagged forbidden {result_tagged.rates['forbidden_coincidence_rate']:.6f}, "
        f"random ambiguity {result_random.rates['ambiguity_rate']:.6f} "
        f"(oracle {result_random.oracle.ambiguity_rate})",
    )


def check_determinism() -> CheckResult:
    spec = ScenarioSpec(
        kind="single_config",
        config="e2",
        strategy=Strategy(version="v2", leader_rule="bit_election",
                          identity_mode="per_pair", pairing_rule="arrival_order"),
        trials=50_000,
        seed=DEFAULT_SEED,
    )
    single = run_batch(spec, workers=1).to_json()
    threaded = run_batch(spec, workers=4).to_json()
    ok = single.encode() == threaded.encode()
    return CheckResult(
        11, "reports are byte-identical across 1-thread and 4-thread runs", ok,
        f"{len(single)} bytes each",
    )


_CHECKS = (
    check_state_reproduction,
    check_mixed_placement_states,
    check_sampling_numbers,
    check_certainty_correlations,
    check_postselection_probability,
    check_protocol_fidelity,
    check_clash_rate,
    check_double_leader_deviation,
    check_deadlock_detection,
    check_double_pair,
    check_determinism,
)


def run_all() -> list[CheckResult]:
    return [check() for check in _CHECKS]


def format_result(result: CheckResult) -> str:
    status = "PASS" if result.ok else "FAIL"
    return f"[{status}] {result.number:>2}. {result.name} ({result.detail})"
