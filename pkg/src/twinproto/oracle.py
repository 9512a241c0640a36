"""Exhaustive enumeration oracle for protocol scenarios.

Walks every uniform choice a trial can make, weighting each leaf by the exact
product of its branch probabilities.  Because the walker drives the very same
trial code the Monte Carlo runner samples, oracle and sampler cannot drift
apart.  All probabilities are Fractions, so rates like 1/9 come out exact.
"""

from dataclasses import dataclass
from fractions import Fraction

from .scenarios import RunPlan, ScenarioSpec, outcome_key, plan_for


class _NeedChoice(Exception):
    """Raised when a replayed trial reaches an undecided choice point."""

    def __init__(self, n: int):
        self.n = n


class ReplayChooser:
    """Feeds a fixed prefix of choices; raises at the first undecided one.

    Also usable in tests to force a specific trial path: supply the complete
    choice tuple and the trial runs deterministically.
    """

    def __init__(self, prefix: tuple[int, ...]):
        self.prefix = prefix
        self.position = 0

    def uniform_int(self, n: int) -> int:
        if n == 1:
            return 1
        if self.position < len(self.prefix):
            value = self.prefix[self.position]
            if not 1 <= value <= n:
                raise ValueError(f"replayed choice {value} outside 1..{n}")
            self.position += 1
            return value
        raise _NeedChoice(n)


def enumerate_trials(trial_fn) -> list[tuple[Fraction, object]]:
    """All (probability, trial result) leaves of a trial's choice tree."""
    leaves: list[tuple[Fraction, object]] = []

    def walk(prefix: tuple[int, ...], probability: Fraction):
        try:
            result = trial_fn(ReplayChooser(prefix))
        except _NeedChoice as choice:
            share = probability / choice.n
            for value in range(1, choice.n + 1):
                walk(prefix + (value,), share)
        else:
            leaves.append((probability, result))

    walk((), Fraction(1))
    return leaves


@dataclass(frozen=True)
class OracleStats:
    """Exact expected statistics of a scenario."""

    joint: dict[str, Fraction]
    clash_rate: Fraction
    ambiguity_rate: Fraction
    forbidden_rate: Fraction
    deadlock_rate: Fraction
    origin_violation_rate: Fraction
    tvd_vs_quantum: Fraction
    n_paths: int

    def rates(self) -> dict[str, Fraction]:
        return {
            "clash_rate": self.clash_rate,
            "ambiguity_rate": self.ambiguity_rate,
            "forbidden_coincidence_rate": self.forbidden_rate,
            "deadlock_rate": self.deadlock_rate,
            "origin_violation_rate": self.origin_violation_rate,
        }


def enumerate_protocol_statistics(scenario: ScenarioSpec | RunPlan) -> OracleStats:
    """Exact expected rates and joint distribution by weighted enumeration."""
    plan = scenario if isinstance(scenario, RunPlan) else plan_for(scenario)
    leaves = enumerate_trials(plan.trial_callable())

    _, quantum = plan.quantum_reference()
    joint: dict[str, Fraction] = {key: Fraction(0) for key in quantum}
    zero = Fraction(0)
    clash = ambiguity = forbidden = deadlock = violation = zero
    for probability, stats in leaves:
        key = outcome_key(stats.outcome)
        joint[key] = joint.get(key, zero) + probability
        if stats.clash:
            clash += probability
        if stats.ambiguity:
            ambiguity += probability
        if stats.forbidden:
            forbidden += probability
        if stats.deadlock:
            deadlock += probability
        if stats.origin_violation:
            violation += probability

    keys = set(joint) | set(quantum)
    tvd = sum(abs(joint.get(k, zero) - quantum.get(k, zero)) for k in keys) / 2
    return OracleStats(
        joint=dict(sorted(joint.items())),
        clash_rate=clash,
        ambiguity_rate=ambiguity,
        forbidden_rate=forbidden,
        deadlock_rate=deadlock,
        origin_violation_rate=violation,
        tvd_vs_quantum=tvd,
        n_paths=len(leaves),
    )
