"""Scenario definitions: which placement, which protocol variant, how many trials.

Scenario files are flat JSON objects mirroring the ScenarioSpec fields; any
unknown key is an error so typos cannot silently change a run.
"""

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .predictions import distribution_fractions
from .protocol import (
    PairSetup,
    Strategy,
    double_pair_trial,
    pair_setup_for,
    version1_trial,
    version2_trial,
)

KINDS = ("single_config", "double_pair", "clash_s7", "deadlock_v1")
CONFIG_NAMES = ("e1", "e2", "e3", "h")

# Fixed default so runs are reproducible without any flags.
DEFAULT_SEED = 0xC0FFEE
DEFAULT_TRIALS = 100_000

_SCENARIO_KEYS = (
    "kind",
    "config",
    "version",
    "leader_rule",
    "identity_mode",
    "pairing_rule",
    "trials",
    "seed",
)


class ScenarioError(ValueError):
    """A scenario file or override set is invalid."""


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    config: str | None
    strategy: Strategy
    trials: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "version": self.strategy.version,
            "leader_rule": self.strategy.leader_rule,
            "identity_mode": self.strategy.identity_mode,
            "pairing_rule": self.strategy.pairing_rule,
            "trials": self.trials,
            "seed": self.seed,
        }


def scenario_from_dict(data: dict) -> ScenarioSpec:
    unknown = sorted(set(data) - set(_SCENARIO_KEYS))
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {', '.join(unknown)}")
    kind = data.get("kind")
    if kind not in KINDS:
        raise ScenarioError(f"kind must be one of {KINDS}, got {kind!r}")

    # kind-specific defaults and constraints
    if kind == "single_config":
        config = data.get("config")
        if config is None:
            raise ScenarioError("single_config scenarios require a config")
        defaults = {
            "version": "v2",
            "leader_rule": "bit_election",
            "identity_mode": "none",
            "pairing_rule": "arrival_order",
        }
    elif kind == "clash_s7":
        config = data.get("config", "e2")
        if config != "e2":
            raise ScenarioError("clash_s7 runs on config e2 only")
        defaults = {
            "version": "v2",
            "leader_rule": "fixed_yellow",
            "identity_mode": "per_pair",
            "pairing_rule": "arrival_order",
        }
        if data.get("version", "v2") != "v2":
            raise ScenarioError("clash_s7 requires protocol version v2")
        if data.get("identity_mode", "per_pair") == "none":
            raise ScenarioError("clash_s7 requires an active identity mode")
    elif kind == "deadlock_v1":
        config = data.get("config", "e3")
        if config not in ("e3", "h"):
            raise ScenarioError(
                "deadlock_v1 requires a symmetric placement (config e3 or h)"
            )
        defaults = {
            "version": "v1",
            "leader_rule": "bit_election",
            "identity_mode": "none",
            "pairing_rule": "arrival_order",
        }
        if data.get("version", "v1") != "v1":
            raise ScenarioError("deadlock_v1 requires protocol version v1")
    else:  # double_pair
        config = data.get("config")
        if config is not None:
            raise ScenarioError(
                "double_pair fixes its placements (early pair e3, late pair h)"
            )
        defaults = {
            "version": "v2",
            "leader_rule": "fixed_yellow",
            "identity_mode": "per_pair",
            "pairing_rule": "by_identity",
        }
        if data.get("version", "v2") != "v2":
            raise ScenarioError("double_pair requires protocol version v2")
        if data.get("leader_rule", "fixed_yellow") != "fixed_yellow":
            raise ScenarioError("double_pair scenarios fix the yellow leaders")

    if config is not None and config not in CONFIG_NAMES:
        raise ScenarioError(f"config must be one of {CONFIG_NAMES}, got {config!r}")

    try:
        strategy = Strategy(
            version=data.get("version", defaults["version"]),
            leader_rule=data.get("leader_rule", defaults["leader_rule"]),
            identity_mode=data.get("identity_mode", defaults["identity_mode"]),
            pairing_rule=data.get("pairing_rule", defaults["pairing_rule"]),
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None

    trials = data.get("trials", DEFAULT_TRIALS)
    if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
        raise ScenarioError(f"trials must be a positive integer, got {trials!r}")
    seed = data.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ScenarioError(f"seed must be a non-negative integer, got {seed!r}")

    return ScenarioSpec(
        kind=kind, config=config, strategy=strategy, trials=trials, seed=seed
    )


def load_scenario(path: str | Path) -> ScenarioSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ScenarioError("scenario file must contain a JSON object")
    return scenario_from_dict(data)


def apply_overrides(spec: ScenarioSpec, **overrides) -> ScenarioSpec:
    """Rebuild a spec with CLI overrides applied (overrides win over file values)."""
    data = spec.to_dict()
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _SCENARIO_KEYS:
            raise ScenarioError(f"unknown override {key!r}")
        data[key] = value
    if data.get("config") is None:
        data.pop("config", None)
    return scenario_from_dict(data)


def expects_deadlock(spec: ScenarioSpec) -> bool:
    return spec.kind == "deadlock_v1"


def outcome_key(outcome: tuple) -> str:
    """Stable string form of a trial outcome, e.g. 'C+|V-' or 'C+,C-;V+,U-'."""
    if outcome and isinstance(outcome[0], tuple):
        return ";".join(",".join(pair) for pair in outcome)
    return "|".join(outcome)


@dataclass(frozen=True)
class RunPlan:
    """A scenario resolved into sampling tables and a trial function."""

    spec: ScenarioSpec
    setups: tuple[PairSetup, ...]

    def trial_callable(self):
        strategy = self.spec.strategy
        if self.spec.kind == "double_pair":
            early, late = self.setups
            return lambda chooser, recorder=None: double_pair_trial(
                early, late, strategy, chooser, recorder
            )
        setup = self.setups[0]
        if strategy.version == "v1":
            return lambda chooser, recorder=None: version1_trial(
                setup, chooser, recorder
            )
        return lambda chooser, recorder=None: version2_trial(
            setup, strategy, chooser, recorder
        )

    def quantum_reference(self) -> tuple[dict[str, float], dict[str, Fraction]]:
        """Exact coincidence distribution the protocol is compared against."""
        if self.spec.kind == "double_pair":
            early, late = self.setups
            early_fracs = distribution_fractions(early.tables.joint.probs)
            late_fracs = distribution_fractions(late.tables.joint.probs)
            fracs = {
                outcome_key((k1, k2)): p1 * p2
                for k1, p1 in sorted(early_fracs.items())
                for k2, p2 in sorted(late_fracs.items())
            }
        else:
            joint = self.setups[0].tables.joint
            fracs = {
                outcome_key(k): p
                for k, p in distribution_fractions(joint.probs).items()
            }
        return {k: float(p) for k, p in fracs.items()}, fracs


def plan_for(spec: ScenarioSpec) -> RunPlan:
    if spec.kind == "double_pair":
        setups = (pair_setup_for("e3"), pair_setup_for("h"))
    else:
        setups = (pair_setup_for(spec.config),)
    return RunPlan(spec=spec, setups=setups)
