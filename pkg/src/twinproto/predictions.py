"""Analytic quantities derived from the exact engine.

Marginals, conditionals and forbidden coincidences are read straight off the
joint distribution of a detector placement; the branch-origin map records
which crystal(s) each interferometer branch physically comes from, which is
what the identity checks of the protocol consult.
"""

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .fock_optics import (
    DetectorConfig,
    OutcomeDistribution,
    SourceParams,
    apply_detector_config,
    apply_g_network,
    born_distribution,
    crystal_state,
    first_order_component,
    mode_for_detector,
    postselect_no_g,
)

ZERO_PROB = 1e-12
RATIONAL_TOL = 1e-9
MAX_DENOMINATOR = 100


class Crystal(enum.Enum):
    X1 = "X1"
    X2 = "X2"
    X3 = "X3"

    def __str__(self) -> str:
        return self.value


CRYSTAL_LIST = (Crystal.X1, Crystal.X2, Crystal.X3)

# Which crystals feed each interferometer branch.  Splitter outputs (c/d)
# carry no entry: their origin is indeterminate.
BRANCH_ORIGINS: Mapping[str, frozenset[Crystal]] = {
    "u+": frozenset({Crystal.X2}),
    "u-": frozenset({Crystal.X1}),
    "v+": frozenset({Crystal.X1, Crystal.X3}),
    "v-": frozenset({Crystal.X2, Crystal.X3}),
}

# The branch pair a crystal emits into, as (red branch, yellow branch).
CRYSTAL_BRANCHES: Mapping[Crystal, tuple[str, str]] = {
    Crystal.X1: ("v+", "u-"),
    Crystal.X2: ("u+", "v-"),
    Crystal.X3: ("v+", "v-"),
}


def origin_allows(detector: str, origin: Crystal) -> bool:
    """Whether a detector's branch can host a pair born in ``origin``.

    Detectors behind a splitter have indeterminate origin and allow every
    crystal.
    """
    origins = BRANCH_ORIGINS.get(mode_for_detector(detector))
    return origins is None or origin in origins


def marginal(dist: OutcomeDistribution, side: str) -> dict[str, float]:
    """Single-side detector probabilities; ``side`` is 'R+' or 'R-'."""
    if side not in ("R+", "R-"):
        raise ValueError(f"side must be 'R+' or 'R-', got {side!r}")
    out: dict[str, float] = {}
    for (red, yellow), p in dist.sorted_items():
        det = red if side == "R+" else yellow
        out[det] = out.get(det, 0.0) + p
    return out


def conditional(dist: OutcomeDistribution, given: str) -> dict[str, float]:
    """Distribution of the opposite side's detector given one detector fired."""
    reds = dist.red_detectors()
    yellows = dist.yellow_detectors()
    if given in reds:
        pairs = [(y, dist.prob(given, y)) for y in yellows]
    elif given in yellows:
        pairs = [(r, dist.prob(r, given)) for r in reds]
    else:
        raise KeyError(f"detector {given!r} does not occur in this distribution")
    total = sum(p for _, p in pairs)
    if total <= ZERO_PROB:
        raise ValueError(f"cannot condition on zero-probability detector {given!r}")
    return {det: p / total for det, p in pairs}


def forbidden_set(dist: OutcomeDistribution) -> frozenset[tuple[str, str]]:
    """Coincidences with (exactly) zero probability under this placement."""
    return frozenset(k for k, p in dist.probs.items() if p < ZERO_PROB)


def as_fraction(p: float, max_denominator: int = MAX_DENOMINATOR) -> Fraction:
    """Exact small rational behind a float probability.

    Every probability this engine produces is a rational with a small
    denominator; refusing unexpected values guards against silently
    rationalizing a corrupted table.
    """
    frac = Fraction(p).limit_denominator(max_denominator)
    if abs(float(frac) - p) > RATIONAL_TOL:
        raise ValueError(f"{p!r} is not a rational with denominator <= {max_denominator}")
    return frac


def distribution_fractions(
    probs: Mapping, max_denominator: int = MAX_DENOMINATOR
) -> dict:
    return {k: as_fraction(p, max_denominator) for k, p in probs.items()}


# --- states and tables per detector placement --------------------------------

_HARDY_CACHE: dict[str, object] = {}


def hardy_state():
    """The post-selected interferometer state feeding every placement.

    Built by running the full source pipeline: three symmetric crystals, the
    single-pair sector, the G network, then conditioning on no veto click.
    """
    if "state" not in _HARDY_CACHE:
        params = SourceParams()
        sources = [crystal_state(n, params) for n in (1, 2, 3)]
        single_pair = first_order_component(*sources)
        networked = apply_g_network(single_pair)
        survivor, probability = postselect_no_g(networked)
        _HARDY_CACHE["state"] = survivor
        _HARDY_CACHE["probability"] = probability
    return _HARDY_CACHE["state"]


def postselection_probability() -> float:
    hardy_state()
    return _HARDY_CACHE["probability"]


def state_for_config(config: DetectorConfig | str):
    if isinstance(config, str):
        config = DetectorConfig.from_name(config)
    return apply_detector_config(hardy_state(), config)


@dataclass(frozen=True)
class QuantumTables:
    """Everything the protocol needs to know about one detector placement."""

    config: DetectorConfig
    joint: OutcomeDistribution
    red_marginal: dict[str, float]
    yellow_marginal: dict[str, float]
    conditionals: dict[str, dict[str, float]]  # given detector -> other side
    forbidden: frozenset[tuple[str, str]]

    @property
    def red_detectors(self) -> tuple[str, ...]:
        return self.joint.red_detectors()

    @property
    def yellow_detectors(self) -> tuple[str, ...]:
        return self.joint.yellow_detectors()


_TABLES_CACHE: dict[DetectorConfig, QuantumTables] = {}


def tables_for(config: DetectorConfig | str) -> QuantumTables:
    if isinstance(config, str):
        config = DetectorConfig.from_name(config)
    cached = _TABLES_CACHE.get(config)
    if cached is not None:
        return cached
    joint = born_distribution(state_for_config(config))
    conds: dict[str, dict[str, float]] = {}
    for det in joint.red_detectors() + joint.yellow_detectors():
        try:
            conds[det] = conditional(joint, det)
        except ValueError:
            pass  # zero-probability detector: no conditional row
    tables = QuantumTables(
        config=config,
        joint=joint,
        red_marginal=marginal(joint, "R+"),
        yellow_marginal=marginal(joint, "R-"),
        conditionals=conds,
        forbidden=forbidden_set(joint),
    )
    _TABLES_CACHE[config] = tables
    return tables
