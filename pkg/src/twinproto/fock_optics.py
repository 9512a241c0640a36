"""Exact two-photon amplitude engine for the three-crystal interferometer.

A state is a sparse superposition of two-photon product terms: one photon on
a "red" branch heading for the R+ region, its twin on a "yellow" branch
heading for R-.  Amplitudes are double-precision complex numbers; every
coefficient produced by this network is a small rational over sqrt(2) and
sqrt(3), so doubles with a 1e-12 comparison tolerance are ample.

Branch naming:

  red1..red3, yellow1..yellow3   crystal output branches, before any optics
  v+, u+ / v-, u-                interferometer branches after the G network
  g1..g4                         branches ending in the veto detectors
  c+, d+ / c-, d-                outputs of the final (removable) splitters

Detectors carry the upper-case name of the branch they terminate: branch
``v+`` fires detector ``V+`` and so on.

Beam-splitter convention (applies to the final splitters on each side): a
``u`` branch transmits to ``c`` and reflects with a factor i to ``d``; a
``v`` branch transmits to ``d`` and reflects with a factor i to ``c``.  This
is the unique port wiring consistent with the mixed-placement correlation
tables this engine is validated against, and the verification suite checks
the reproduction explicitly.
"""

import math
from dataclasses import dataclass, field
from typing import Iterable

AMPLITUDE_EPS = 1e-15  # terms with smaller modulus are dropped
NORM_TOL = 1e-12

CRYSTAL_RED = ("red1", "red2", "red3")
CRYSTAL_YELLOW = ("yellow1", "yellow2", "yellow3")
BRANCH_RED = ("v+", "u+")
BRANCH_YELLOW = ("v-", "u-")
G_RED = ("g2", "g4")
G_YELLOW = ("g1", "g3")
OUTPUT_RED = ("c+", "d+")
OUTPUT_YELLOW = ("c-", "d-")

RED_MODES = CRYSTAL_RED + BRANCH_RED + G_RED + OUTPUT_RED
YELLOW_MODES = CRYSTAL_YELLOW + BRANCH_YELLOW + G_YELLOW + OUTPUT_YELLOW

_RED_ORDER = {m: i for i, m in enumerate(RED_MODES)}
_YELLOW_ORDER = {m: i for i, m in enumerate(YELLOW_MODES)}

_SQRT2 = math.sqrt(2.0)


def detector_for_mode(mode: str) -> str:
    """Detector label terminating a branch: 'v+' -> 'V+', 'g3' -> 'G3'."""
    return mode.upper()


def mode_for_detector(detector: str) -> str:
    return detector.lower()


def term_sort_key(key: tuple[str, str]) -> tuple[int, int]:
    red, yellow = key
    return (_RED_ORDER[red], _YELLOW_ORDER[yellow])


@dataclass(frozen=True)
class SourceParams:
    """Amplitudes of one pump crystal: vacuum M, pair V, pump strength eta."""

    vacuum_amplitude: complex = 1.0
    pair_amplitude: complex = 1.0
    pump_strength: float = 0.1

    def __post_init__(self):
        if self.pump_strength < 0:
            raise ValueError("pump_strength must be >= 0")


@dataclass(frozen=True)
class SourceState:
    """Two-component output of one crystal: vacuum plus one photon pair."""

    crystal: int
    vacuum_amplitude: complex
    pair_amplitude: complex  # eta * V


@dataclass(frozen=True)
class BiphotonState:
    """Sparse superposition of (red branch, yellow branch) product terms.

    Terms with equal branch keys are merged at construction and amplitudes
    below AMPLITUDE_EPS are dropped, so zero components are represented by
    absence rather than by stored zeros.
    """

    terms: dict[tuple[str, str], complex] = field(default_factory=dict)

    def norm_squared(self) -> float:
        return sum(abs(a) ** 2 for a in self.terms.values())

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm_squared() - 1.0) <= NORM_TOL

    def normalized(self) -> "BiphotonState":
        n2 = self.norm_squared()
        if n2 <= AMPLITUDE_EPS**2:
            raise ValueError("cannot normalize a state with zero norm")
        scale = 1.0 / math.sqrt(n2)
        return state_from_terms(
            (r, y, a * scale) for (r, y), a in self.terms.items()
        )

    def amplitude(self, red: str, yellow: str) -> complex:
        return self.terms.get((red, yellow), 0j)

    def sorted_terms(self) -> list[tuple[tuple[str, str], complex]]:
        return sorted(self.terms.items(), key=lambda kv: term_sort_key(kv[0]))

    def __len__(self) -> int:
        return len(self.terms)


def state_from_terms(
    triples: Iterable[tuple[str, str, complex]],
) -> BiphotonState:
    """Build a state, merging duplicate keys and pruning tiny amplitudes."""
    acc: dict[tuple[str, str], complex] = {}
    for red, yellow, amp in triples:
        if red not in _RED_ORDER:
            raise ValueError(f"unknown red branch {red!r}")
        if yellow not in _YELLOW_ORDER:
            raise ValueError(f"unknown yellow branch {yellow!r}")
        key = (red, yellow)
        acc[key] = acc.get(key, 0j) + complex(amp)
    pruned = {k: a for k, a in acc.items() if abs(a) >= AMPLITUDE_EPS}
    return BiphotonState(pruned)


def canonical_phase(state: BiphotonState) -> BiphotonState:
    """Rotate the global phase so the first nonzero amplitude is positive real.

    Two states that differ only by a global phase map to the same canonical
    representative, which is how equality modulo phase is decided.
    """
    ordered = state.sorted_terms()
    if not ordered:
        return state
    _, first = ordered[0]
    rot = abs(first) / first
    return state_from_terms((r, y, a * rot) for (r, y), a in state.terms.items())


def equal_mod_global_phase(
    a: BiphotonState, b: BiphotonState, tol: float = NORM_TOL
) -> bool:
    ca, cb = canonical_phase(a), canonical_phase(b)
    keys = set(ca.terms) | set(cb.terms)
    return all(abs(ca.amplitude(*k) - cb.amplitude(*k)) <= tol for k in keys)


# --- sources -----------------------------------------------------------------

def crystal_state(n: int, params: SourceParams) -> SourceState:
    """Output of crystal ``n``: vacuum plus one (red, yellow) pair.

    The pair amplitude is pump_strength * pair_amplitude; higher pair numbers
    are outside this engine's truncation.
    """
    if n not in (1, 2, 3):
        raise ValueError(f"crystal index must be 1, 2 or 3, got {n}")
    return SourceState(
        crystal=n,
        vacuum_amplitude=complex(params.vacuum_amplitude),
        pair_amplitude=complex(params.pump_strength) * complex(params.pair_amplitude),
    )


def first_order_component(
    s1: SourceState, s2: SourceState, s3: SourceState
) -> BiphotonState:
    """Normalized single-pair sector of the triple crystal product.

    Keeps exactly the terms with one pair in one crystal and vacuum in the
    other two; the vacuum term and all multi-pair terms are discarded by
    construction.  Requires the three sources to share their amplitudes,
    which makes the three surviving terms equal and the result the uniform
    1/sqrt(3) superposition over the crystal pairs.
    """
    sources = {s.crystal: s for s in (s1, s2, s3)}
    if sorted(sources) != [1, 2, 3]:
        raise ValueError("need one source state per crystal 1, 2, 3")
    ref = sources[1]
    for s in (sources[2], sources[3]):
        if (
            abs(s.vacuum_amplitude - ref.vacuum_amplitude) > NORM_TOL
            or abs(s.pair_amplitude - ref.pair_amplitude) > NORM_TOL
        ):
            raise ValueError("sources must share vacuum and pair amplitudes")
    if abs(ref.pair_amplitude) <= AMPLITUDE_EPS or abs(ref.vacuum_amplitude) <= AMPLITUDE_EPS:
        raise ValueError("single-pair sector has zero amplitude")
    amp = 1.0 / math.sqrt(3.0)
    return state_from_terms(
        (f"red{n}", f"yellow{n}", amp) for n in (1, 2, 3)
    )


# --- the G network -----------------------------------------------------------

# Substitution of each crystal branch by its superposition over the
# interferometer branch and the veto branch.  Reflections carry a factor i;
# the routing differs per crystal because of the mirror placements.
_G_RED_SUB = {
    "red1": (("v+", 1j / _SQRT2), ("g4", 1.0 / _SQRT2)),
    "red2": (("u+", 1.0 / _SQRT2), ("g2", 1j / _SQRT2)),
    "red3": (("v+", 1.0 / _SQRT2), ("g4", 1j / _SQRT2)),
}
_G_YELLOW_SUB = {
    "yellow1": (("u-", 1.0 / _SQRT2), ("g1", 1j / _SQRT2)),
    "yellow2": (("v-", 1j / _SQRT2), ("g3", 1.0 / _SQRT2)),
    "yellow3": (("v-", 1.0 / _SQRT2), ("g3", 1j / _SQRT2)),
}


def apply_g_network(state: BiphotonState) -> BiphotonState:
    """Propagate a crystal-branch state through the four-splitter network."""
    triples = []
    for (red, yellow), amp in state.terms.items():
        if red not in _G_RED_SUB or yellow not in _G_YELLOW_SUB:
            raise ValueError(f"term ({red}, {yellow}) is not on crystal branches")
        for rmode, rcoef in _G_RED_SUB[red]:
            for ymode, ycoef in _G_YELLOW_SUB[yellow]:
                triples.append((rmode, ymode, amp * rcoef * ycoef))
    return state_from_terms(triples)


def postselect_no_g(state: BiphotonState) -> tuple[BiphotonState, float]:
    """Condition on no veto detector firing.

    Returns the renormalized surviving state together with the probability of
    the surviving sector.  Raises if nothing survives.
    """
    total = state.norm_squared()
    if total <= AMPLITUDE_EPS**2:
        raise ValueError("cannot post-select the zero state")
    kept = {
        k: a
        for k, a in state.terms.items()
        if k[0] in BRANCH_RED and k[1] in BRANCH_YELLOW
    }
    kept_mass = sum(abs(a) ** 2 for a in kept.values())
    if kept_mass <= AMPLITUDE_EPS**2:
        raise ValueError("post-selection removed the entire state")
    scale = 1.0 / math.sqrt(kept_mass)
    survivor = state_from_terms((r, y, a * scale) for (r, y), a in kept.items())
    return survivor, kept_mass / total


# --- detector placements -----------------------------------------------------

@dataclass(frozen=True)
class DetectorConfig:
    """Which sides keep their mobile branch detectors in place.

    An intercepted side measures the interferometer branches directly (U/V
    detectors); a free side routes them through the final splitter into the
    C/D detectors.
    """

    r_plus_intercepted: bool
    r_minus_intercepted: bool

    @property
    def name(self) -> str:
        for name, cfg in CONFIGS.items():
            if cfg == self:
                return name
        raise LookupError("unnamed detector configuration")

    @classmethod
    def from_name(cls, name: str) -> "DetectorConfig":
        try:
            return CONFIGS[name.lower()]
        except KeyError:
            raise ValueError(
                f"unknown config {name!r}; expected one of {sorted(CONFIGS)}"
            ) from None


CONFIGS = {
    "e1": DetectorConfig(r_plus_intercepted=False, r_minus_intercepted=True),
    "e2": DetectorConfig(r_plus_intercepted=True, r_minus_intercepted=False),
    "e3": DetectorConfig(r_plus_intercepted=False, r_minus_intercepted=False),
    "h": DetectorConfig(r_plus_intercepted=True, r_minus_intercepted=True),
}

_SPLITTER_SUB = {
    "u+": (("c+", 1.0 / _SQRT2), ("d+", 1j / _SQRT2)),
    "v+": (("d+", 1.0 / _SQRT2), ("c+", 1j / _SQRT2)),
    "u-": (("c-", 1.0 / _SQRT2), ("d-", 1j / _SQRT2)),
    "v-": (("d-", 1.0 / _SQRT2), ("c-", 1j / _SQRT2)),
}


def apply_detector_config(
    state: BiphotonState, config: DetectorConfig
) -> BiphotonState:
    """Apply the final splitter on every side whose detectors are removed."""
    triples = []
    for (red, yellow), amp in state.terms.items():
        if red not in BRANCH_RED or yellow not in BRANCH_YELLOW:
            raise ValueError(
                f"term ({red}, {yellow}) is not on interferometer branches"
            )
        red_parts = (
            ((red, 1.0),) if config.r_plus_intercepted else _SPLITTER_SUB[red]
        )
        yellow_parts = (
            ((yellow, 1.0),) if config.r_minus_intercepted else _SPLITTER_SUB[yellow]
        )
        for rmode, rcoef in red_parts:
            for ymode, ycoef in yellow_parts:
                triples.append((rmode, ymode, amp * rcoef * ycoef))
    return state_from_terms(triples)


# --- measurement statistics --------------------------------------------------

@dataclass(frozen=True)
class OutcomeDistribution:
    """Joint coincidence probabilities over (red detector, yellow detector).

    The key grid is the full product of the detectors occurring on each side,
    so impossible coincidences appear as explicit zeros.
    """

    probs: dict[tuple[str, str], float]

    def red_detectors(self) -> tuple[str, ...]:
        return tuple(sorted({r for r, _ in self.probs}))

    def yellow_detectors(self) -> tuple[str, ...]:
        return tuple(sorted({y for _, y in self.probs}))

    def prob(self, red: str, yellow: str) -> float:
        return self.probs[(red, yellow)]

    def sorted_items(self) -> list[tuple[tuple[str, str], float]]:
        return sorted(self.probs.items())

    def total(self) -> float:
        return sum(self.probs.values())


def born_distribution(state: BiphotonState) -> OutcomeDistribution:
    """Squared-modulus coincidence probabilities of a normalized state."""
    n2 = state.norm_squared()
    if abs(n2 - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm^2 = {n2!r})")
    by_key: dict[tuple[str, str], float] = {}
    reds, yellows = set(), set()
    for (red, yellow), amp in state.terms.items():
        rdet, ydet = detector_for_mode(red), detector_for_mode(yellow)
        reds.add(rdet)
        yellows.add(ydet)
        by_key[(rdet, ydet)] = by_key.get((rdet, ydet), 0.0) + abs(amp) ** 2
    probs = {
        (r, y): by_key.get((r, y), 0.0)
        for r in sorted(reds)
        for y in sorted(yellows)
    }
    return OutcomeDistribution(probs)
