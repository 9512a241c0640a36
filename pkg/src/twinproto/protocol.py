"""Hypothetical faster-than-light message protocol between twin photons.

One photon of a pair (the *leader*) answers its detectors independently and
broadcasts the result; its twin (the *follower*) answers from the conditional
table given the reported detector.  Everything random is drawn through a
single ``uniform_int`` choice interface, so a Monte Carlo sampler and an
exhaustive enumerator execute literally the same trial code.

Failure events the simulation surfaces:

  deadlock    protocol v1 with symmetric detector placement: nothing selects
              a leader; the trial also records the double-leader sub-mode
              where both photons answer independently.
  clash       active pair identities make a required answer unavailable: the
              leader's own sampled branch excludes the pair's birth crystal,
              or the conditional forced by the leader's report has no
              origin-compatible support.
  ambiguity   a follower holds a broadcast message that does not apply to its
              own detector set (multi-pair scenarios); it falls back to a
              uniform local guess.

Sampling follows an exact integer-grid scheme: each probability table is
expressed over its least common denominator and a uniform integer in 1..n
selects the detector, so finite counting reproduces every table exactly.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

from .fock_optics import DetectorConfig, detector_for_mode
from .predictions import (
    CRYSTAL_BRANCHES,
    CRYSTAL_LIST,
    Crystal,
    QuantumTables,
    as_fraction,
    origin_allows,
    tables_for,
)
from .rng import RandomChooser

VERSIONS = ("v1", "v2")
LEADER_RULES = ("fixed_red", "fixed_yellow", "bit_election")
IDENTITY_MODES = ("none", "per_pair", "triple_vote")
PAIRING_RULES = ("by_identity", "arrival_order", "random")

_EMPTY_ORIGINS: frozenset[Crystal] = frozenset()


class ProtocolError(Exception):
    """A trial was configured or driven inconsistently."""


def detector_region(detector: str) -> str:
    return "R+" if detector.endswith("+") else "R-"


def other_region(region: str) -> str:
    return "R-" if region == "R+" else "R+"


@dataclass(frozen=True)
class Strategy:
    """Protocol variant: version x leader rule x identity mode x pairing."""

    version: str = "v2"
    leader_rule: str = "bit_election"
    identity_mode: str = "none"
    pairing_rule: str = "arrival_order"

    def __post_init__(self):
        if self.version not in VERSIONS:
            raise ValueError(f"version must be one of {VERSIONS}")
        if self.leader_rule not in LEADER_RULES:
            raise ValueError(f"leader_rule must be one of {LEADER_RULES}")
        if self.identity_mode not in IDENTITY_MODES:
            raise ValueError(f"identity_mode must be one of {IDENTITY_MODES}")
        if self.pairing_rule not in PAIRING_RULES:
            raise ValueError(f"pairing_rule must be one of {PAIRING_RULES}")
        if self.pairing_rule == "by_identity" and self.identity_mode == "none":
            raise ValueError("by_identity pairing requires an identity mode")


@dataclass(frozen=True)
class PairIdentity:
    """Name a pair receives at generation; both photons share it."""

    tag: int
    origin: Crystal


@dataclass(frozen=True)
class PhotonAgent:
    color: str  # "red" | "yellow"
    region: str  # red lives in R+, yellow in R-
    identity: PairIdentity | None = None
    role: str = "undecided"  # "leader" | "follower" | "undecided"


@dataclass(frozen=True)
class Message:
    """Broadcast record of one measurement; carries only local information."""

    sender_region: str
    reported_detector: str
    identity_tag: int | None
    timestamp: int

    def __post_init__(self):
        if detector_region(self.reported_detector) != self.sender_region:
            raise ProtocolError(
                f"message from {self.sender_region} cannot report "
                f"{self.reported_detector}: not local"
            )


@dataclass
class Event:
    time: int
    kind: str
    payload: dict


@dataclass
class Transcript:
    """Ordered protocol events of one trial, with summary statistics."""

    events: list[Event] = field(default_factory=list)
    stats: "TrialStats | None" = None

    def add(self, time: int, kind: str, **payload):
        self.events.append(Event(time, kind, payload))

    def of_kind(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]

    def to_ndjson(self) -> str:
        lines = [
            json.dumps({"t": e.time, "kind": e.kind, **e.payload}, sort_keys=True)
            for e in self.events
        ]
        return "\n".join(lines)


class TrialStats(NamedTuple):
    outcome: tuple
    clash: bool
    ambiguity: bool
    deadlock: bool
    forbidden: bool
    origin_violation: bool


# --- exact integer-grid sampling ----------------------------------------------

@dataclass(frozen=True)
class GridTable:
    """A probability table expressed as integer counts over a uniform grid."""

    detectors: tuple[str, ...]
    counts: tuple[int, ...]
    size: int
    lookup: tuple[str, ...]

    @classmethod
    def from_weights(cls, weights: Mapping[str, float]) -> "GridTable":
        fracs = {
            det: as_fraction(p) for det, p in weights.items() if p > 0.0
        }
        if not fracs:
            raise ValueError("cannot build a grid from an all-zero table")
        size = math.lcm(*(f.denominator for f in fracs.values()))
        entries = sorted(
            ((det, int(f * size)) for det, f in fracs.items()),
            key=lambda e: (-e[1], e[0]),
        )
        if sum(c for _, c in entries) != size:
            raise ValueError("table weights do not sum to one")
        lookup: list[str] = []
        for det, count in entries:
            lookup.extend([det] * count)
        return cls(
            detectors=tuple(det for det, _ in entries),
            counts=tuple(count for _, count in entries),
            size=size,
            lookup=tuple(lookup),
        )

    def pick(self, n: int) -> str:
        return self.lookup[n - 1]


_GRID_CACHE: dict[tuple, GridTable] = {}


def integer_grid(weights: Mapping[str, float]) -> GridTable:
    key = tuple(sorted(weights.items()))
    grid = _GRID_CACHE.get(key)
    if grid is None:
        grid = GridTable.from_weights(weights)
        _GRID_CACHE[key] = grid
    return grid


def sample_integer_grid(marginal: Mapping[str, float], n: int) -> str:
    """Detector selected by integer ``n`` on the marginal's exact grid.

    A uniform n over 1..grid size induces exactly the marginal, which is how
    the protocol "ruffles" independent answers to match the predicted
    probabilities.
    """
    grid = integer_grid(marginal)
    if not 1 <= n <= grid.size:
        raise ValueError(f"n must lie in 1..{grid.size}, got {n}")
    return grid.pick(n)


# --- elections and identities --------------------------------------------------

def elect_leader(bit_1: int, bit_2: int) -> int:
    """Two-node election: identical bits pick node 1, differing bits node 2."""
    if bit_1 not in (0, 1) or bit_2 not in (0, 1):
        raise ValueError("election bits must be 0 or 1")
    return 1 if bit_1 == bit_2 else 2


def assign_identity(
    mode: str,
    origin: Crystal | None,
    counter: int,
    chooser,
) -> tuple[PairIdentity, dict]:
    """Create the pair's identity; returns (identity, generation payload).

    per_pair stamps the known birth crystal.  triple_vote generates one
    candidate identity per crystal and elects one by three uniform votes;
    a three-way tie falls to the first voter's candidate.
    """
    if mode == "per_pair":
        if origin is None:
            raise ProtocolError("per_pair identity requires a birth crystal")
        return PairIdentity(counter, origin), {}
    if mode != "triple_vote":
        raise ValueError(f"no identity to assign for mode {mode!r}")
    candidates = [PairIdentity(counter, x) for x in CRYSTAL_LIST]
    votes = [chooser.uniform_int(3) for _ in range(3)]
    tally = {v: votes.count(v) for v in set(votes)}
    best = max(tally.values())
    winner = votes[0] if best == 1 else next(v for v, c in tally.items() if c == best)
    payload = {
        "candidates": [str(c.origin) for c in candidates],
        "votes": votes,
        "elected": str(candidates[winner - 1].origin),
    }
    return candidates[winner - 1], payload


# --- per-placement protocol tables ----------------------------------------------

@dataclass(frozen=True)
class PairSetup:
    """Precomputed sampling tables and identity data for one placement."""

    config: DetectorConfig
    config_name: str
    tables: QuantumTables
    red_detectors: tuple[str, ...]
    yellow_detectors: tuple[str, ...]
    red_marginal_grid: GridTable
    yellow_marginal_grid: GridTable
    cond_grids: Mapping[str, GridTable]
    forbidden: frozenset[tuple[str, str]]
    # Detector forced on each intercepted side per birth crystal (the branch
    # an identity from that crystal physically lives on); None if the side's
    # branch detectors are removed.
    forced_red: Mapping[Crystal, str] | None
    forced_yellow: Mapping[Crystal, str] | None
    # Origins for which a reported detector leaves the follower no
    # origin-compatible answer in its conditional support.
    unavailable_origins: Mapping[str, frozenset[Crystal]]


_SETUP_CACHE: dict[str, PairSetup] = {}


def pair_setup_for(config: DetectorConfig | str) -> PairSetup:
    if isinstance(config, str):
        config = DetectorConfig.from_name(config)
    name = config.name
    cached = _SETUP_CACHE.get(name)
    if cached is not None:
        return cached

    tables = tables_for(config)
    cond_grids = {
        given: integer_grid(cond) for given, cond in tables.conditionals.items()
    }
    unavailable: dict[str, frozenset[Crystal]] = {}
    for given, grid in cond_grids.items():
        bad = frozenset(
            x
            for x in CRYSTAL_LIST
            if not any(origin_allows(det, x) for det in grid.detectors)
        )
        if bad:
            unavailable[given] = bad
    forced_red = (
        {x: detector_for_mode(CRYSTAL_BRANCHES[x][0]) for x in CRYSTAL_LIST}
        if config.r_plus_intercepted
        else None
    )
    forced_yellow = (
        {x: detector_for_mode(CRYSTAL_BRANCHES[x][1]) for x in CRYSTAL_LIST}
        if config.r_minus_intercepted
        else None
    )
    setup = PairSetup(
        config=config,
        config_name=name,
        tables=tables,
        red_detectors=tables.red_detectors,
        yellow_detectors=tables.yellow_detectors,
        red_marginal_grid=integer_grid(tables.red_marginal),
        yellow_marginal_grid=integer_grid(tables.yellow_marginal),
        cond_grids=cond_grids,
        forbidden=tables.forbidden,
        forced_red=forced_red,
        forced_yellow=forced_yellow,
        unavailable_origins=unavailable,
    )
    _SETUP_CACHE[name] = setup
    return setup


# --- message pairing -------------------------------------------------------------

class FollowerSlot(NamedTuple):
    agent: PhotonAgent
    pair_index: int
    known_reports: frozenset[str]

    @property
    def region(self) -> str:
        return self.agent.region

    @property
    def identity_tag(self) -> int | None:
        return None if self.agent.identity is None else self.agent.identity.tag


def deliver_and_pair(
    messages: Sequence[Message],
    followers: Sequence[FollowerSlot],
    rule: str,
    chooser,
) -> list[tuple[FollowerSlot, Message, bool]]:
    """Resolve which broadcast message each follower obeys.

    Returns (follower, message, ambiguous) triples in follower order, where
    ambiguous marks a message reporting a detector the follower has no
    conditional row for.  Ties in arrival order (simultaneous broadcasts) are
    broken by (sender region, identity tag, emission order).
    """
    if len(messages) != len(followers):
        raise ProtocolError("need exactly one message per follower")
    if rule == "by_identity":
        if any(m.identity_tag is None for m in messages):
            raise ProtocolError("by_identity pairing requires tagged messages")
        by_tag = {m.identity_tag: m for m in messages}
        if len(by_tag) != len(messages):
            raise ProtocolError("duplicate identity tags in broadcast set")
        try:
            matched = [(f, by_tag[f.identity_tag]) for f in followers]
        except KeyError as exc:
            raise ProtocolError(f"no message addressed to identity {exc}") from None
    elif rule == "arrival_order":
        msg_order = sorted(
            range(len(messages)),
            key=lambda i: (
                messages[i].timestamp,
                messages[i].sender_region,
                messages[i].identity_tag if messages[i].identity_tag is not None else i,
                i,
            ),
        )
        fol_order = sorted(
            range(len(followers)),
            key=lambda i: (
                followers[i].region,
                followers[i].identity_tag if followers[i].identity_tag is not None else i,
                i,
            ),
        )
        assignment = {fi: messages[mi] for fi, mi in zip(fol_order, msg_order)}
        matched = [(f, assignment[i]) for i, f in enumerate(followers)]
    elif rule == "random":
        idx = list(range(len(messages)))
        for i in range(len(idx) - 1, 0, -1):
            j = chooser.uniform_int(i + 1) - 1
            idx[i], idx[j] = idx[j], idx[i]
        matched = [(f, messages[idx[i]]) for i, f in enumerate(followers)]
    else:
        raise ValueError(f"unknown pairing rule {rule!r}")
    return [
        (f, m, m.reported_detector not in f.known_reports) for f, m in matched
    ]


# --- trial cores -----------------------------------------------------------------

def _leader_choice(
    setup: PairSetup,
    identity_mode: str,
    origin: Crystal | None,
    leader_region: str,
    chooser,
    recorder: Transcript | None,
    t: int,
    pair_index: int,
    double_leader: bool = False,
) -> tuple[str, bool, bool]:
    """Leader answers its own side; returns (detector, clash, violation)."""
    if leader_region == "R+":
        grid, forced_map = setup.red_marginal_grid, setup.forced_red
    else:
        grid, forced_map = setup.yellow_marginal_grid, setup.forced_yellow
    forced = None
    if identity_mode == "triple_vote" and forced_map is not None:
        # The elected identity lives on one branch pair; an intercepted side
        # reads that branch out directly.
        forced = forced_map[origin]
    if forced is not None:
        det = forced
        origin_ok = True
    else:
        det = grid.lookup[chooser.uniform_int(grid.size) - 1]
        origin_ok = origin is None or origin_allows(det, origin)
    clash = not origin_ok
    if recorder is not None:
        recorder.add(
            t,
            "leader_choice",
            pair=pair_index,
            region=leader_region,
            detector=det,
            forced_by_identity=forced is not None,
            origin_ok=origin_ok,
            double_leader=double_leader,
        )
        if clash:
            recorder.add(
                t,
                "clash",
                pair=pair_index,
                cause="leader_choice",
                detector=det,
                origin=str(origin),
            )
    return det, clash, not origin_ok


def _follower_choice(
    setup: PairSetup,
    identity_mode: str,
    origin: Crystal | None,
    follower_region: str,
    report: str,
    chooser,
    recorder: Transcript | None,
    t: int,
    pair_index: int,
) -> tuple[str, bool, bool, bool]:
    """Follower answers a delivered report.

    Returns (detector, clash, violation, ambiguous).  A clash fires when the
    conditional demanded by the report has no origin-compatible support; the
    follower still answers from the unrestricted conditional, so the clash is
    exposed rather than papered over by resampling.
    """
    if follower_region == "R+":
        local, forced_map = setup.red_detectors, setup.forced_red
    else:
        local, forced_map = setup.yellow_detectors, setup.forced_yellow
    if identity_mode == "triple_vote" and forced_map is not None:
        det = forced_map[origin]
        if recorder is not None:
            recorder.add(
                t,
                "follower_choice",
                pair=pair_index,
                region=follower_region,
                detector=det,
                given=report,
                forced_by_identity=True,
                ambiguous=False,
                origin_ok=True,
            )
        return det, False, False, False
    clash = False
    grid = setup.cond_grids.get(report)
    if grid is None:
        # the message is not for this photon: flagged, maximally uninformative
        ambiguous = True
        if recorder is not None:
            recorder.add(
                t,
                "ambiguity",
                pair=pair_index,
                region=follower_region,
                message_detector=report,
            )
        det = local[chooser.uniform_int(len(local)) - 1]
    else:
        ambiguous = False
        if origin is not None and origin in setup.unavailable_origins.get(
            report, _EMPTY_ORIGINS
        ):
            clash = True
            if recorder is not None:
                recorder.add(
                    t,
                    "clash",
                    pair=pair_index,
                    cause="required_unavailable",
                    given=report,
                    origin=str(origin),
                )
        det = grid.lookup[chooser.uniform_int(grid.size) - 1]
    origin_ok = origin is None or origin_allows(det, origin)
    if recorder is not None:
        recorder.add(
            t,
            "follower_choice",
            pair=pair_index,
            region=follower_region,
            detector=det,
            given=report,
            forced_by_identity=False,
            ambiguous=ambiguous,
            origin_ok=origin_ok,
        )
    return det, clash, not origin_ok, ambiguous


def _record_broadcast(
    recorder: Transcript | None,
    t: int,
    pair_index: int,
    sender_region: str,
    detector: str,
    tag: int | None,
    to_regions: Sequence[str],
):
    if recorder is None:
        return
    recorder.add(
        t,
        "broadcast",
        pair=pair_index,
        sender_region=sender_region,
        detector=detector,
        identity_tag=tag,
    )
    for region in to_regions:
        recorder.add(
            t,
            "delivery",
            to_region=region,
            detector=detector,
            identity_tag=tag,
        )


def _generation(
    setup_name: str,
    strategy: Strategy,
    counter: int,
    chooser,
    recorder: Transcript | None,
    t: int,
) -> tuple[PairIdentity | None, Crystal | None]:
    """Create one pair: draw its birth crystal and assign its identity."""
    identity, origin, extra = None, None, {}
    if strategy.identity_mode == "per_pair":
        origin = CRYSTAL_LIST[chooser.uniform_int(3) - 1]
        identity, extra = assign_identity("per_pair", origin, counter, chooser)
    elif strategy.identity_mode == "triple_vote":
        identity, extra = assign_identity("triple_vote", None, counter, chooser)
        origin = identity.origin
    if recorder is not None:
        recorder.add(
            t,
            "generation",
            pair=counter,
            config=setup_name,
            identity_mode=strategy.identity_mode,
            origin=None if origin is None else str(origin),
            identity_tag=None if identity is None else identity.tag,
            **extra,
        )
    return identity, origin


def version2_trial(
    setup: PairSetup,
    strategy: Strategy,
    chooser,
    recorder: Transcript | None = None,
    identity_counter: int = 1,
) -> TrialStats:
    """One elected-leader trial on a single pair."""
    identity, origin = _generation(
        setup.config_name, strategy, identity_counter, chooser, recorder, 0
    )
    mode = strategy.identity_mode
    if strategy.leader_rule == "fixed_red":
        leader_region = "R+"
        if recorder is not None:
            recorder.add(1, "election", method="fixed_red", leader=leader_region)
    elif strategy.leader_rule == "fixed_yellow":
        leader_region = "R-"
        if recorder is not None:
            recorder.add(1, "election", method="fixed_yellow", leader=leader_region)
    else:
        bit_plus = chooser.uniform_int(2) - 1
        bit_minus = chooser.uniform_int(2) - 1
        leader_region = "R+" if elect_leader(bit_plus, bit_minus) == 1 else "R-"
        if recorder is not None:
            recorder.add(
                1,
                "election",
                method="bit_election",
                bit_r_plus=bit_plus,
                bit_r_minus=bit_minus,
                leader=leader_region,
            )
    leader_det, l_clash, l_viol = _leader_choice(
        setup, mode, origin, leader_region, chooser, recorder, 2, identity_counter
    )
    follower_region = other_region(leader_region)
    tag = None if identity is None else identity.tag
    _record_broadcast(
        recorder, 2, identity_counter, leader_region, leader_det, tag,
        (follower_region,),
    )
    f_det, f_clash, f_viol, ambiguous = _follower_choice(
        setup, mode, origin, follower_region, leader_det, chooser, recorder, 2,
        identity_counter,
    )
    if leader_region == "R+":
        outcome = (leader_det, f_det)
    else:
        outcome = (f_det, leader_det)
    return TrialStats(
        outcome=outcome,
        clash=l_clash or f_clash,
        ambiguity=ambiguous,
        deadlock=False,
        forbidden=outcome in setup.forbidden,
        origin_violation=l_viol or f_viol,
    )


def version1_trial(
    setup: PairSetup,
    chooser,
    recorder: Transcript | None = None,
) -> TrialStats:
    """One placement-led trial: roles come from the detector placement alone.

    With exactly one side intercepted, the side whose own branch detectors
    are removed answers independently and leads.  A symmetric placement
    leaves no leader: the trial records a deadlock and then the double-leader
    sub-mode, where both photons answer their marginals independently.
    """
    if recorder is not None:
        recorder.add(
            0,
            "generation",
            pair=1,
            config=setup.config_name,
            identity_mode="none",
            origin=None,
            identity_tag=None,
        )
    plus_i = setup.config.r_plus_intercepted
    minus_i = setup.config.r_minus_intercepted
    if plus_i == minus_i:
        if recorder is not None:
            recorder.add(
                1,
                "deadlock",
                config=setup.config_name,
                detail="symmetric placement selects no leader",
            )
        red_grid = setup.red_marginal_grid
        red_det = red_grid.lookup[chooser.uniform_int(red_grid.size) - 1]
        if recorder is not None:
            recorder.add(
                1, "leader_choice", pair=1, region="R+", detector=red_det,
                forced_by_identity=False, origin_ok=True, double_leader=True,
            )
        _record_broadcast(recorder, 1, 1, "R+", red_det, None, ("R-",))
        yellow_grid = setup.yellow_marginal_grid
        yellow_det = yellow_grid.lookup[chooser.uniform_int(yellow_grid.size) - 1]
        if recorder is not None:
            recorder.add(
                1, "leader_choice", pair=1, region="R-", detector=yellow_det,
                forced_by_identity=False, origin_ok=True, double_leader=True,
            )
        _record_broadcast(recorder, 1, 1, "R-", yellow_det, None, ("R+",))
        outcome = (red_det, yellow_det)
        return TrialStats(
            outcome=outcome,
            clash=False,
            ambiguity=False,
            deadlock=True,
            forbidden=outcome in setup.forbidden,
            origin_violation=False,
        )
    # the side whose own branch detectors are absent answers independently
    leader_region = "R+" if not plus_i else "R-"
    leader_det, _, _ = _leader_choice(
        setup, "none", None, leader_region, chooser, recorder, 1, 1
    )
    follower_region = other_region(leader_region)
    _record_broadcast(recorder, 1, 1, leader_region, leader_det, None,
                      (follower_region,))
    f_det, _, _, _ = _follower_choice(
        setup, "none", None, follower_region, leader_det, chooser, recorder, 1, 1
    )
    outcome = (leader_det, f_det) if leader_region == "R+" else (f_det, leader_det)
    return TrialStats(
        outcome=outcome,
        clash=False,
        ambiguity=False,
        deadlock=False,
        forbidden=outcome in setup.forbidden,
        origin_violation=False,
    )


def double_pair_trial(
    setup_early: PairSetup,
    setup_late: PairSetup,
    strategy: Strategy,
    chooser,
    recorder: Transcript | None = None,
) -> TrialStats:
    """Two pairs measured simultaneously, both led by their yellow photon.

    The early pair crossed while the branch detectors were out (both sides
    free); the late pair meets them back in place (both sides intercepted).
    Both leaders broadcast at the same instant, so message-to-photon
    attribution is exercised by the pairing rule.
    """
    setups = (setup_early, setup_late)
    identities: list[PairIdentity | None] = []
    origins: list[Crystal | None] = []
    for counter, setup in ((1, setup_early), (2, setup_late)):
        identity, origin = _generation(
            setup.config_name, strategy, counter, chooser, recorder, counter - 1
        )
        identities.append(identity)
        origins.append(origin)

    mode = strategy.identity_mode
    clash = violation = False
    leader_dets: list[str] = []
    for i in (0, 1):
        det, c, v = _leader_choice(
            setups[i], mode, origins[i], "R-", chooser, recorder, 2, i + 1
        )
        leader_dets.append(det)
        clash = clash or c
        violation = violation or v
    tags = [None if ident is None else ident.tag for ident in identities]
    messages = [
        Message("R-", leader_dets[i], tags[i], 2) for i in (0, 1)
    ]
    for i in (0, 1):
        _record_broadcast(
            recorder, 2, i + 1, "R-", leader_dets[i], tags[i], ("R+", "R-")
        )
    followers = [
        FollowerSlot(
            agent=PhotonAgent(color="red", region="R+", identity=identities[i],
                              role="follower"),
            pair_index=i + 1,
            known_reports=frozenset(setups[i].cond_grids)
            & frozenset(setups[i].yellow_detectors),
        )
        for i in (0, 1)
    ]
    matched = deliver_and_pair(messages, followers, strategy.pairing_rule, chooser)

    ambiguity = False
    follower_dets: list[str] = []
    for slot, message, _ in matched:
        i = slot.pair_index - 1
        det, c, v, amb = _follower_choice(
            setups[i], mode, origins[i], "R+", message.reported_detector,
            chooser, recorder, 2, slot.pair_index,
        )
        follower_dets.append(det)
        clash = clash or c
        violation = violation or v
        ambiguity = ambiguity or amb

    per_pair = tuple(
        (follower_dets[i], leader_dets[i]) for i in (0, 1)
    )
    forbidden = any(per_pair[i] in setups[i].forbidden for i in (0, 1))
    return TrialStats(
        outcome=per_pair,
        clash=clash,
        ambiguity=ambiguity,
        deadlock=False,
        forbidden=forbidden,
        origin_violation=violation,
    )


# --- transcript-producing entry points ---------------------------------------------

def _chooser_from(rng) -> object:
    if hasattr(rng, "uniform_int"):
        return rng
    return RandomChooser(int(rng))


def run_version1(config: DetectorConfig | str, rng) -> Transcript:
    """Run one placement-led trial and return its full transcript."""
    setup = pair_setup_for(config)
    transcript = Transcript()
    transcript.stats = version1_trial(setup, _chooser_from(rng), transcript)
    return transcript


def run_version2(
    config: DetectorConfig | str,
    strategy: Strategy,
    rng,
    identity_counter: int = 1,
) -> Transcript:
    """Run one elected-leader trial and return its full transcript."""
    setup = pair_setup_for(config)
    transcript = Transcript()
    transcript.stats = version2_trial(
        setup, strategy, _chooser_from(rng), transcript, identity_counter
    )
    return transcript


def run_double_pair_trial(strategy: Strategy, rng) -> Transcript:
    """Run one simultaneous two-pair trial and return its full transcript."""
    transcript = Transcript()
    transcript.stats = double_pair_trial(
        pair_setup_for("e3"),
        pair_setup_for("h"),
        strategy,
        _chooser_from(rng),
        transcript,
    )
    return transcript
