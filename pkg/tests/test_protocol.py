from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twinproto.oracle import ReplayChooser
from twinproto.predictions import Crystal
from twinproto.protocol import (
    FollowerSlot,
    Message,
    PairIdentity,
    PhotonAgent,
    ProtocolError,
    Strategy,
    assign_identity,
    deliver_and_pair,
    double_pair_trial,
    elect_leader,
    integer_grid,
    pair_setup_for,
    run_double_pair_trial,
    run_version1,
    run_version2,
    sample_integer_grid,
    version1_trial,
    version2_trial,
)
from twinproto.rng import RandomChooser


# --- leader election ------------------------------------------------------------

@pytest.mark.parametrize(
    "bits,winner", [((0, 0), 1), ((1, 1), 1), ((0, 1), 2), ((1, 0), 2)]
)
def test_elect_leader_convention(bits, winner):
    assert elect_leader(*bits) == winner


def test_elect_leader_is_fair():
    wins = [elect_leader(b1, b2) for b1 in (0, 1) for b2 in (0, 1)]
    assert wins.count(1) == 2 and wins.count(2) == 2


def test_elect_leader_rejects_non_bits():
    with pytest.raises(ValueError):
        elect_leader(2, 0)


# --- integer-grid sampling -------------------------------------------------------

def test_grid_partition_of_six():
    marginal = {"C+": 5 / 6, "D+": 1 / 6}
    assert sample_integer_grid(marginal, 3) == "C+"
    assert sample_integer_grid(marginal, 5) == "C+"
    assert sample_integer_grid(marginal, 6) == "D+"


def test_grid_counting_reproduces_marginal_exactly():
    marginal = {"C+": 5 / 6, "D+": 1 / 6}
    grid = integer_grid(marginal)
    assert grid.size == 6
    hits = [sample_integer_grid(marginal, n) for n in range(1, grid.size + 1)]
    assert hits.count("C+") == 5 and hits.count("D+") == 1


def test_grid_uses_least_common_denominator():
    assert integer_grid({"C-": 9 / 10, "D-": 1 / 10}).size == 10
    assert integer_grid({"V-": 2 / 3, "U-": 1 / 3}).size == 3
    assert integer_grid({"U-": 1.0}).size == 1


def test_grid_orders_by_descending_weight():
    grid = integer_grid({"V-": 2 / 3, "U-": 1 / 3})
    assert grid.detectors == ("V-", "U-")
    assert grid.lookup == ("V-", "V-", "U-")


def test_grid_rejects_out_of_range_and_irrational():
    with pytest.raises(ValueError):
        sample_integer_grid({"C+": 5 / 6, "D+": 1 / 6}, 7)
    with pytest.raises(ValueError):
        integer_grid({"A": 0.123456789123, "B": 1 - 0.123456789123})


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 19), st.integers(2, 20))
def test_grid_counting_matches_any_small_rational(num, den):
    num = min(num, den - 1)
    weights = {"A": num / den, "B": (den - num) / den}
    grid = integer_grid(weights)
    counts = {det: grid.lookup.count(det) for det in ("A", "B")}
    assert Fraction(counts["A"], grid.size) == Fraction(num, den)
    assert Fraction(counts["B"], grid.size) == Fraction(den - num, den)


# --- identities -------------------------------------------------------------------

def test_assign_identity_per_pair():
    identity, extra = assign_identity("per_pair", Crystal.X1, 1, None)
    assert identity == PairIdentity(1, Crystal.X1)
    assert extra == {}


def test_assign_identity_triple_vote_unanimous():
    identity, extra = assign_identity("triple_vote", None, 7, ReplayChooser((2, 2, 2)))
    assert identity == PairIdentity(7, Crystal.X2)
    assert extra["votes"] == [2, 2, 2]
    assert extra["elected"] == "X2"


def test_assign_identity_triple_vote_majority():
    identity, _ = assign_identity("triple_vote", None, 1, ReplayChooser((3, 1, 3)))
    assert identity.origin == Crystal.X3


def test_assign_identity_triple_vote_tie_goes_to_first_voter():
    identity, _ = assign_identity("triple_vote", None, 1, ReplayChooser((2, 3, 1)))
    assert identity.origin == Crystal.X2


# --- messages and strategies -------------------------------------------------------

def test_message_must_report_local_detector():
    Message("R+", "C+", None, 2)  # fine
    with pytest.raises(ProtocolError):
        Message("R+", "C-", None, 2)


def test_strategy_validation():
    with pytest.raises(ValueError):
        Strategy(version="v3")
    with pytest.raises(ValueError):
        Strategy(pairing_rule="by_identity", identity_mode="none")
    Strategy(pairing_rule="by_identity", identity_mode="per_pair")


# --- message pairing ----------------------------------------------------------------

def _slots(tags=(1, 2)):
    known = frozenset({"C-", "D-"}), frozenset({"V-", "U-"})
    return [
        FollowerSlot(
            agent=PhotonAgent(
                color="red",
                region="R+",
                identity=None if tags[i] is None else PairIdentity(tags[i], Crystal.X1),
                role="follower",
            ),
            pair_index=i + 1,
            known_reports=known[i],
        )
        for i in (0, 1)
    ]


def _messages(tags=(1, 2)):
    return [Message("R-", "D-", tags[0], 2), Message("R-", "U-", tags[1], 2)]


def test_deliver_by_identity_matches_tags():
    matched = deliver_and_pair(_messages(), _slots(), "by_identity", None)
    assert [(s.pair_index, m.reported_detector) for s, m, _ in matched] == [
        (1, "D-"),
        (2, "U-"),
    ]
    assert all(not ambiguous for _, _, ambiguous in matched)


def test_deliver_by_identity_requires_tags():
    with pytest.raises(ProtocolError):
        deliver_and_pair(_messages(tags=(None, None)), _slots(), "by_identity", None)


def test_deliver_arrival_order_breaks_simultaneous_ties_by_tag():
    matched = deliver_and_pair(_messages(), _slots(), "arrival_order", None)
    assert [(s.pair_index, m.identity_tag) for s, m, _ in matched] == [(1, 1), (2, 2)]


def test_deliver_random_cross_matches_half_the_time():
    outcomes = set()
    for path in ((1,), (2,)):
        matched = deliver_and_pair(_messages(), _slots(), "random", ReplayChooser(path))
        outcomes.add(tuple(m.identity_tag for _, m, _ in matched))
    assert outcomes == {(1, 2), (2, 1)}  # one straight, one swapped


def test_deliver_flags_inapplicable_messages():
    crossed = [Message("R-", "U-", 2, 2), Message("R-", "D-", 1, 2)]
    matched = deliver_and_pair(crossed, _slots(), "arrival_order", None)
    # tags still line up under arrival order, so nothing is ambiguous
    assert all(not ambiguous for _, _, ambiguous in matched)
    swapped = deliver_and_pair(crossed, _slots((2, 1)), "by_identity", None)
    assert [m.reported_detector for _, m, _ in swapped] == ["U-", "D-"]
    assert [ambiguous for _, _, ambiguous in swapped] == [True, True]


# --- placement-led protocol ---------------------------------------------------------

def test_version1_leader_follows_placement():
    transcript = run_version1("e1", 42)
    (choice,) = transcript.of_kind("leader_choice")
    assert choice.payload["region"] == "R+"
    (broadcast,) = transcript.of_kind("broadcast")
    assert broadcast.payload["sender_region"] == "R+"
    assert not transcript.of_kind("deadlock")

    transcript = run_version1("e2", 42)
    (choice,) = transcript.of_kind("leader_choice")
    assert choice.payload["region"] == "R-"


@pytest.mark.parametrize("config", ["e3", "h"])
def test_version1_symmetric_placement_deadlocks(config):
    transcript = run_version1(config, 7)
    assert len(transcript.of_kind("deadlock")) == 1
    assert transcript.stats.deadlock
    # double-leader sub-mode: both photons answered and broadcast
    choices = transcript.of_kind("leader_choice")
    assert [c.payload["double_leader"] for c in choices] == [True, True]
    assert {c.payload["region"] for c in choices} == {"R+", "R-"}
    assert len(transcript.of_kind("broadcast")) == 2


# --- elected-leader protocol ---------------------------------------------------------

def test_version2_transcript_structure():
    strategy = Strategy(version="v2", leader_rule="bit_election",
                        identity_mode="per_pair", pairing_rule="arrival_order")
    transcript = run_version2("e1", strategy, 3)
    kinds = [e.kind for e in transcript.events]
    assert kinds[0] == "generation"
    assert kinds[1] == "election"
    assert "leader_choice" in kinds and "follower_choice" in kinds
    # structural protocol rules
    times = [e.time for e in transcript.events]
    assert times == sorted(times)
    (leader,) = transcript.of_kind("leader_choice")
    (broadcast,) = transcript.of_kind("broadcast")
    assert broadcast.time == leader.time  # issued during that measurement
    sender = broadcast.payload["sender_region"]
    det = broadcast.payload["detector"]
    assert det.endswith("+") == (sender == "R+")  # only local information


def test_version2_fixed_leader_rules():
    for rule, region in (("fixed_red", "R+"), ("fixed_yellow", "R-")):
        strategy = Strategy(version="v2", leader_rule=rule)
        transcript = run_version2("e3", strategy, 11)
        (choice,) = transcript.of_kind("leader_choice")
        assert choice.payload["region"] == region


def test_version2_transcripts_are_deterministic():
    strategy = Strategy(version="v2", leader_rule="bit_election",
                        identity_mode="triple_vote", pairing_rule="arrival_order")
    a = run_version2("e2", strategy, 1234).to_ndjson()
    b = run_version2("e2", strategy, 1234).to_ndjson()
    assert a == b
    c = run_version2("e2", strategy, 1235).to_ndjson()
    assert a != c


# --- identity clash ------------------------------------------------------------------

def _clash_strategy(leader_rule):
    return Strategy(version="v2", leader_rule=leader_rule,
                    identity_mode="per_pair", pairing_rule="arrival_order")


def test_follower_clash_when_required_answer_unavailable():
    # birth crystal X1; the yellow leader draws the slot reporting D-, whose
    # conditional forces a branch no X1 identity can reach
    setup = pair_setup_for("e2")
    from twinproto.protocol import Transcript

    transcript = Transcript()
    stats = version2_trial(
        setup, _clash_strategy("fixed_yellow"), ReplayChooser((1, 6)), transcript
    )
    assert stats.outcome == ("U+", "D-")
    assert stats.clash and stats.origin_violation
    (clash,) = transcript.of_kind("clash")
    assert clash.payload["cause"] == "required_unavailable"
    assert clash.payload["origin"] == "X1"


def test_leader_clash_on_origin_incompatible_choice():
    # birth crystal X1; the red leader itself draws the branch born elsewhere
    setup = pair_setup_for("e2")
    from twinproto.protocol import Transcript

    transcript = Transcript()
    stats = version2_trial(
        setup, _clash_strategy("fixed_red"), ReplayChooser((1, 3, 1)), transcript
    )
    assert stats.clash
    (clash,) = transcript.of_kind("clash")
    assert clash.payload["cause"] == "leader_choice"
    assert clash.payload["detector"] == "U+"


def test_no_clash_when_identity_matches_branch():
    # birth crystal X2 makes the forced branch available
    setup = pair_setup_for("e2")
    stats = version2_trial(
        setup, _clash_strategy("fixed_yellow"), ReplayChooser((2, 6))
    )
    assert stats.outcome == ("U+", "D-")
    assert not stats.clash and not stats.origin_violation


def test_clash_keeps_the_sampled_outcome():
    # the violating answer is recorded, not resampled away
    setup = pair_setup_for("e2")
    with_clash = version2_trial(
        setup, _clash_strategy("fixed_yellow"), ReplayChooser((1, 6))
    )
    without = version2_trial(
        setup, _clash_strategy("fixed_yellow"), ReplayChooser((2, 6))
    )
    assert with_clash.outcome == without.outcome


# --- identity vote forcing branch answers ----------------------------------------------

def test_triple_vote_forces_branch_side_answers():
    strategy = Strategy(version="v2", leader_rule="fixed_red",
                        identity_mode="triple_vote", pairing_rule="arrival_order")
    setup = pair_setup_for("e1")
    from twinproto.protocol import Transcript

    transcript = Transcript()
    # votes elect X2; the free red side draws its minority detector
    stats = version2_trial(setup, strategy, ReplayChooser((2, 2, 2, 6)), transcript)
    assert stats.outcome == ("D+", "V-")
    assert stats.forbidden  # (D+, V-) has zero probability in this placement
    (follower,) = transcript.of_kind("follower_choice")
    assert follower.payload["forced_by_identity"]
    assert not stats.clash


def test_triple_vote_on_free_sides_is_plain_sampling():
    strategy = Strategy(version="v2", leader_rule="fixed_red",
                        identity_mode="triple_vote", pairing_rule="arrival_order")
    setup = pair_setup_for("e3")
    stats = version2_trial(setup, strategy, ReplayChooser((1, 1, 1, 1, 1)))
    assert not stats.forbidden and not stats.clash


# --- two simultaneous pairs -------------------------------------------------------------

def _double_strategy(pairing):
    return Strategy(version="v2", leader_rule="fixed_yellow",
                    identity_mode="per_pair", pairing_rule=pairing)


def test_double_pair_identity_pairing_has_no_ambiguity():
    transcript = run_double_pair_trial(_double_strategy("by_identity"), 5)
    assert not transcript.of_kind("ambiguity")
    assert not transcript.stats.ambiguity
    stats = transcript.stats
    assert len(stats.outcome) == 2


def test_double_pair_cross_match_is_ambiguous_and_can_forbid():
    setups = (pair_setup_for("e3"), pair_setup_for("h"))
    # origins X1, X1; leaders: early pair draws C-, late pair draws U-;
    # swap permutation; early red falls back on D+, late red falls back on U+
    stats = double_pair_trial(
        setups[0], setups[1], _double_strategy("random"),
        ReplayChooser((1, 1, 1, 3, 1, 2, 1)),
    )
    assert stats.ambiguity
    assert stats.outcome[1] == ("U+", "U-")  # impossible for the late pair
    assert stats.forbidden


def test_double_pair_broadcasts_are_simultaneous():
    transcript = run_double_pair_trial(_double_strategy("by_identity"), 9)
    times = {e.time for e in transcript.of_kind("broadcast")}
    assert times == {2}
    leader_times = {e.time for e in transcript.of_kind("leader_choice")}
    assert leader_times == {2}


def test_double_pair_transcript_deterministic():
    a = run_double_pair_trial(_double_strategy("random"), 77).to_ndjson()
    b = run_double_pair_trial(_double_strategy("random"), 77).to_ndjson()
    assert a == b


# --- structural transcript rules -------------------------------------------------------

def _assert_well_formed(transcript):
    times = [e.time for e in transcript.events]
    assert times == sorted(times)
    # every leader answer is broadcast exactly once
    assert len(transcript.of_kind("broadcast")) == len(
        transcript.of_kind("leader_choice")
    )
    leader_times = {
        (e.payload["pair"], e.payload["detector"]): e.time
        for e in transcript.of_kind("leader_choice")
    }
    for broadcast in transcript.of_kind("broadcast"):
        sender = broadcast.payload["sender_region"]
        det = broadcast.payload["detector"]
        # messages carry only local information
        assert det.endswith("+") == (sender == "R+")
        # and are issued during the measurement they report
        assert broadcast.time == leader_times[(broadcast.payload["pair"], det)]
    # delivery is instantaneous: each delivery shares its broadcast's time
    broadcast_stamps = {
        (e.payload["detector"], e.time) for e in transcript.of_kind("broadcast")
    }
    for delivery in transcript.of_kind("delivery"):
        assert (delivery.payload["detector"], delivery.time) in broadcast_stamps


@pytest.mark.parametrize("seed", [0, 1, 17, 999])
def test_transcripts_are_well_formed(seed):
    for config in ("e1", "e2", "e3", "h"):
        for identity in ("none", "per_pair", "triple_vote"):
            strategy = Strategy(version="v2", leader_rule="bit_election",
                                identity_mode=identity,
                                pairing_rule="arrival_order")
            _assert_well_formed(run_version2(config, strategy, seed))
    for config in ("e1", "e2"):
        _assert_well_formed(run_version1(config, seed))
    _assert_well_formed(run_double_pair_trial(_double_strategy("random"), seed))


# --- version 1 statistics sanity -----------------------------------------------------

def test_version1_composition_matches_tables():
    # with one side intercepted the leader/follower composition reproduces
    # the exact joint; checked here by a small sample against support only
    setup = pair_setup_for("e1")
    seen = set()
    for seed in range(200):
        stats = version1_trial(setup, RandomChooser(seed))
        seen.add(stats.outcome)
        assert not stats.forbidden
    assert ("D+", "V-") not in seen
