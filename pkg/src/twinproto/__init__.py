"""Exact biphoton interference engine and faster-than-light protocol simulator.

The package has two halves.  ``fock_optics`` and ``predictions`` compute the
exact two-photon state of a three-crystal interferometer and its coincidence
tables for every removable-detector placement.  ``protocol``, ``oracle`` and
``harness`` run a hypothetical broadcast-message protocol between the twin
photons against those tables, measuring where it breaks: deadlocks, identity
clashes, message ambiguity, and statistics the exact state forbids.
"""

from .fock_optics import (
    CONFIGS,
    BiphotonState,
    DetectorConfig,
    OutcomeDistribution,
    SourceParams,
    apply_detector_config,
    apply_g_network,
    born_distribution,
    crystal_state,
    equal_mod_global_phase,
    first_order_component,
    postselect_no_g,
    state_from_terms,
)
from .harness import (
    BatchResult,
    run_batch,
    run_double_pair,
    total_variation_distance,
)
from .oracle import enumerate_protocol_statistics
from .predictions import (
    Crystal,
    conditional,
    forbidden_set,
    marginal,
    origin_allows,
    tables_for,
)
from .protocol import (
    Message,
    PairIdentity,
    PhotonAgent,
    Strategy,
    Transcript,
    deliver_and_pair,
    elect_leader,
    run_double_pair_trial,
    run_version1,
    run_version2,
    sample_integer_grid,
)
from .scenarios import DEFAULT_SEED, ScenarioSpec, load_scenario, scenario_from_dict

__version__ = "0.1.0"

__all__ = [
    "BatchResult",
    "BiphotonState",
    "CONFIGS",
    "Crystal",
    "DEFAULT_SEED",
    "DetectorConfig",
    "Message",
    "OutcomeDistribution",
    "PairIdentity",
    "PhotonAgent",
    "ScenarioSpec",
    "SourceParams",
    "Strategy",
    "Transcript",
    "apply_detector_config",
    "apply_g_network",
    "born_distribution",
    "conditional",
    "crystal_state",
    "deliver_and_pair",
    "elect_leader",
    "enumerate_protocol_statistics",
    "equal_mod_global_phase",
    "first_order_component",
    "forbidden_set",
    "load_scenario",
    "marginal",
    "origin_allows",
    "postselect_no_g",
    "run_batch",
    "run_double_pair",
    "run_double_pair_trial",
    "run_version1",
    "run_version2",
    "sample_integer_grid",
    "scenario_from_dict",
    "state_from_terms",
    "tables_for",
    "total_variation_distance",
]
