"""Sensor placement and edge-weight identification for weighted consensus trees."""
from .estimation import (
    EstimatedMarkov,
    EstimationError,
    SimulationRecord,
    estimate_markov,
    identify_end_to_end,
    pulse_input,
    simulate,
)
from .oracle import (
    Counterexample,
    DistinguishabilityReport,
    analyze_star,
    figure1_demo,
    indistinguishable,
    search_counterexample,
    star_minimum_analysis,
)
from .placement import enumerate_placements, is_valid_placement, place_sensors, predicted_sensor_count
from .recovery import RecoveredWeights, RecoveryError, recover_weights
from .system import (
    ConsensusSystem,
    MarkovSequence,
    TransferFunction,
    build_system,
    characteristic_polynomial,
    markov_parameters,
    transfer_function,
)
from .tree import (
    SiblingGroup,
    TreeError,
    WeightedTree,
    format_tree,
    generations,
    load_tree,
    non_input_leaves,
    parse_tree,
    path_weight,
    random_tree,
    sibling_groups,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
