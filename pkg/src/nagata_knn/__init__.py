"""k-nearest-neighbour classification in metric spaces of finite Nagata dimension."""

from .errors import (
    CapacityError,
    ConfigError,
    DepthExhaustedError,
    DomainError,
    NagataKnnError,
    PreconditionError,
    ResolutionError,
)
from .experiments import (
    ExperimentConfig,
    KRule,
    hub_expected_count,
    run_error_curve,
    run_hub_growth,
    run_preiss_inconsistency,
    run_stone_sweep,
    write_csv,
)
from .knn import (
    LabelledSample,
    TieBreak,
    classify,
    cover_hart_curve,
    empirical_regression,
    knn_radius,
    knn_select,
)
from .nagata import (
    Ball,
    BallFamily,
    ball_multiplicity,
    center_cover_subfamily,
    expected_subset_fraction_in_knn,
    hl_count_check,
    is_disconnected,
    merge_fraction_bound,
    nagata_violation_witness,
    stone_bound_no_ties_check,
    stone_count,
)
from .spaces import (
    CantorSpace,
    DiscreteSpace,
    EuclideanSpace,
    HubSpace,
    PreissParams,
    PreissSpace,
    SeqPoint,
    build_cantor_ties,
    build_from_spec,
    build_preiss_params,
    distance,
    l1_sum,
    l1_witness,
    sample,
)

__version__ = "0.1.0"
