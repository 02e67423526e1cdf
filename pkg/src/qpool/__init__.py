"""Pooling of partial quantum posteriors under indirect measurements.

Several parties each measure their own system, where every system was
earlier coupled to one shared system. Each party conditions the shared
state on its own outcome; this package combines those partial posteriors
into the state conditioned on all outcomes at once, checks when that
combination rule is exact, and demonstrates when it is not.
"""

__version__ = "0.1.0"

from .backend import current_backend, warm_up
from .compat import (
    bfm_compatible,
    state_in_intersection,
    support_intersection_projector,
)
from .errors import (
    ContractViolation,
    EmptyPoolError,
    FormatError,
    NotHermitianError,
    NotPSDError,
    NumericError,
    OrthogonalityError,
    QpoolError,
    RankConditionError,
    SupportContainmentError,
    ZeroProbabilityError,
)
from .linalg import (
    DEFAULT_TOL,
    herm_eig,
    partial_trace,
    pinv_on_support,
    rank_of,
    sqrt_psd,
    support_projector,
    tensor,
    trace_distance,
)
from .measure import (
    ConditionedState,
    Povm,
    basis_povm,
    closed_form_choi_update,
    condition_on_effects,
    conditioned_operator,
    embed_effect,
    joint_outcome_distribution,
    joint_posterior_state,
    plus_minus_povm,
    posterior_state,
    random_povm,
)
from .pooling import (
    ClassicalDistribution,
    ClassicalJoint,
    PooledState,
    classical_bayes,
    classical_pool,
    is_conditionally_independent,
    pool_n,
    pool_two,
)
from .scenario import (
    OutcomeRecord,
    PoolingReport,
    Scenario,
    SweepConfig,
    SweepReport,
    SweepTrial,
    random_choi_scenario,
    random_choi_scenario_n,
    random_orthogonal_mixture_scenario,
    random_rank_deficient_scenario,
    run_scenario,
    trial_seed,
    verification_sweep,
)
from .serialize import (
    load_density,
    load_scenario,
    pooling_report_from_dict,
    pooling_report_to_dict,
    scenario_from_dict,
    scenario_to_dict,
    sweep_report_from_dict,
    sweep_report_to_dict,
    write_json,
)
from .states import (
    DensityOperator,
    MultipartiteState,
    choi_state,
    ghz_state,
    haar_random_pure,
    haar_random_unitary,
    is_maximal_rank_pure,
    orthogonal_product_mixture,
    pure_state,
    random_density,
    reduced_state,
    shared_state,
    state_224,
)

__all__ = [
    "__version__",
    "current_backend",
    "warm_up",
    "bfm_compatible",
    "state_in_intersection",
    "support_intersection_projector",
    "ContractViolation",
    "EmptyPoolError",
    "FormatError",
    "NotHermitianError",
    "NotPSDError",
    "NumericError",
    "OrthogonalityError",
    "QpoolError",
    "RankConditionError",
    "SupportContainmentError",
    "ZeroProbabilityError",
    "DEFAULT_TOL",
    "herm_eig",
    "partial_trace",
    "pinv_on_support",
    "rank_of",
    "sqrt_psd",
    "support_projector",
    "tensor",
    "trace_distance",
    "ConditionedState",
    "Povm",
    "basis_povm",
    "closed_form_choi_update",
    "condition_on_effects",
    "conditioned_operator",
    "embed_effect",
    "joint_outcome_distribution",
    "joint_posterior_state",
    "plus_minus_povm",
    "posterior_state",
    "random_povm",
    "ClassicalDistribution",
    "ClassicalJoint",
    "PooledState",
    "classical_bayes",
    "classical_pool",
    "is_conditionally_independent",
    "pool_n",
    "pool_two",
    "OutcomeRecord",
    "PoolingReport",
    "Scenario",
    "SweepConfig",
    "SweepReport",
    "SweepTrial",
    "random_choi_scenario",
    "random_choi_scenario_n",
    "random_orthogonal_mixture_scenario",
    "random_rank_deficient_scenario",
    "run_scenario",
    "trial_seed",
    "verification_sweep",
    "load_density",
    "load_scenario",
    "pooling_report_from_dict",
    "pooling_report_to_dict",
    "scenario_from_dict",
    "scenario_to_dict",
    "sweep_report_from_dict",
    "sweep_report_to_dict",
    "write_json",
    "DensityOperator",
    "MultipartiteState",
    "choi_state",
    "ghz_state",
    "haar_random_pure",
    "haar_random_unitary",
    "is_maximal_rank_pure",
    "orthogonal_product_mixture",
    "pure_state",
    "random_density",
    "reduced_state",
    "shared_state",
    "state_224",
]
