"""Desk-scale exact laboratory for Malliavin calculus on a discretized Gaussian space."""

__version__ = "0.1.0"

from .chaos import (
    DEGREE_CAP,
    DIM_CAP,
    AlgebraError,
    ChaosPoly,
    DegreeCapExceeded,
    DimensionMismatch,
    MultiIndex,
    NotCentered,
    chaos_projection,
    conditional_expectation,
    evaluate,
    evaluate_batch,
    expectation,
    hermite_product,
    l2_inner,
    linear_combine,
    multiply_by_coordinate,
    norm_l2,
    ou_apply,
    ou_inverse,
    partial_derivative,
    refine,
)
from .space import (
    BLOCK_ROWS,
    GENERATOR_ID,
    DiscreteWienerSpace,
    MonteCarloEstimate,
    ResolutionOfIdentity,
    SampleBatch,
    apply_pi,
    delta_h,
    delta_h_batch,
    identity_divergence_growth,
    ks_normal,
    mc_estimate,
    moment_normality,
    sample_batch,
)
from .malliavin import (
    HField,
    OperatorField,
    VField,
    check_cbound,
    check_duality,
    check_rowwise_divergence,
    check_weakb,
    divergence_h,
    divergence_op,
    dual_pairing,
    dual_pairing_expectation,
    gradient_scalar,
    gradient_vector,
    identity_operator,
    rank_one,
    skew_symmetric_field,
    trace_pairing,
    trace_pairing_expectation,
)
from .adapted import (
    FiniteRankAdapted,
    Filtration,
    NotPredictable,
    PredictableHField,
    RankOneAdapted,
    WeaklyAdaptedOperator,
    check_divergence_free_uniqueness,
    check_ito_isometry,
    check_operator_isometry,
    check_weak_orthogonality,
    is_predictable,
    ito_integral,
    project_adapted,
    project_operator,
)
from .clark import (
    ClarkResult,
    EnergyComparison,
    RepresentationError,
    check_uniqueness,
    clark_integrand,
    compare_energies,
    is_representable,
    minimal_energy_integrand,
    reconstruct,
    refine_and_reconstruct,
    representation_residual,
    residual_mass_oracle,
)
from .rotations import (
    ISOMETRY_TOL,
    AdaptedIsometry,
    RotationError,
    RotationReport,
    apply_rotation,
    basis_invariance_check,
    build_sequential_isometry,
    check_strict_past_measurability,
    exact_output_covariance,
    extract_rotation,
    gaussianity_battery,
    independence_battery,
    isometry_check,
    measure_preservation_battery,
    mix_outputs,
    scale_output,
)
from .dsl import (
    DslError,
    DslSemanticError,
    DslSyntaxError,
    lower,
    parse_functional,
    print_functional,
)
from .suites import SuiteResult, run_suites, suite_names

__all__ = [
    "__version__",
    # chaos algebra
    "DEGREE_CAP",
    "DIM_CAP",
    "AlgebraError",
    "ChaosPoly",
    "DegreeCapExceeded",
    "DimensionMismatch",
    "MultiIndex",
    "NotCentered",
    "chaos_projection",
    "conditional_expectation",
    "evaluate",
    "evaluate_batch",
    "expectation",
    "hermite_product",
    "l2_inner",
    "linear_combine",
    "multiply_by_coordinate",
    "norm_l2",
    "ou_apply",
    "ou_inverse",
    "partial_derivative",
    "refine",
    # discretized space and sampling
    "BLOCK_ROWS",
    "GENERATOR_ID",
    "DiscreteWienerSpace",
    "MonteCarloEstimate",
    "ResolutionOfIdentity",
    "SampleBatch",
    "apply_pi",
    "delta_h",
    "delta_h_batch",
    "identity_divergence_growth",
    "ks_normal",
    "mc_estimate",
    "moment_normality",
    "sample_batch",
    # gradient, divergence, pairings
    "HField",
    "OperatorField",
    "VField",
    "check_cbound",
    "check_duality",
    "check_rowwise_divergence",
    "check_weakb",
    "divergence_h",
    "divergence_op",
    "dual_pairing",
    "dual_pairing_expectation",
    "gradient_scalar",
    "gradient_vector",
    "identity_operator",
    "rank_one",
    "skew_symmetric_field",
    "trace_pairing",
    "trace_pairing_expectation",
    # filtration and adapted structures
    "FiniteRankAdapted",
    "Filtration",
    "NotPredictable",
    "PredictableHField",
    "RankOneAdapted",
    "WeaklyAdaptedOperator",
    "check_divergence_free_uniqueness",
    "check_ito_isometry",
    "check_operator_isometry",
    "check_weak_orthogonality",
    "is_predictable",
    "ito_integral",
    "project_adapted",
    "project_operator",
    # adapted representation
    "ClarkResult",
    "EnergyComparison",
    "RepresentationError",
    "check_uniqueness",
    "clark_integrand",
    "compare_energies",
    "is_representable",
    "minimal_energy_integrand",
    "reconstruct",
    "refine_and_reconstruct",
    "representation_residual",
    "residual_mass_oracle",
    # adapted rotations
    "ISOMETRY_TOL",
    "AdaptedIsometry",
    "RotationError",
    "RotationReport",
    "apply_rotation",
    "basis_invariance_check",
    "build_sequential_isometry",
    "check_strict_past_measurability",
    "exact_output_covariance",
    "extract_rotation",
    "gaussianity_battery",
    "independence_battery",
    "isometry_check",
    "measure_preservation_battery",
    "mix_outputs",
    "scale_output",
    # expression language
    "DslError",
    "DslSemanticError",
    "DslSyntaxError",
    "lower",
    "parse_functional",
    "print_functional",
    # verification suites
    "SuiteResult",
    "run_suites",
    "suite_names",
]
