"""Gaussian rough paths: sampling, level-3 lifts, and quadrature comparison.

The package builds sampled Gaussian paths (fractional Brownian motion and
relatives), lifts them to level-3 rough paths, and compares classical
quadrature rules (trapezoid, midpoint, left-point Young) against compensated
rough integrals, with analytic second-moment checks for the correction
statistics that drive the error.
"""

from .errors import (
    ConfigError,
    GridLookupError,
    ModelInvalidError,
    NumericalError,
    SimulationError,
    ToolkitError,
)
from .grids import (
    Increment1,
    Increment2,
    Partition,
    SuperadditivityReport,
    check_superadditive,
    check_superadditive_2d,
    delta1,
    delta2,
    holder_norm,
    increment_of_path,
    make_uniform_partition,
    p_variation,
    subgrid_indices,
)
from .covariance import (
    CovarianceModel,
    Rectangle,
    check_gram_psd,
    cov_eval,
    increment_gram,
    rect_increment,
    sigma_sq,
    two_d_rho_variation,
)
from .simulate import MCResult, PathSample, derive_sample_seed, mc_run, sample_path
from .lift import (
    LiftCheckReport,
    LiftLevels,
    RoughLift,
    chen_combine,
    lift_segment,
    signature,
    verify_lift,
    zero_levels,
)
from .controlled import (
    ControlledPath,
    RemainderReport,
    SmoothFunction,
    finite_difference_check,
    from_function,
    remainder_cells,
    remainder_report,
    tensor_contract,
)
from .functions import FUNCTION_CATALOG, make_function
from .integrate import (
    IntegralResult,
    decompose_I,
    f_process,
    f_process_path,
    g_process,
    h_process,
    levy_area_pairing,
    midpoint,
    mixed_X2X1_sum,
    rough_integral,
    trapezoid,
    weighted_F_sum,
    weighted_X3_sum,
    young_integral,
)
from .moments import (
    MomentReport,
    StieltjesMoment,
    brownian_f_diag_second_moment,
    brownian_f_offdiag_second_moment,
    brownian_g_diag_second_moment,
    f_offdiag_second_moment_2dyoung,
    hermite,
    hermite_pairing,
    hermite_pairing_quadrature,
    isserlis_second_moment_F_diag,
    isserlis_second_moment_g_diag,
)
from .experiments import (
    ConvergenceReport,
    ExperimentConfig,
    RuleFit,
    load_config,
    moment_reports,
    run_converge,
    run_integrate,
    run_lift,
    run_moments,
    run_rhovar,
    run_simulate,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "GridLookupError",
    "ModelInvalidError",
    "NumericalError",
    "SimulationError",
    "ToolkitError",
    "Increment1",
    "Increment2",
    "Partition",
    "SuperadditivityReport",
    "check_superadditive",
    "check_superadditive_2d",
    "delta1",
    "delta2",
    "holder_norm",
    "increment_of_path",
    "make_uniform_partition",
    "p_variation",
    "subgrid_indices",
    "CovarianceModel",
    "Rectangle",
    "check_gram_psd",
    "cov_eval",
    "increment_gram",
    "rect_increment",
    "sigma_sq",
    "two_d_rho_variation",
    "MCResult",
    "PathSample",
    "derive_sample_seed",
    "mc_run",
    "sample_path",
    "LiftCheckReport",
    "LiftLevels",
    "RoughLift",
    "chen_combine",
    "lift_segment",
    "signature",
    "verify_lift",
    "zero_levels",
    "ControlledPath",
    "RemainderReport",
    "SmoothFunction",
    "finite_difference_check",
    "from_function",
    "remainder_cells",
    "remainder_report",
    "tensor_contract",
    "FUNCTION_CATALOG",
    "make_function",
    "IntegralResult",
    "decompose_I",
    "f_process",
    "f_process_path",
    "g_process",
    "h_process",
    "levy_area_pairing",
    "midpoint",
    "mixed_X2X1_sum",
    "rough_integral",
    "trapezoid",
    "weighted_F_sum",
    "weighted_X3_sum",
    "young_integral",
    "MomentReport",
    "StieltjesMoment",
    "brownian_f_diag_second_moment",
    "brownian_f_offdiag_second_moment",
    "brownian_g_diag_second_moment",
    "f_offdiag_second_moment_2dyoung",
    "hermite",
    "hermite_pairing",
    "hermite_pairing_quadrature",
    "isserlis_second_moment_F_diag",
    "isserlis_second_moment_g_diag",
    "ConvergenceReport",
    "ExperimentConfig",
    "RuleFit",
    "load_config",
    "moment_reports",
    "run_converge",
    "run_integrate",
    "run_lift",
    "run_moments",
    "run_rhovar",
    "run_simulate",
    "__version__",
]
