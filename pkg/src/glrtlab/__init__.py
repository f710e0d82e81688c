"""Robust Gaussian detection lab.

Decision rules (matched filter, minimax linear rule, GLRT) for the
symmetric Gaussian test under l-inf bounded perturbations, analytical
error predictors, and a reproducible Monte Carlo harness with a CSV
experiment CLI.
"""

from .analysis import (
    BoundVariableParams,
    CoordinateMoments,
    QuadratureError,
    bound_variable_moments,
    clean_error_closed_form,
    clt_error_probability,
    clt_error_upper_bound,
    coordinate_cost_moments,
    glrt_snr,
    linear_error_closed_form,
    minimax_error_closed_form,
    minimax_snr,
    two_level_glrt_prediction,
)
from .attacks import (
    AttackSpec,
    load_attack_vector,
    realize_observation,
    validate_attack,
    worst_case_attack,
)
from .backend import active_backend
from .detectors import (
    Decision,
    LinearDetector,
    clean_weights,
    estimate_perturbation,
    glrt_costs,
    glrt_decide,
    linear_decide,
    minimax_weights,
)
from .kernels import (
    RandomStream,
    clamp_complement,
    q_function,
    sample_gaussian_vector,
    soft_threshold,
    std_normal_pdf,
)
from .model import (
    BinaryInstance,
    ProblemInstance,
    TwoLevelTemplate,
    build_two_level_template,
    vulnerability_threshold,
)
from .montecarlo import (
    ErrorEstimate,
    run_conditional_trials,
    run_trials,
    run_trials_multi,
    sample_coordinate_costs,
    streaming_moments,
)

__version__ = "0.1.0"

__all__ = [
    "AttackSpec",
    "BinaryInstance",
    "BoundVariableParams",
    "CoordinateMoments",
    "Decision",
    "ErrorEstimate",
    "LinearDetector",
    "ProblemInstance",
    "QuadratureError",
    "RandomStream",
    "TwoLevelTemplate",
    "active_backend",
    "bound_variable_moments",
    "build_two_level_template",
    "clamp_complement",
    "clean_error_closed_form",
    "clean_weights",
    "clt_error_probability",
    "clt_error_upper_bound",
    "coordinate_cost_moments",
    "estimate_perturbation",
    "glrt_costs",
    "glrt_decide",
    "glrt_snr",
    "linear_decide",
    "linear_error_closed_form",
    "load_attack_vector",
    "minimax_error_closed_form",
    "minimax_snr",
    "minimax_weights",
    "q_function",
    "realize_observation",
    "run_conditional_trials",
    "run_trials",
    "run_trials_multi",
    "sample_coordinate_costs",
    "sample_gaussian_vector",
    "soft_threshold",
    "std_normal_pdf",
    "streaming_moments",
    "two_level_glrt_prediction",
    "validate_attack",
    "vulnerability_threshold",
    "worst_case_attack",
]
