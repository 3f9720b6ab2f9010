"""Coalition-weighted path attribution: exact and Monte-Carlo engines,
cooperative-game interactions, ANOVA/Sobol oracles, multi-scale weighting
and method reductions."""

from ._version import __version__
from .anova import (
    AnovaDecomposition,
    ProductMeasure,
    gralis_sobol_bridge,
    hoeffding_decompose,
    orthogonality_check,
    sobol_indices,
    total_indices,
    zero_mean_residual,
)
from .audit import DropCurve, axiomatic_audit, deletion_auc, run_convergence_sweep
from .coalitions import (
    Coalition,
    Kernel,
    interaction_weight,
    kernel_weight,
    predecessor_bits,
    reverse_permutation,
    sample_permutation,
    sample_permutations,
    shapley_weight,
)
from .engine import AttributionResult, McConfig, completeness_residual, gralis_exact, gralis_mc, mc_error_bound
from .engine import gralis_mc_antithetic
from .errors import (
    CapacityError,
    ConfigurationError,
    DegenerateModelError,
    DomainError,
    GralisError,
    NumericalError,
    RankDeficiencyError,
    WitnessUnavailableError,
)
from .games import (
    CooperativeGame,
    Projection,
    WeightedSignal,
    incompatibility_coefficient,
    induce_game,
    inverse_mobius,
    kernel_weighted_shapley,
    mobius_transform,
    p_rho_apply,
    push_forward,
    relabel_game,
    shapley_values,
    siv_grabisch,
    siv_matrix,
    siv_mobius,
)
from .models import ZOO, EvalPoint, Model, finite_diff_grad, zoo_model
from .multiscale import LayerAttributions, aggregate_variance, ms_aggregate, optimal_weights
from .paths import PathMode, QuadratureRule, conditioned_ig, full_coalition_residual, path_point
from .reductions import (
    CanonicalTriple,
    FeatureMapStack,
    gradcam_lin,
    gradcam_triple,
    ig_triple,
    integrated_gradients,
    lime_triple,
    reducibility_suite,
    relu_nonlinearity_witness,
    shap_permutation_triple,
    shap_triple,
    triple_eval,
)
from .report import RunConfig, emit_report, execute
