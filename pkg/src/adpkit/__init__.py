"""Dynamic programs as families of policy operators on ordered value spaces."""

from .adp import (
    AdpInstance,
    SolveResult,
    bellman_residual,
    bellman_step,
    dual,
    enumerate_policies,
    greedy,
    howard_iteration,
    sigma_value,
    value_iteration,
)
from .errors import (
    AdpError,
    CertificateError,
    DimensionMismatchError,
    DivergenceError,
    DomainViolationError,
    FixedPointError,
    ModelValidationError,
    NonConvergenceError,
)
from .models import (
    EZParams,
    EZStabilityDiagnostics,
    ExogenousBlock,
    FiniteMDP,
    MKPParams,
    conjugate_pair,
    ez_stability_check,
    ez_stability_coefficient,
    make_ez_adp,
    make_kp_adp,
    make_mdp_adp,
    make_mkp_adp,
    make_product_mdp,
    make_qfactor_adp,
    make_rs_adp,
    mdp_sigma_value_exact,
    mkp_to_rs_bridge,
    model_from_dict,
    qfactor_max_projection,
)
from .ordering import (
    OrderVerdict,
    ProbeVerdict,
    ValueVector,
    pointwise_compare,
    pointwise_extremum,
    stability_probe,
    sup_distance,
)
from .rbc import (
    Allocation,
    AnalyticSolution,
    GainReport,
    GridValueFn,
    InnerBudget,
    RBCParams,
    ShockSpec,
    TransformParams,
    accuracy_gain_experiment,
    analytic_solution,
    default_transform,
    inner_maximize,
    make_grid,
    vfi,
)
from .transforms import (
    ConjugacyReport,
    MonotoneBijection,
    apply_transform,
    classify_transform,
    conjugate_adp,
    invert_transform,
    transfer_solution,
    verify_conjugacy,
)

__version__ = "0.1.0"
