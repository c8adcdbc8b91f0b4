"""tyclab: a numerical laboratory for Trojan Y Chromosome population models.

Simulates the classic three- and four-species systems, the modified
competition models, and their reaction-diffusion forms; detects negative
solutions and finite-time blow-up; and maps the critical thresholds that
separate positive, negative, and divergent behavior.
"""
from .analysis import (
    Boundary,
    BracketInvalid,
    IndeterminateOutcome,
    NonMonotoneScan,
    Outcome,
    Region,
    RegionMap,
    ThresholdCurve,
    ThresholdResult,
    classify,
    classify_field,
    compare_thresholds,
    find_threshold,
    region_map,
    scan_outcomes,
)
from .backend import NUMBA_ENABLED, backend_name
from .models import (
    DimensionalParams,
    DimensionlessParams,
    ModelKind,
    ModelSpec,
    PositivityReport,
    StabilityReport,
    jacobian_classic4,
    logistic,
    mu_kamke_trigger,
    nondimensionalize,
    positivity_criterion,
    rhs_classic3,
    rhs_classic3_dimensional,
    rhs_classic4,
    rhs_explogistic3,
    rhs_modified,
    stability_check,
    threshold_f0,
    threshold_m0,
    threshold_mu,
    threshold_mu_pde,
)
from .ode import (
    BlowupEstimate,
    BlowupRecord,
    EventLog,
    IntegratorConfig,
    Status,
    Trajectory,
    estimate_blowup_time,
    integrate,
    locate_zero_crossing,
)
from .pde import (
    BoundaryCondition,
    FieldTrajectory,
    SpatialGrid,
    boundary_values,
    constant_profile,
    integrate_pde,
    laplacian,
    parabola_profile,
    supermale_parabola_profile,
)

__version__ = "0.1.0"
