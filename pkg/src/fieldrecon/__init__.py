"""Simulation and reconstruction of bandlimited fields under linear PDEs,
sampled by a location- and time-unaware mobile sensor."""

__version__ = "0.1.0"

from .errors import (
    ConfigInvalid,
    DegenerateFit,
    DegenerateOrder,
    DegenerateRoots,
    FieldReconError,
    InfeasiblePde,
    InsufficientSamples,
    RankDeficient,
    UnknownScenario,
)
from .pde_core import (
    HarmonicRoots,
    PdeSpec,
    StabilityReport,
    characteristic_roots,
    check_stability,
    eval_poly,
    evolve_coefficient,
    solve_initial_coefficients,
)
from .field import (
    FieldState,
    PDE_CATALOG,
    SCENARIO_COEFFICIENTS,
    coefficients_at,
    evaluate,
    evaluate_at_points,
    evaluate_gradient,
    field_from_json,
    field_from_mode_values,
    field_to_json,
    random_real_field,
    scenario_field,
)
from .sampling import (
    NoiseSpec,
    PathStreams,
    RenewalSpec,
    RenewalTemplate,
    SamplePath,
    SampleSet,
    draw_path,
    grid_deviation,
    sample_field,
)
from .estimator import (
    ConditionReport,
    DesignMatrix,
    ReconstructionResult,
    build_design_matrix,
    condition_diagnostics,
    distortion,
    least_squares,
    reconstruct,
    uniform_grid_points,
)
from .oracle import (
    OdeTrajectory,
    bandlimit_preservation_check,
    grid_deviation_scaling,
    integrate_coefficient_ode,
)
from .experiments import (
    ExperimentConfig,
    SweepResult,
    catalog_scenario,
    fit_loglog_slope,
    load_config,
    run_sweep,
)
