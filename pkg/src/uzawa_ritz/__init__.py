"""Dual-norm residual minimization via Uzawa iterations: exact piecewise
calculus, shallow-network double-Ritz training for 1D transport, a matrix
saddle-point oracle, and closed-form stability analysis."""

from .piecewise import (
    Breakpoints,
    PiecewiseConstant,
    PiecewiseLinear,
    constant,
    integrate_cc,
    integrate_cl,
    integrate_ll,
    merge_breakpoints,
)
from .nets import (
    EnergyGradient,
    ShallowTestNet,
    ShallowTrialNet,
    grad_r,
    grad_u,
    project_inner,
    ritz_energy_r,
    ritz_energy_u,
    solve_outer_c,
    solve_outer_d,
    test_net_as_piecewise,
    test_net_derivative,
    trial_net_as_piecewise,
)
from .saddle import (
    IterationTrace,
    MatrixSaddleProblem,
    PerturbationSpec,
    UzawaState,
    build_iteration_matrix,
    estimate_bounds_mM,
    exact_uzawa_step,
    fit_decay_rate,
    identity_problem,
    inexact_uzawa_step,
    one_step_gradient_step,
    random_problem,
    reference_solution,
    run_iteration,
    spectrum_G,
)
from .stability import (
    QuadraticRoots,
    StabilityReport,
    char_poly_roots,
    gamma,
    inexact_budget,
    predicted_spectral_radius,
    schur_cohn_quadratic,
)
from .transport import (
    NumericalDivergenceError,
    RunTrace,
    TrainConfig,
    TransportProblem,
    deep_ritz_r,
    deep_ritz_u,
    exact_solution,
    init_networks,
    l2_error,
    run_uddr,
    run_sweep,
    v_norm_r,
)

__all__ = [name for name in dir() if not name.startswith("_")]
