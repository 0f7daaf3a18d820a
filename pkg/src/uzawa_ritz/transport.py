"""End-to-end 1D transport experiment: u' = f on (0,1), u(0) = 0.

The ultraweak form pairs a piecewise-constant trial function with test
functions vanishing at 1 under the first-derivative inner product.  Training
alternates two inner loops inside an outer saddle-point iteration: the test
network is fitted to the current residual, then the trial network absorbs a
step of size tau against that residual.  Each inner loop alternates an exact
outer-weight solve with one projected gradient step on the breakpoints.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .nets import (
    ShallowTestNet,
    ShallowTrialNet,
    grad_r,
    grad_u,
    project_inner,
    ramp_gram,
    ritz_energy_r,
    ritz_energy_u,
    solve_outer_c,
    solve_outer_d,
    test_net_derivative,
    trial_net_as_piecewise,
    test_net_as_piecewise,
)
from .piecewise import (
    Breakpoints,
    PiecewiseConstant,
    PiecewiseLinear,
    merge_breakpoints,
)

SNAPSHOT_POINTS = 1001

# A breakpoint clamped on more than this many consecutive steps is frozen for
# the rest of the inner loop to avoid boundary oscillation.
MAX_CONSECUTIVE_CLAMPS = 5


class NumericalDivergenceError(RuntimeError):
    """A training energy became non-finite."""


@dataclass(frozen=True, eq=False)
class TransportProblem:
    f: PiecewiseConstant


@dataclass(frozen=True)
class TrainConfig:
    tau: float = 0.5
    alpha: float = 0.04
    omega: float = 0.01
    n_r_inner: int = 20
    n_u_inner: int = 20
    outer_iters: int = 25
    n_neurons_r: int = 20
    n_neurons_u: int = 20
    ridge: float = 1e-10
    seed: int = 42
    init_scheme: str = "equispaced-zero"

    def __post_init__(self):
        if min(self.n_r_inner, self.n_u_inner, self.outer_iters) < 1:
            raise ValueError("iteration counts must be >= 1")
        if min(self.n_neurons_r, self.n_neurons_u) < 1:
            raise ValueError("neuron counts must be >= 1")
        if self.tau <= 0.0 or self.alpha <= 0.0 or self.omega <= 0.0:
            raise ValueError("tau, alpha, omega must be positive")
        if self.ridge < 0.0:
            raise ValueError("ridge must be nonnegative")
        if self.init_scheme not in ("equispaced-zero", "random-uniform"):
            raise ValueError(f"unknown init scheme {self.init_scheme!r}")


@dataclass(eq=False)
class RitzLoopResult:
    """One inner loop: the updated net plus its energy/clamp history."""

    net: object
    energy_start: float
    energies_after_solve: np.ndarray
    energies: np.ndarray
    clamp_counts: np.ndarray


@dataclass(eq=False)
class RunTrace:
    """Per-outer-iteration record of a full training run."""

    r_energies: np.ndarray  # (outer, n_r_inner), after each full inner iteration
    u_energies: np.ndarray  # (outer, n_u_inner)
    r_energies_after_solve: np.ndarray
    u_energies_after_solve: np.ndarray
    r_clamps: np.ndarray  # (outer, n_r_inner) clamp-event counts
    u_clamps: np.ndarray
    v_norm_r: np.ndarray  # (outer,)
    l2_error: np.ndarray  # (outer,)
    uzawa_energy: np.ndarray  # (outer,) solution energy at the end of each outer step
    grid: np.ndarray  # (SNAPSHOT_POINTS,)
    r_snapshots: np.ndarray  # (outer, SNAPSHOT_POINTS)
    u_snapshots: np.ndarray
    test_net: ShallowTestNet
    trial_net: ShallowTrialNet


def exact_solution(f: PiecewiseConstant) -> PiecewiseLinear:
    """Antiderivative of f with zero value at 0."""
    nodes = np.concatenate([[0.0], np.cumsum(f.values * f.breaks.widths)])
    return PiecewiseLinear(f.breaks, nodes)


def init_networks(cfg: TrainConfig, rng: np.random.Generator):
    """Initial (trial, test) networks.

    equispaced-zero: b_i = i/(n+1), beta_i = (i-1)/m, all weights zero, so
    both networks start as the zero function.  random-uniform draws the trial
    parameters first, then the test parameters.
    """
    n, m = cfg.n_neurons_r, cfg.n_neurons_u
    if cfg.init_scheme == "equispaced-zero":
        trial = ShallowTrialNet(np.zeros(m), np.arange(m) / m)
        test = ShallowTestNet(np.zeros(n), np.arange(1, n + 1) / (n + 1))
    else:
        trial = ShallowTrialNet(rng.uniform(-0.1, 0.1, m), rng.uniform(0.0, 1.0, m))
        test = ShallowTestNet(rng.uniform(-0.1, 0.1, n), rng.uniform(0.0, 1.0, n))
    return trial, test


def _projected_step(params, grad, rate, frozen, consec):
    """One clamped gradient step; frozen parameters do not move.  Returns the
    new parameters plus updated clamp bookkeeping."""
    proposed = np.where(frozen, params, params - rate * grad)
    clipped = project_inner(proposed)
    clamped = ~frozen & (clipped != proposed)
    consec = np.where(clamped, consec + 1, np.where(frozen, consec, 0))
    frozen = frozen | (consec > MAX_CONSECUTIVE_CLAMPS)
    return clipped, frozen, consec, int(clamped.sum())


def deep_ritz_r(
    u_k: PiecewiseConstant,
    net: ShallowTestNet,
    f: PiecewiseConstant,
    cfg: TrainConfig,
) -> RitzLoopResult:
    """Inner loop for the residual network: exact solve in c, one projected
    gradient step on b with rate alpha, repeated n_r_inner times."""
    c, b = net.c.copy(), net.b.copy()
    frozen = np.zeros(b.size, dtype=bool)
    consec = np.zeros(b.size, dtype=int)
    energy_start = ritz_energy_r(net, u_k, f)
    after_solve = np.empty(cfg.n_r_inner)
    energies = np.empty(cfg.n_r_inner)
    clamps = np.zeros(cfg.n_r_inner, dtype=int)
    for i in range(cfg.n_r_inner):
        c = solve_outer_c(b, u_k, f, cfg.ridge)
        current = ShallowTestNet(c, b)
        after_solve[i] = ritz_energy_r(current, u_k, f)
        g = grad_r(current, u_k, f)
        b, frozen, consec, clamps[i] = _projected_step(
            b, g.wrt_inner, cfg.alpha, frozen, consec
        )
        energies[i] = ritz_energy_r(ShallowTestNet(c, b), u_k, f)
    return RitzLoopResult(ShallowTestNet(c, b), energy_start, after_solve, energies, clamps)


def deep_ritz_u(
    r_k_prime: PiecewiseConstant,
    u_k: PiecewiseConstant,
    net: ShallowTrialNet,
    cfg: TrainConfig,
) -> RitzLoopResult:
    """Inner loop for the trial network: exact solve in d, one projected
    gradient step on beta with rate omega, repeated n_u_inner times."""
    d, beta = net.d.copy(), net.beta.copy()
    frozen = np.zeros(beta.size, dtype=bool)
    consec = np.zeros(beta.size, dtype=int)
    energy_start = ritz_energy_u(net, r_k_prime, u_k, cfg.tau)
    after_solve = np.empty(cfg.n_u_inner)
    energies = np.empty(cfg.n_u_inner)
    clamps = np.zeros(cfg.n_u_inner, dtype=int)
    for i in range(cfg.n_u_inner):
        d = solve_outer_d(beta, r_k_prime, u_k, cfg.tau, cfg.ridge)
        current = ShallowTrialNet(d, beta)
        after_solve[i] = ritz_energy_u(current, r_k_prime, u_k, cfg.tau)
        g = grad_u(current, r_k_prime, u_k, cfg.tau)
        beta, frozen, consec, clamps[i] = _projected_step(
            beta, g.wrt_inner, cfg.omega, frozen, consec
        )
        energies[i] = ritz_energy_u(ShallowTrialNet(d, beta), r_k_prime, u_k, cfg.tau)
    return RitzLoopResult(ShallowTrialNet(d, beta), energy_start, after_solve, energies, clamps)


def l2_error(u_net: ShallowTrialNet, u_exact: PiecewiseLinear) -> float:
    """Exact L2 distance between the trial network and a piecewise-linear
    target: the squared difference is quadratic per merged piece, so Simpson
    integrates it exactly."""
    u_pc = trial_net_as_piecewise(u_net)
    merged = merge_breakpoints(u_pc.breaks, u_exact.breaks)
    cv = u_pc.piece_values_on(merged)
    ge = u_exact.value_at(merged.points)
    gm = u_exact.value_at(merged.midpoints)
    per_piece = (cv - ge[:-1]) ** 2 + 4.0 * (cv - gm) ** 2 + (cv - ge[1:]) ** 2
    return float(np.sqrt(max((per_piece / 6.0) @ merged.widths, 0.0)))


def v_norm_r(net: ShallowTestNet) -> float:
    """Test-space norm of the network: sqrt(c^T min(b_j, b_k) c)."""
    return float(np.sqrt(max(net.c @ ramp_gram(net.b) @ net.c, 0.0)))


def run_uddr(problem: TransportProblem, cfg: TrainConfig) -> RunTrace:
    """Full training run: outer saddle-point loop alternating the two inner
    Ritz loops, recording energies, norms, errors and function snapshots."""
    rng = np.random.default_rng(cfg.seed)
    trial, test = init_networks(cfg, rng)
    u_exact = exact_solution(problem.f)
    u_k = trial_net_as_piecewise(trial)
    grid = np.linspace(0.0, 1.0, SNAPSHOT_POINTS)

    K = cfg.outer_iters
    trace = RunTrace(
        r_energies=np.empty((K, cfg.n_r_inner)),
        u_energies=np.empty((K, cfg.n_u_inner)),
        r_energies_after_solve=np.empty((K, cfg.n_r_inner)),
        u_energies_after_solve=np.empty((K, cfg.n_u_inner)),
        r_clamps=np.zeros((K, cfg.n_r_inner), dtype=int),
        u_clamps=np.zeros((K, cfg.n_u_inner), dtype=int),
        v_norm_r=np.empty(K),
        l2_error=np.empty(K),
        uzawa_energy=np.empty(K),
        grid=grid,
        r_snapshots=np.empty((K, SNAPSHOT_POINTS)),
        u_snapshots=np.empty((K, SNAPSHOT_POINTS)),
        test_net=test,
        trial_net=trial,
    )

    for k in range(K):
        ritz1 = deep_ritz_r(u_k, test, problem.f, cfg)
        test = ritz1.net
        r_prime = test_net_derivative(test)

        ritz2 = deep_ritz_u(r_prime, u_k, trial, cfg)
        trial = ritz2.net
        u_k = trial_net_as_piecewise(trial)

        if not (
            np.all(np.isfinite(ritz1.energies)) and np.all(np.isfinite(ritz2.energies))
        ):
            raise NumericalDivergenceError(
                f"non-finite training energy at outer iteration {k + 1}"
            )

        trace.r_energies[k] = ritz1.energies
        trace.u_energies[k] = ritz2.energies
        trace.r_energies_after_solve[k] = ritz1.energies_after_solve
        trace.u_energies_after_solve[k] = ritz2.energies_after_solve
        trace.r_clamps[k] = ritz1.clamp_counts
        trace.u_clamps[k] = ritz2.clamp_counts
        trace.v_norm_r[k] = v_norm_r(test)
        trace.l2_error[k] = l2_error(trial, u_exact)
        trace.uzawa_energy[k] = ritz2.energies[-1]
        trace.r_snapshots[k] = test_net_as_piecewise(test).value_at(grid)
        trace.u_snapshots[k] = u_k.value_at(grid)

    trace.test_net = test
    trace.trial_net = trial
    return trace


def run_sweep(problem: TransportProblem, cfg: TrainConfig, taus) -> list[RunTrace]:
    """Independent runs over step sizes, fanned out concurrently; every run
    uses the same seed so a single-entry sweep reproduces a plain run."""
    taus = list(taus)
    with ThreadPoolExecutor(max_workers=min(8, len(taus))) as pool:
        return list(pool.map(lambda t: run_uddr(problem, replace(cfg, tau=t)), taus))
