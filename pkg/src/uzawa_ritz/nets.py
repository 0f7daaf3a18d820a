"""Shallow ramp / step networks and their quadratic training energies.

The test-function network is a sum of descending ramps c_i * max(b_i - x, 0),
so it realises continuous piecewise-linear functions vanishing right of the
largest breakpoint.  The trial network is a sum of unit steps d_i * H(x -
beta_i) with H(0) = 1, realising piecewise constants.  Both training energies
are quadratic in the outer weights with Gram matrices available in closed
form (min(b_j, b_k) for ramps, 1 - max(beta_i, beta_j) for steps), so outer
weights are updated by an exact ridge-regularised solve while the breakpoint
parameters get analytic gradients differentiated from the same closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import solve_spd
from .piecewise import (
    Breakpoints,
    PiecewiseConstant,
    PiecewiseLinear,
    DEDUP_TOL,
    integrate_cc,
    integrate_cl,
)

# Pairs of breakpoints closer than this make the inner-parameter gradient a
# one-sided convention instead of a true derivative; flag them.
DEGENERATE_TOL = 1e-12

# Gram solve fails outright only when a pivot falls below this.
GRAM_MIN_PIVOT = 1e-300


def _param_array(x, name: str, unit_interval: bool) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size < 1:
        raise ValueError(f"{name} needs at least one entry")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if unit_interval and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValueError(f"{name} must lie in [0, 1]")
    return arr


@dataclass(frozen=True, eq=False)
class ShallowTestNet:
    """r(x) = sum_i c_i * max(b_i - x, 0); vanishes at 1 since every b_i <= 1."""

    c: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = _param_array(self.c, "c", unit_interval=False)
        b = _param_array(self.b, "b", unit_interval=True)
        if c.size != b.size:
            raise ValueError("c and b must have equal length")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.c.size


@dataclass(frozen=True, eq=False)
class ShallowTrialNet:
    """u(x) = sum_i d_i * H(x - beta_i) with H(0) = 1."""

    d: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        d = _param_array(self.d, "d", unit_interval=False)
        beta = _param_array(self.beta, "beta", unit_interval=True)
        if d.size != beta.size:
            raise ValueError("d and beta must have equal length")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "beta", beta)

    @property
    def m(self) -> int:
        return self.d.size


@dataclass(frozen=True, eq=False)
class EnergyGradient:
    wrt_outer: np.ndarray
    wrt_inner: np.ndarray
    degenerate: bool = False


def ramp_gram(b) -> np.ndarray:
    """Gram matrix of the ramp derivatives in the first-derivative inner
    product: G[j, k] = min(b_j, b_k)."""
    b = np.asarray(b, dtype=float)
    return np.minimum.outer(b, b)


def step_gram(beta) -> np.ndarray:
    """L2 Gram matrix of the unit steps: M[i, j] = 1 - max(beta_i, beta_j)."""
    beta = np.asarray(beta, dtype=float)
    return 1.0 - np.maximum.outer(beta, beta)


def test_net_as_piecewise(net: ShallowTestNet) -> PiecewiseLinear:
    """Exact piecewise-linear representation on the grid {0, sorted b, 1}."""
    breaks = Breakpoints(net.b)
    nodes = np.maximum(net.b[None, :] - breaks.points[:, None], 0.0) @ net.c
    return PiecewiseLinear(breaks, nodes)


def test_net_derivative(net: ShallowTestNet) -> PiecewiseConstant:
    """Exact r'(x) = -sum_i c_i * [x < b_i] as a piecewise constant."""
    breaks = Breakpoints(net.b)
    vals = -((breaks.midpoints[:, None] < net.b[None, :]).astype(float) @ net.c)
    return PiecewiseConstant(breaks, vals)


def trial_net_as_piecewise(net: ShallowTrialNet) -> PiecewiseConstant:
    """Exact u(x) as a piecewise constant; the jump at beta_i belongs to the
    piece starting there (H(0) = 1)."""
    breaks = Breakpoints(net.beta)
    left = breaks.points[:-1]
    vals = (net.beta[None, :] <= left[:, None] + DEDUP_TOL).astype(float) @ net.d
    return PiecewiseConstant(breaks, vals)


def ritz_energy_r(net: ShallowTestNet, u_k: PiecewiseConstant, f: PiecewiseConstant) -> float:
    """Residual-update energy 0.5*|r|_V^2 - l(r) + b(u_k, r) with
    (r, v)_V = int r'v', l(r) = int f r, b(u, r) = -int u r'."""
    quad = net.c @ ramp_gram(net.b) @ net.c
    linear = integrate_cl(f, test_net_as_piecewise(net))
    pairing = integrate_cc(u_k, test_net_derivative(net))
    return 0.5 * float(quad) - linear - pairing


def ritz_energy_u(
    net: ShallowTrialNet,
    r_k_prime: PiecewiseConstant,
    u_k: PiecewiseConstant,
    tau: float,
) -> float:
    """Solution-update energy 0.5*|u|^2 - tau*b(u, r_k) - (u_k, u)."""
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    u_pc = trial_net_as_piecewise(net)
    quad = net.d @ step_gram(net.beta) @ net.d
    return 0.5 * float(quad) + tau * integrate_cc(u_pc, r_k_prime) - integrate_cc(u_k, u_pc)


def _near_degenerate(params: np.ndarray, grids) -> bool:
    s = np.sort(params)
    if s.size > 1 and np.any(np.diff(s) < DEGENERATE_TOL):
        return True
    pts = np.unique(np.concatenate([g.points for g in grids]))
    idx = np.searchsorted(pts, params)
    lo = pts[np.clip(idx - 1, 0, pts.size - 1)]
    hi = pts[np.clip(idx, 0, pts.size - 1)]
    dist = np.minimum(np.abs(params - lo), np.abs(params - hi))
    return bool(np.any(dist < DEGENERATE_TOL))


def _settle_kinks(g_left: np.ndarray, g_right: np.ndarray) -> np.ndarray:
    """Combine one-sided derivatives of a piecewise-smooth energy.

    Away from kinks both sides agree and their mean is the derivative.  At a
    kink whose one-sided derivatives bracket zero the point is stationary in
    the subgradient sense, so the returned component is zero; moving there
    would only oscillate the energy upward.  Otherwise the mean of the two
    limits is used (symmetric subgradient convention).
    """
    avg = 0.5 * (g_left + g_right)
    stationary = (np.minimum(g_left, g_right) <= 0.0) & (np.maximum(g_left, g_right) >= 0.0)
    return np.where(stationary, 0.0, avg)


def grad_r(net: ShallowTestNet, u_k: PiecewiseConstant, f: PiecewiseConstant) -> EnergyGradient:
    """Analytic gradient of ritz_energy_r in (c, b).

    In b_i the energy is piecewise smooth: the diagonal quadratic term
    differentiates exactly to 0.5*c_i^2, the source term to -c_i*F(b_i) with
    F the (continuous) cumulative integral of f, while ties with other
    breakpoints and jumps of u_k give genuine kinks handled one-sidedly.
    """
    c, b = net.c, net.b
    W_left = (b[None, :] >= b[:, None]).astype(float)
    W_right = (b[None, :] > b[:, None]).astype(float)
    np.fill_diagonal(W_left, 0.5)
    np.fill_diagonal(W_right, 0.5)
    smooth = -c * f.integral_to(b)
    g_left = c * (W_left @ c) + smooth + c * u_k.value_left(b)
    g_right = c * (W_right @ c) + smooth + c * u_k.value_at(b)
    g_c = ramp_gram(b) @ c - (f.ramp_integral(b) - u_k.integral_to(b))
    degenerate = _near_degenerate(b, (u_k.breaks, f.breaks))
    return EnergyGradient(g_c, _settle_kinks(g_left, g_right), degenerate)


def grad_u(
    net: ShallowTrialNet,
    r_k_prime: PiecewiseConstant,
    u_k: PiecewiseConstant,
    tau: float,
) -> EnergyGradient:
    """Analytic gradient of ritz_energy_u in (d, beta); the mirror of grad_r
    with kinks at ties between jump points and at jumps of r' and u_k."""
    d, beta = net.d, net.beta
    V_left = (beta[None, :] < beta[:, None]).astype(float)
    V_right = (beta[None, :] <= beta[:, None]).astype(float)
    np.fill_diagonal(V_left, 0.5)
    np.fill_diagonal(V_right, 0.5)
    g_left = (
        -d * (V_left @ d)
        - tau * d * r_k_prime.value_left(beta)
        + d * u_k.value_left(beta)
    )
    g_right = (
        -d * (V_right @ d)
        - tau * d * r_k_prime.value_at(beta)
        + d * u_k.value_at(beta)
    )
    g_d = step_gram(beta) @ d - (
        u_k.tail_integral(beta) - tau * r_k_prime.tail_integral(beta)
    )
    degenerate = _near_degenerate(beta, (r_k_prime.breaks, u_k.breaks))
    return EnergyGradient(g_d, _settle_kinks(g_left, g_right), degenerate)


def solve_outer_c(b, u_k: PiecewiseConstant, f: PiecewiseConstant, ridge: float) -> np.ndarray:
    """Exact minimiser of the ridge-augmented residual energy over c."""
    if ridge < 0.0:
        raise ValueError("ridge must be nonnegative")
    b = np.asarray(b, dtype=float)
    gram = ramp_gram(b) + ridge * np.eye(b.size)
    rhs = f.ramp_integral(b) - u_k.integral_to(b)
    return solve_spd(gram, rhs, min_pivot=GRAM_MIN_PIVOT)


def solve_outer_d(
    beta,
    r_k_prime: PiecewiseConstant,
    u_k: PiecewiseConstant,
    tau: float,
    ridge: float,
) -> np.ndarray:
    """Exact minimiser of the ridge-augmented solution energy over d."""
    if ridge < 0.0:
        raise ValueError("ridge must be nonnegative")
    beta = np.asarray(beta, dtype=float)
    gram = step_gram(beta) + ridge * np.eye(beta.size)
    rhs = u_k.tail_integral(beta) - tau * r_k_prime.tail_integral(beta)
    return solve_spd(gram, rhs, min_pivot=GRAM_MIN_PIVOT)


def project_inner(params) -> np.ndarray:
    """Componentwise clamp of inner parameters to [0, 1]."""
    return np.clip(np.asarray(params, dtype=float), 0.0, 1.0)
