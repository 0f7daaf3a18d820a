"""Finite-dimensional saddle-point problems and Uzawa-type steppers.

A problem is (B, R_U, R_V, l) with B full column rank and R_U, R_V symmetric
positive definite.  The mixed system

    R_V r + B u = l,     B^T r = 0

is the oracle against which the exact Uzawa iteration, the inexact variant
with controlled perturbations, and the one-step block-gradient scheme are
run.  Factorisations and the derived operators R_V^{-1} B, R_U^{-1} B^T are
computed once per problem so stepping costs only a few mat-vecs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import cholesky, jacobi_eigenvalues, solve_cholesky, solve_lower, solve_spd

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MatrixSaddleProblem:
    B: np.ndarray
    R_U: np.ndarray
    R_V: np.ndarray
    l: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        R_U = np.asarray(self.R_U, dtype=float)
        R_V = np.asarray(self.R_V, dtype=float)
        l = np.asarray(self.l, dtype=float).ravel()
        n_v, m_u = B.shape
        if R_U.shape != (m_u, m_u) or R_V.shape != (n_v, n_v) or l.size != n_v:
            raise ValueError("inconsistent dimensions")
        for name, mat in (("R_U", R_U), ("R_V", R_V)):
            scale = max(1.0, float(np.abs(mat).max()))
            if float(np.abs(mat - mat.T).max()) > SYMMETRY_TOL * scale:
                raise ValueError(f"{name} is not symmetric within 1e-12")
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "R_U", R_U)
        object.__setattr__(self, "R_V", R_V)
        object.__setattr__(self, "l", l)
        # Cholesky both validates positive definiteness and feeds the cached
        # operators below.
        L_U = cholesky(R_U)
        L_V = cholesky(R_V)
        object.__setattr__(self, "_L_U", L_U)
        object.__setattr__(self, "_L_V", L_V)
        object.__setattr__(self, "rv_inv_B", solve_cholesky(L_V, B))
        object.__setattr__(self, "rv_inv_l", solve_cholesky(L_V, l))
        object.__setattr__(self, "ru_inv_Bt", solve_cholesky(L_U, B.T))
        object.__setattr__(self, "G", self.ru_inv_Bt @ self.rv_inv_B)

    @property
    def n_v(self) -> int:
        return self.B.shape[0]

    @property
    def m_u(self) -> int:
        return self.B.shape[1]

    def u_norm(self, x) -> float:
        return float(np.sqrt(max(x @ (self.R_U @ x), 0.0)))

    def v_norm(self, x) -> float:
        return float(np.sqrt(max(x @ (self.R_V @ x), 0.0)))


@dataclass(frozen=True, eq=False)
class UzawaState:
    u: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float).ravel())
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float).ravel())

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.r)))


@dataclass(frozen=True)
class PerturbationSpec:
    """Relative inexactness injected into an Uzawa step, at exactly the
    allowed magnitudes: delta for the residual solve, epsilon for the
    solution update."""

    delta: float
    epsilon: float
    mode: str = "random-direction"
    seed: int = 0

    def __post_init__(self):
        if self.delta < 0.0 or self.epsilon < 0.0:
            raise ValueError("delta and epsilon must be nonnegative")
        if self.mode not in ("random-direction", "error-aligned"):
            raise ValueError(f"unknown perturbation mode {self.mode!r}")


@dataclass(eq=False)
class IterationTrace:
    err_u: np.ndarray
    err_r: np.ndarray
    ratios: np.ndarray
    converged: bool
    diverged: bool
    final: UzawaState


def reference_solution(p: MatrixSaddleProblem) -> UzawaState:
    """Direct solve of the mixed system via the Schur complement
    (B^T R_V^{-1} B) u = B^T R_V^{-1} l, then r = R_V^{-1}(l - B u)."""
    cached = getattr(p, "_reference", None)
    if cached is not None:
        return cached
    K = p.B.T @ p.rv_inv_B
    K = 0.5 * (K + K.T)
    u = solve_spd(K, p.B.T @ p.rv_inv_l)
    r = p.rv_inv_l - p.rv_inv_B @ u
    ref = UzawaState(u, r)
    object.__setattr__(p, "_reference", ref)
    return ref


def exact_uzawa_step(p: MatrixSaddleProblem, s: UzawaState, tau: float) -> UzawaState:
    """One exact iteration: r = R_V^{-1}(l - B u), then u += tau R_U^{-1} B^T r."""
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    r = p.rv_inv_l - p.rv_inv_B @ s.u
    u = s.u + tau * (p.ru_inv_Bt @ r)
    return UzawaState(u, r)


def _unit_direction(rng, size: int, norm) -> np.ndarray:
    while True:
        w = rng.standard_normal(size)
        n = norm(w)
        if n > 0.0:
            return w / n


def inexact_uzawa_step(
    p: MatrixSaddleProblem,
    s: UzawaState,
    tau: float,
    spec: PerturbationSpec,
    rng: np.random.Generator,
    ref: UzawaState | None = None,
) -> UzawaState:
    """Exact step with perturbations at exactly the allowed relative sizes:
    the residual is shifted by delta*|r| along a unit direction, the updated
    solution by epsilon*|u_k - u_half| along another."""
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    if spec.mode == "error-aligned" and ref is None:
        ref = reference_solution(p)
    r = p.rv_inv_l - p.rv_inv_B @ s.u
    if spec.delta > 0.0:
        if spec.mode == "error-aligned":
            e_r = r - ref.r
            nrm = p.v_norm(e_r)
            w = e_r / nrm if nrm > 0.0 else _unit_direction(rng, p.n_v, p.v_norm)
        else:
            w = _unit_direction(rng, p.n_v, p.v_norm)
        r = r + spec.delta * p.v_norm(r) * w
    u = s.u + tau * (p.ru_inv_Bt @ r)
    if spec.epsilon > 0.0:
        if spec.mode == "error-aligned":
            e_u = u - ref.u
            nrm = p.u_norm(e_u)
            z = e_u / nrm if nrm > 0.0 else _unit_direction(rng, p.m_u, p.u_norm)
        else:
            z = _unit_direction(rng, p.m_u, p.u_norm)
        u = u + spec.epsilon * p.u_norm(s.u - u) * z
    return UzawaState(u, r)


def one_step_gradient_step(
    p: MatrixSaddleProblem,
    r_prev,
    s: UzawaState,
    alpha: float,
    omega: float,
    tau: float,
) -> UzawaState:
    """One block-gradient iteration: the residual is relaxed toward the exact
    solve with rate alpha, then the solution moves with the reduced step
    tau*omega/(1+omega) (the resolved form of the implicit update)."""
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    r_prev = np.asarray(r_prev, dtype=float).ravel()
    r = (1.0 - alpha) * r_prev + alpha * (p.rv_inv_l - p.rv_inv_B @ s.u)
    tau_eff = tau * omega / (1.0 + omega)
    u = s.u + tau_eff * (p.ru_inv_Bt @ r)
    return UzawaState(u, r)


def build_iteration_matrix(
    p: MatrixSaddleProblem, alpha: float, omega: float, tau: float
) -> np.ndarray:
    """Error-propagation matrix of the one-step gradient scheme on the
    stacked error (e_r, e_u)."""
    tau_eff = tau * omega / (1.0 + omega)
    I_v = np.eye(p.n_v)
    I_u = np.eye(p.m_u)
    return np.block(
        [
            [(1.0 - alpha) * I_v, -alpha * p.rv_inv_B],
            [tau_eff * (1.0 - alpha) * p.ru_inv_Bt, I_u - tau_eff * alpha * p.G],
        ]
    )


def spectrum_G(p: MatrixSaddleProblem) -> np.ndarray:
    """Eigenvalues (ascending) of G = R_U^{-1} B^T R_V^{-1} B, computed on the
    symmetric similar matrix L_U^{-1} (B^T R_V^{-1} B) L_U^{-T}."""
    K = p.B.T @ p.rv_inv_B
    K = 0.5 * (K + K.T)
    Y = solve_lower(p._L_U, K)
    S = solve_lower(p._L_U, Y.T).T
    return jacobi_eigenvalues(0.5 * (S + S.T))


def estimate_bounds_mM(p: MatrixSaddleProblem) -> tuple[float, float]:
    """Extreme bounds m, M with m|u|_U <= |Bu|_{V*} <= M|u|_U; m = 0 flags a
    rank-deficient B."""
    eigs = spectrum_G(p)
    lam_min, lam_max = float(eigs[0]), float(eigs[-1])
    m = float(np.sqrt(lam_min)) if lam_min > 0.0 else 0.0
    M = float(np.sqrt(max(lam_max, 0.0)))
    return m, M


def run_iteration(
    p: MatrixSaddleProblem,
    stepper,
    s0: UzawaState,
    max_steps: int,
    tol: float,
) -> IterationTrace:
    """Apply stepper(p, s) until |u - u*|_U <= tol or max_steps, recording the
    error history against the direct reference solution."""
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    ref = reference_solution(p)
    s = s0
    err_u = [p.u_norm(s.u - ref.u)]
    err_r = [p.v_norm(s.r - ref.r)]
    diverged = False
    for _ in range(max_steps):
        if err_u[-1] <= tol:
            break
        s = stepper(p, s)
        if not s.is_finite():
            diverged = True
            break
        err_u.append(p.u_norm(s.u - ref.u))
        err_r.append(p.v_norm(s.r - ref.r))
    err_u = np.asarray(err_u)
    err_r = np.asarray(err_r)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = err_u[1:] / err_u[:-1]
    return IterationTrace(
        err_u=err_u,
        err_r=err_r,
        ratios=ratios,
        converged=bool(err_u[-1] <= tol),
        diverged=diverged,
        final=s,
    )


def make_exact_stepper(tau: float):
    return lambda p, s: exact_uzawa_step(p, s, tau)


def make_inexact_stepper(tau: float, spec: PerturbationSpec, rng=None, ref=None):
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    return lambda p, s: inexact_uzawa_step(p, s, tau, spec, rng, ref=ref)


def make_one_step_gradient_stepper(alpha: float, omega: float, tau: float):
    # the state's r field is the previous residual iterate
    return lambda p, s: one_step_gradient_step(p, s.r, s, alpha, omega, tau)


def fit_decay_rate(
    p: MatrixSaddleProblem,
    alpha: float,
    omega: float,
    tau: float,
    seed: int = 0,
    n_steps: int = 1000,
    window: tuple[int, int] = (200, 1000),
) -> float:
    """Asymptotic per-step decay rate of the one-step gradient scheme,
    estimated by a least-squares fit of log|E_k| over a late-iteration window
    (the transient is discarded).  The error is renormalised on the fly so
    the fit never underflows."""
    ref = reference_solution(p)
    rng = np.random.default_rng(seed)
    e_r = rng.standard_normal(p.n_v)
    e_u = rng.standard_normal(p.m_u)
    scale = np.sqrt(e_r @ e_r + e_u @ e_u)
    s = UzawaState(ref.u + e_u / scale, ref.r + e_r / scale)
    logs = np.empty(n_steps)
    offset = 0.0
    for k in range(n_steps):
        s = one_step_gradient_step(p, s.r, s, alpha, omega, tau)
        stacked = np.concatenate([s.r - ref.r, s.u - ref.u])
        nrm = float(np.sqrt(stacked @ stacked))
        if nrm == 0.0:
            logs[k:] = -np.inf
            break
        logs[k] = np.log(nrm) + offset
        if nrm < 1e-100:
            s = UzawaState(ref.u + (s.u - ref.u) / nrm, ref.r + (s.r - ref.r) / nrm)
            offset += np.log(nrm)
    lo, hi = window
    ks = np.arange(lo, hi)
    slope = np.polyfit(ks, logs[lo:hi], 1)[0]
    return float(np.exp(slope))


def random_problem(
    n_v: int, m_u: int, seed: int, consistent: bool = True
) -> MatrixSaddleProblem:
    """Random full-column-rank instance: standard-normal B, R = L L^T + I.

    With consistent=True the data l = B u_true lies in the range of B, so the
    residual component of the saddle point is zero; relative inexactness
    bounds then contract all the way to the solution.
    """
    if n_v < m_u:
        raise ValueError("need n_v >= m_u")
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n_v, m_u))
    L_u = rng.standard_normal((m_u, m_u))
    R_U = L_u @ L_u.T + np.eye(m_u)
    L_v = rng.standard_normal((n_v, n_v))
    R_V = L_v @ L_v.T + np.eye(n_v)
    if consistent:
        l = B @ rng.standard_normal(m_u)
    else:
        l = rng.standard_normal(n_v)
    return MatrixSaddleProblem(B, R_U, R_V, l)


def identity_problem(n_v: int, m_u: int, seed: int = 0) -> MatrixSaddleProblem:
    """Instance with m = M = 1: B an identity embedding, identity metrics."""
    if n_v < m_u:
        raise ValueError("need n_v >= m_u")
    rng = np.random.default_rng(seed)
    B = np.eye(n_v, m_u)
    l = B @ rng.standard_normal(m_u)
    return MatrixSaddleProblem(B, np.eye(m_u), np.eye(n_v), l)
