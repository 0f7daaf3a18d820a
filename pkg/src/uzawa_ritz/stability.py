"""Closed-form stability predicates for the Uzawa-type iterations.

Covers the exact contraction factor, the admissible inexactness budget, the
quadratic characteristic polynomial of the one-step gradient scheme together
with its Schur-Cohn unit-circle test, and the predicted spectral radius of
the full error-propagation operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StabilityReport:
    gamma: float
    budget_rhs: float  # (1 - gamma) / (tau * M^2)
    budget_lhs: float  # delta + epsilon * (1 + delta)
    admissible: bool
    predicted_rate: float


@dataclass(frozen=True)
class QuadraticRoots:
    root1: complex
    root2: complex

    @property
    def max_modulus(self) -> float:
        return max(abs(self.root1), abs(self.root2))


def gamma(tau: float, m: float, M: float) -> float:
    """Contraction factor max{|1 - tau m^2|, |1 - tau M^2|} of the exact
    solution update."""
    if not (0.0 < m <= M):
        raise ValueError("need 0 < m <= M")
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    return max(abs(1.0 - tau * m * m), abs(1.0 - tau * M * M))


def inexact_budget(
    delta: float, epsilon: float, tau: float, m: float, M: float
) -> StabilityReport:
    """Admissibility of (delta, epsilon) at step size tau: the combined
    inexactness delta + epsilon*(1+delta) must stay strictly below
    (1 - gamma)/(tau M^2).  The predicted contraction rate adds the allowed
    slack on top of gamma."""
    if delta < 0.0 or epsilon < 0.0:
        raise ValueError("delta and epsilon must be nonnegative")
    g = gamma(tau, m, M)
    lhs = delta + epsilon * (1.0 + delta)
    rhs = (1.0 - g) / (tau * M * M)
    rate = g + tau * M * M * lhs
    return StabilityReport(
        gamma=g,
        budget_rhs=rhs,
        budget_lhs=lhs,
        admissible=bool(lhs < rhs and g < 1.0),
        predicted_rate=rate,
    )


def effective_step(tau: float, omega: float) -> float:
    """Reduced step size tau*omega/(1+omega) of the resolved implicit
    solution update."""
    return tau * omega / (1.0 + omega)


def char_poly_coeffs(alpha: float, omega: float, tau: float, mu: float):
    """Coefficients (a2, a1, a0) of the per-mode characteristic polynomial
    lambda^2 - (2 - alpha - tau_eff*alpha*mu) lambda + (1 - alpha)."""
    tau_eff = effective_step(tau, omega)
    return 1.0, -(2.0 - alpha - tau_eff * alpha * mu), 1.0 - alpha


def char_poly_roots(alpha: float, omega: float, tau: float, mu: float) -> QuadraticRoots:
    """Both roots via the numerically stable quadratic formula: the
    larger-magnitude root first, the other from the product of roots."""
    _, a1, a0 = char_poly_coeffs(alpha, omega, tau, mu)
    s = -a1  # sum of roots
    disc = s * s - 4.0 * a0
    if disc >= 0.0:
        sq = np.sqrt(disc)
        big = 0.5 * (s + sq) if s >= 0.0 else 0.5 * (s - sq)
        if big == 0.0:
            return QuadraticRoots(0j, 0j)
        return QuadraticRoots(complex(big), complex(a0 / big))
    half_im = 0.5 * np.sqrt(-disc)
    return QuadraticRoots(complex(0.5 * s, half_im), complex(0.5 * s, -half_im))


def schur_cohn_quadratic(a2: float, a1: float, a0: float) -> bool:
    """True iff both roots of a2 x^2 + a1 x + a0 lie strictly inside the unit
    circle: p(1) > 0, p(-1) > 0 and |a0| < |a2|."""
    if a2 == 0.0:
        raise ValueError("leading coefficient must be nonzero")
    return bool(a2 + a1 + a0 > 0.0 and a2 - a1 + a0 > 0.0 and abs(a0) < abs(a2))


def predicted_spectral_radius(
    alpha: float,
    omega: float,
    tau: float,
    spectrum_G,
    kernel_dim: int = 0,
) -> float:
    """Spectral radius of the one-step-gradient error operator: the largest
    root modulus of the characteristic polynomial over the given spectrum,
    joined with |1 - alpha| for the kernel modes of B^T when present."""
    spectrum_G = np.asarray(spectrum_G, dtype=float).ravel()
    if spectrum_G.size == 0:
        raise ValueError("spectrum_G must be nonempty")
    if np.any(spectrum_G <= 0.0):
        raise ValueError("spectrum_G entries must be positive")
    if kernel_dim < 0:
        raise ValueError("kernel_dim must be nonnegative")
    rho = max(char_poly_roots(alpha, omega, tau, mu).max_modulus for mu in spectrum_G)
    if kernel_dim > 0:
        rho = max(rho, abs(1.0 - alpha))
    return float(rho)
