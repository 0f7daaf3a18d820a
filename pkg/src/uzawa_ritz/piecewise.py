"""Exact piecewise-constant / piecewise-linear calculus on [0, 1].

Functions are stored as a breakpoint grid plus per-piece (or per-node)
values.  Every integral is assembled piece by piece on the merged grid with
a rule that is exact for the local polynomial degree (midpoint for products
of constants, trapezoid for constant x linear, Simpson for linear x linear),
so no quadrature error enters anything built on top.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Breakpoints closer than this are treated as one point; merging them keeps
# zero-width pieces from destabilising per-piece slope computations.
DEDUP_TOL = 1e-14


def _normalized_grid(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float).ravel()
    if pts.size and not np.all(np.isfinite(pts)):
        raise ValueError("breakpoints must be finite")
    if pts.size and (pts.min() < 0.0 or pts.max() > 1.0):
        raise ValueError("breakpoints must lie in [0, 1]")
    pts = np.sort(np.concatenate([pts, [0.0, 1.0]]))
    kept = [0.0]
    for x in pts[1:]:
        if x - kept[-1] > DEDUP_TOL:
            kept.append(float(x))
    kept[-1] = 1.0  # a survivor within DEDUP_TOL of 1 stands in for the endpoint
    return np.asarray(kept)


def _check_domain(x: np.ndarray) -> None:
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise ValueError("evaluation outside [0, 1] is an error, not extrapolation")


@dataclass(frozen=True, eq=False)
class Breakpoints:
    """Sorted grid on [0, 1] that always contains both endpoints.

    Construction sorts the input, inserts 0 and 1, and merges points closer
    than DEDUP_TOL, so consecutive grid points are strictly increasing.
    """

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _normalized_grid(self.points))
        self.points.flags.writeable = False

    def __len__(self) -> int:
        return self.points.size

    @property
    def n_pieces(self) -> int:
        return self.points.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.points)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.points[:-1] + self.points[1:])


def merge_breakpoints(a: Breakpoints, b: Breakpoints) -> Breakpoints:
    """Sorted union of two grids, deduplicated to DEDUP_TOL."""
    return Breakpoints(np.concatenate([a.points, b.points]))


@dataclass(frozen=True, eq=False)
class PiecewiseConstant:
    """Piecewise-constant function: one value per piece.

    At an interior breakpoint the value is taken from the right-hand piece;
    at x = 1 from the last piece.  The choice only matters for point
    evaluation, never for integrals.
    """

    breaks: Breakpoints
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).ravel()
        if vals.size != self.breaks.n_pieces:
            raise ValueError(
                f"need {self.breaks.n_pieces} piece values, got {vals.size}"
            )
        object.__setattr__(self, "values", vals)
        self.values.flags.writeable = False

    def _piece_index(self, x: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.breaks.points, x, side="right") - 1
        return np.clip(idx, 0, self.breaks.n_pieces - 1)

    def value_at(self, x):
        x = np.asarray(x, dtype=float)
        _check_domain(x)
        return self.values[self._piece_index(x)]

    def value_left(self, x):
        """Left limit; coincides with value_at except exactly at breakpoints."""
        x = np.asarray(x, dtype=float)
        _check_domain(x)
        idx = np.searchsorted(self.breaks.points, x, side="left") - 1
        return self.values[np.clip(idx, 0, self.breaks.n_pieces - 1)]

    def value_average(self, x):
        """Evaluation with jump averaging: at a breakpoint return the mean of
        the left and right limits (symmetric subgradient convention)."""
        x = np.asarray(x, dtype=float)
        return 0.5 * (self.value_left(x) + self.value_at(x))

    def piece_values_on(self, grid: Breakpoints) -> np.ndarray:
        """Per-piece values on a refinement of this function's grid."""
        return self.values[self._piece_index(grid.midpoints)]

    @property
    def total_integral(self) -> float:
        return float(self.values @ self.breaks.widths)

    def integral_to(self, x):
        """Exact cumulative integral from 0 to x (vectorised in x)."""
        x = np.asarray(x, dtype=float)
        _check_domain(x)
        pts = self.breaks.points
        prefix = np.concatenate([[0.0], np.cumsum(self.values * self.breaks.widths)])
        idx = self._piece_index(x)
        return prefix[idx] + self.values[idx] * (x - pts[idx])

    def first_moment_to(self, x):
        """Exact cumulative first moment: integral of t*f(t) from 0 to x."""
        x = np.asarray(x, dtype=float)
        _check_domain(x)
        pts = self.breaks.points
        piece_moments = self.values * 0.5 * (pts[1:] ** 2 - pts[:-1] ** 2)
        prefix = np.concatenate([[0.0], np.cumsum(piece_moments)])
        idx = self._piece_index(x)
        return prefix[idx] + self.values[idx] * 0.5 * (x**2 - pts[idx] ** 2)

    def ramp_integral(self, b):
        """Exact integral of f(t)*(b - t) over [0, b] (vectorised in b)."""
        b = np.asarray(b, dtype=float)
        return b * self.integral_to(b) - self.first_moment_to(b)

    def tail_integral(self, x):
        """Exact integral of f over [x, 1]."""
        return self.total_integral - self.integral_to(x)


@dataclass(frozen=True, eq=False)
class PiecewiseLinear:
    """Continuous piecewise-linear function given by its node values."""

    breaks: Breakpoints
    node_values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.node_values, dtype=float).ravel()
        if vals.size != len(self.breaks):
            raise ValueError(f"need {len(self.breaks)} node values, got {vals.size}")
        object.__setattr__(self, "node_values", vals)
        self.node_values.flags.writeable = False

    def value_at(self, x):
        x = np.asarray(x, dtype=float)
        _check_domain(x)
        return np.interp(x, self.breaks.points, self.node_values)


def constant(value: float) -> PiecewiseConstant:
    """The constant function on [0, 1]."""
    return PiecewiseConstant(Breakpoints([]), [float(value)])


def integrate_cc(f: PiecewiseConstant, g: PiecewiseConstant) -> float:
    """Exact integral of f*g: both constant per merged piece."""
    merged = merge_breakpoints(f.breaks, g.breaks)
    fv = f.piece_values_on(merged)
    gv = g.piece_values_on(merged)
    return float((fv * gv) @ merged.widths)


def integrate_cl(f: PiecewiseConstant, g: PiecewiseLinear) -> float:
    """Exact integral of f*g: the integrand is linear per merged piece, so the
    trapezoid rule is exact there."""
    merged = merge_breakpoints(f.breaks, g.breaks)
    fv = f.piece_values_on(merged)
    ge = g.value_at(merged.points)
    return float((fv * 0.5 * (ge[:-1] + ge[1:])) @ merged.widths)


def integrate_ll(f: PiecewiseLinear, g: PiecewiseLinear) -> float:
    """Exact integral of f*g: quadratic per merged piece, Simpson-exact."""
    merged = merge_breakpoints(f.breaks, g.breaks)
    fe = f.value_at(merged.points)
    ge = g.value_at(merged.points)
    fm = f.value_at(merged.midpoints)
    gm = g.value_at(merged.midpoints)
    per_piece = fe[:-1] * ge[:-1] + 4.0 * fm * gm + fe[1:] * ge[1:]
    return float((per_piece / 6.0) @ merged.widths)
