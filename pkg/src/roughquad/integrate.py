"""Quadrature rules against rough drivers and the diagnostic statistics.

Value convention: integrals are vectors in R^m with m equal to the driver
dimension d.  Component a is the integral of y_a against the driver
component X^a, so the compensated sum for component a reads

    sum_k  y_a X^{1,a} + sum_j y1[a,j] X^{2,ja} + sum_{j,l} y2[a,j,l] X^{3,jla}

with the new integrator slot appended on the right of the iterated
integrals.  Summing the components recovers the scalar inner-product
pairing of the driver with a d-dimensional integrand.

The trapezoid sum splits exactly into I1 + I2 + I3 + I4, where I1 is the
compensated sum, I2 and I3 compensate levels 2 and 3, and I4 carries the
remainder term; the split is algebraic and holds on every grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .controlled import ControlledPath, SmoothFunction
from .covariance import CovarianceModel, sigma_sq
from .grids import Increment1, Partition, subgrid_indices
from .lift import RoughLift
from .simulate import PathSample

_BREAKDOWN_TOL = 1e-12


@dataclass(frozen=True)
class IntegralResult:
    """Value of a quadrature rule plus an optional additive breakdown."""

    value: np.ndarray
    rule: str
    mesh: float
    breakdown: dict | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "value", np.atleast_1d(np.asarray(self.value, dtype=float)))
        if self.breakdown is not None:
            total = sum(np.asarray(v, dtype=float) for v in self.breakdown.values())
            scale = 1.0 + float(np.max(np.abs(self.value)))
            if np.max(np.abs(total - self.value)) > _BREAKDOWN_TOL * scale:
                raise ValueError("breakdown terms do not sum to the value")

    @property
    def total(self) -> float:
        """Scalar inner-product value (sum over components)."""
        return float(np.sum(self.value))


def _cell_data(lift: RoughLift, P: Partition):
    idx = subgrid_indices(P, lift.partition)
    return lift.cell_levels(idx)


def _restrict_values(values: np.ndarray, from_p: Partition, to_p: Partition) -> np.ndarray:
    return values[subgrid_indices(to_p, from_p)]


def rough_integral(cp: ControlledPath, lift: RoughLift, P: Partition) -> IntegralResult:
    """Compensated Riemann sum of the controlled path over P.

    P must be a sub-grid of the lift's fine partition and carry cp's values;
    the breakdown records the three level contributions.

    Raises:
        GridLookupError: when P is not a sub-grid of the fine partition.
        ValueError: when cp does not live on P.
    """
    if cp.partition != P:
        cp = cp.restrict(P)
    x1, x2, x3 = _cell_data(lift, P)
    lvl1 = np.einsum("ka,ka->a", cp.y[:-1], x1)
    lvl2 = np.einsum("kaj,kja->a", cp.y1[:-1], x2)
    lvl3 = np.einsum("kajl,kjla->a", cp.y2[:-1], x3)
    return IntegralResult(
        value=lvl1 + lvl2 + lvl3,
        rule="rough",
        mesh=P.mesh,
        breakdown={"level1": lvl1, "level2": lvl2, "level3": lvl3},
    )


def trapezoid(cp: ControlledPath, X: PathSample, P: Partition) -> IntegralResult:
    """Trapezoid rule sum_k (y_{t_k} + y_{t_{k+1}})/2 . dX over P."""
    y = cp.y if cp.partition == P else cp.restrict(P).y
    xv = _restrict_values(X.values, X.partition, P)
    dx = np.diff(xv, axis=0)
    value = np.einsum("ka,ka->a", 0.5 * (y[:-1] + y[1:]), dx)
    return IntegralResult(value=value, rule="trapezoid", mesh=P.mesh)


def midpoint(fn: SmoothFunction, X: PathSample, P: Partition) -> IntegralResult:
    """Midpoint rule sum_k f((X_{t_k} + X_{t_{k+1}})/2) . dX over P."""
    xv = _restrict_values(X.values, X.partition, P)
    dx = np.diff(xv, axis=0)
    mid = fn.f(0.5 * (xv[:-1] + xv[1:]))
    value = np.einsum("ka,ka->a", mid, dx)
    return IntegralResult(value=value, rule="midpoint", mesh=P.mesh)


def young_integral(fvals: Increment1, gvals: Increment1, P: Partition) -> IntegralResult:
    """Left-point Riemann-Stieltjes sum sum_k f_{t_k} dg over P.

    Componentwise when f and g carry matching extra axes.
    """
    fv = _restrict_values(fvals.values, fvals.partition, P)
    gv = _restrict_values(gvals.values, gvals.partition, P)
    if fv.shape != gv.shape:
        raise ValueError("integrand and integrator must share a shape")
    value = np.sum(fv[:-1] * np.diff(gv, axis=0), axis=0)
    return IntegralResult(value=value, rule="young", mesh=P.mesh)


def decompose_I(cp: ControlledPath, lift: RoughLift, P: Partition):
    """Split the trapezoid sum into (I1, I2, I3, I4) IntegralResults.

    I1 is the compensated sum; I2 and I3 pair the Gubinelli levels with
    half chord products minus the stored iterated integrals; I4 couples the
    remainder r0 to the chords.  The four values add up to the trapezoid
    value exactly on every grid (an algebraic identity, no limit involved).
    """
    if cp.partition != P:
        cp = cp.restrict(P)
    x1, x2, x3 = _cell_data(lift, P)
    y, y1, y2 = cp.y[:-1], cp.y1[:-1], cp.y2[:-1]

    i1 = (
        np.einsum("ka,ka->a", y, x1)
        + np.einsum("kaj,kja->a", y1, x2)
        + np.einsum("kajl,kjla->a", y2, x3)
    )
    y1x1 = np.einsum("kaj,kj->ka", y1, x1)
    i2 = 0.5 * np.einsum("ka,ka->a", y1x1, x1) - np.einsum("kaj,kja->a", y1, x2)
    y2x2 = np.einsum("kajl,kjl->ka", y2, x2)
    i3 = 0.5 * np.einsum("ka,ka->a", y2x2, x1) - np.einsum("kajl,kjla->a", y2, x3)
    r0 = np.diff(cp.y, axis=0) - y1x1 - y2x2
    i4 = 0.5 * np.einsum("ka,ka->a", r0, x1)

    mesh = P.mesh
    return (
        IntegralResult(i1, "I1", mesh),
        IntegralResult(i2, "I2", mesh),
        IntegralResult(i3, "I3", mesh),
        IntegralResult(i4, "I4", mesh),
    )


def levy_area_pairing(cp: ControlledPath, lift: RoughLift, P: Partition) -> np.ndarray:
    """Alternative form of I2: y1 paired against the antisymmetric part of X2.

    Component a is sum_k sum_j y1[a,j] (X^{2,aj} - X^{2,ja}) / 2; equals I2
    whenever the lift is geometric.
    """
    if cp.partition != P:
        cp = cp.restrict(P)
    _, x2, _ = _cell_data(lift, P)
    anti = 0.5 * (x2 - np.swapaxes(x2, 1, 2))
    return np.einsum("kaj,kaj->a", cp.y1[:-1], anti)


# ---------------------------------------------------------------------------
# Diagnostic statistics: F, g, h and the weighted sums
# ---------------------------------------------------------------------------


def _compensated_level2_cells(lift: RoughLift, model: CovarianceModel, P: Partition) -> np.ndarray:
    """Per-cell dF: X^{2,ij} off the diagonal, X^{2,ii} - sigma^2/2 on it."""
    _, x2, _ = _cell_data(lift, P)
    pts = P.points
    comp = np.array([0.5 * sigma_sq(model, pts[k], pts[k + 1]) for k in range(len(pts) - 1)])
    out = x2.copy()
    idx = np.arange(lift.d)
    out[:, idx, idx] -= comp[:, None]
    return out


def f_process_path(lift: RoughLift, model: CovarianceModel, P: Partition) -> np.ndarray:
    """Cumulative F values at every point of P; F[0] = 0, shape (len(P), d, d)."""
    df = _compensated_level2_cells(lift, model, P)
    return np.concatenate([np.zeros((1, lift.d, lift.d)), np.cumsum(df, axis=0)])


def f_process(lift: RoughLift, model: CovarianceModel, P: Partition, t: float) -> np.ndarray:
    """F at time t: level-2 sums over cells before t, variance-compensated
    on the diagonal."""
    F = f_process_path(lift, model, P)
    return F[P.index_of(t)]


def g_process(lift: RoughLift, P: Partition, s: float, t: float) -> np.ndarray:
    """Level-3 partial sum over cells of P inside [s, t]; shape (d, d, d)."""
    i, j = P.index_of(s), P.index_of(t)
    if i > j:
        raise ValueError("g_process requires s <= t")
    if i == j:
        return np.zeros((lift.d,) * 3)
    _, _, x3 = _cell_data(lift, P)
    return x3[i:j].sum(axis=0)


def h_process(lift: RoughLift, model: CovarianceModel, P: Partition, s: float, t: float) -> np.ndarray:
    """Weighted sums h^{ij,l} = sum_k X^{1,l}_{s t_k} dF^{ij} over [s, t].

    Indexed [i, j, l]; the first summand carries weight X^{1,l}_{ss} = 0.
    """
    i, j = P.index_of(s), P.index_of(t)
    if i > j:
        raise ValueError("h_process requires s <= t")
    if i == j:
        return np.zeros((lift.d,) * 3)
    dF = _compensated_level2_cells(lift, model, P)[i:j]
    idx = subgrid_indices(P, lift.partition)
    weights = lift.s1[idx[i:j]] - lift.s1[idx[i]]  # X^1 from s to each t_k
    return np.einsum("kij,kl->ijl", dF, weights)


def _weight_series(y, P: Partition) -> np.ndarray:
    """Weight values on P from a ControlledPath, an Increment1, or an array.

    Returns shape (len(P),) for scalar weights or (len(P), m) for vector ones.
    """
    if isinstance(y, ControlledPath):
        if y.partition != P:
            y = y.restrict(P)
        w = y.y
    elif isinstance(y, Increment1):
        w = _restrict_values(y.values, y.partition, P)
    else:
        w = np.asarray(y, dtype=float)
    if w.ndim not in (1, 2) or w.shape[0] != len(P):
        raise ValueError("weights must provide one value (or vector) per grid point of P")
    return w


def weighted_F_sum(y, lift: RoughLift, model: CovarianceModel, P: Partition) -> np.ndarray:
    """sum_k y_{t_k} dF_{t_k t_{k+1}} over the cells of P.

    Scalar weights give shape (d, d); vector weights (e.g. a controlled
    path's values) give (m, d, d).
    """
    w = _weight_series(y, P)
    dF = _compensated_level2_cells(lift, model, P)
    if w.ndim == 1:
        return np.einsum("k,kij->ij", w[:-1], dF)
    return np.einsum("ka,kij->aij", w[:-1], dF)


def weighted_X3_sum(y, lift: RoughLift, P: Partition) -> np.ndarray:
    """sum_k (y_{t_k} - y_s) X^3_{t_k t_{k+1}} with s the left end of P."""
    w = _weight_series(y, P)
    _, _, x3 = _cell_data(lift, P)
    if w.ndim == 1:
        return np.einsum("k,kijl->ijl", w[:-1] - w[0], x3)
    return np.einsum("ka,kijl->aijl", w[:-1] - w[:1], x3)


def mixed_X2X1_sum(y, lift: RoughLift, P: Partition) -> np.ndarray:
    """sum_k (y_{t_k} - y_s) X^{2,ij} X^{1,l} over the cells of P."""
    w = _weight_series(y, P)
    x1, x2, _ = _cell_data(lift, P)
    if w.ndim == 1:
        return np.einsum("k,kij,kl->ijl", w[:-1] - w[0], x2, x1)
    return np.einsum("ka,kij,kl->aijl", w[:-1] - w[:1], x2, x1)
