"""Order-2 controlled paths (y, y1, y2) and smooth integrand machinery.

A path y is controlled by the driver X when its increments admit the
expansion dy = y1 X1 + y2 X2 + r0 with dy1 = y2 X1 + r1 and remainders r0,
r1 decaying faster than the bare increments.  Here controlled paths are
built from C^3 functions of the sampled state, y = f(X_t), y1 = Df(X_t),
y2 = D^2 f(X_t), which keeps the remainders exactly computable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from .grids import Partition, subgrid_indices
from .lift import RoughLift
from .simulate import PathSample


@dataclass(frozen=True)
class SmoothFunction:
    """Evaluators for f: R^d -> R^m and its first three derivatives.

    All evaluators are batched: given points of shape (..., d) they return
    arrays of shape (..., m), (..., m, d), (..., m, d, d), (..., m, d, d, d).
    """

    name: str
    d: int
    m: int
    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]
    d2f: Callable[[np.ndarray], np.ndarray]
    d3f: Callable[[np.ndarray], np.ndarray]


def finite_difference_check(
    fn: SmoothFunction,
    n_points: int = 100,
    eps: float = 1e-5,
    tol: float = 1e-6,
    seed: int = 0,
) -> float:
    """Validate df, d2f, d3f against central differences at random points.

    Errors are relative to max(1, |exact entry|).  Returns the largest
    relative error across the three derivative orders.

    Raises:
        ValueError: if the worst error exceeds ``tol``.
    """
    rng = np.random.default_rng(seed)
    x = rng.normal(scale=1.0, size=(n_points, fn.d))
    worst = 0.0
    for exact_fn, lower_fn in ((fn.df, fn.f), (fn.d2f, fn.df), (fn.d3f, fn.d2f)):
        exact = exact_fn(x)
        approx = np.empty_like(exact)
        for j in range(fn.d):
            step = np.zeros(fn.d)
            step[j] = eps
            approx[..., j] = (lower_fn(x + step) - lower_fn(x - step)) / (2 * eps)
        err = np.abs(approx - exact) / np.maximum(1.0, np.abs(exact))
        worst = max(worst, float(np.max(err)))
    if worst > tol:
        raise ValueError(
            f"finite-difference check failed for {fn.name!r}: max error {worst:.3e}"
        )
    return worst


def tensor_contract(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Contract v into the leading input slots of u.

    ``u`` has shape (m, d, ..., d) with k input slots and ``v`` has shape
    (d, ..., d) with k' <= k slots; the result keeps u's output axis and its
    trailing k - k' input slots.

    Raises:
        ValueError: on rank or dimension mismatch.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    k = u.ndim - 1
    kp = v.ndim
    if kp > k:
        raise ValueError(f"cannot contract a rank-{kp} tensor into {k} input slots")
    if u.shape[1 : 1 + kp] != v.shape:
        raise ValueError(f"slot dimensions {u.shape[1:1 + kp]} != {v.shape}")
    if kp == 0:
        return u * v
    return np.tensordot(u, v, axes=(tuple(range(1, 1 + kp)), tuple(range(kp))))


@dataclass(frozen=True)
class ControlledPath:
    """Grid values of (y, y1, y2): shapes (n+1, m), (n+1, m, d), (n+1, m, d, d)."""

    partition: Partition
    y: np.ndarray = field(repr=False)
    y1: np.ndarray = field(repr=False)
    y2: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = len(self.partition)
        if not (self.y.shape[0] == self.y1.shape[0] == self.y2.shape[0] == n):
            raise ValueError("controlled path levels must cover every grid point")
        m, d = self.y1.shape[1], self.y1.shape[2]
        if self.y.shape != (n, m) or self.y2.shape != (n, m, d, d):
            raise ValueError("inconsistent controlled path level shapes")

    @property
    def m(self) -> int:
        return self.y.shape[1]

    @property
    def d(self) -> int:
        return self.y1.shape[2]

    def restrict(self, coarse: Partition) -> "ControlledPath":
        idx = subgrid_indices(coarse, self.partition)
        return ControlledPath(coarse, self.y[idx], self.y1[idx], self.y2[idx])


def from_function(fn: SmoothFunction, X: PathSample) -> ControlledPath:
    """Controlled path y = f(X_t), y1 = Df(X_t), y2 = D^2 f(X_t)."""
    if fn.d != X.d:
        raise ValueError(f"function expects d={fn.d} but path has d={X.d}")
    x = X.values
    return ControlledPath(X.partition, fn.f(x), fn.df(x), fn.d2f(x))


def remainder_cells(cp: ControlledPath, lift: RoughLift):
    """Remainders (r0, r1) over consecutive cells of cp's partition.

    r0 = dy - y1 X1 - y2 X2 and r1 = dy1 - y2 X1, evaluated per cell;
    shapes (n, m) and (n, m, d).
    """
    idx = subgrid_indices(cp.partition, lift.partition)
    x1, x2, _ = lift.cell_levels(idx)
    dy = np.diff(cp.y, axis=0)
    dy1 = np.diff(cp.y1, axis=0)
    r0 = dy - np.einsum("kaj,kj->ka", cp.y1[:-1], x1) - np.einsum(
        "kajl,kjl->ka", cp.y2[:-1], x2
    )
    r1 = dy1 - np.einsum("kajl,kl->kaj", cp.y2[:-1], x1)
    return r0, r1


_EXACT_ZERO = 1e-14


@dataclass(frozen=True)
class RemainderReport:
    """Max remainder magnitudes per dyadic mesh level with fitted decay.

    ``levels`` rows are (n, mesh, max_r0, max_r1, max_dy, max_dy1).  The
    exponents are least-squares slopes of log max against log mesh; an
    exponent is reported as None with the matching flag set when the
    quantity vanishes identically (the fit would be degenerate).
    """

    levels: list
    r0_exponent: float | None
    r0_r2: float | None
    r1_exponent: float | None
    r1_r2: float | None
    dy_exponent: float | None
    dy1_exponent: float | None
    r0_exact_zero: bool
    r1_exact_zero: bool


def _fit_exponent(meshes: np.ndarray, maxima: np.ndarray, scale: float):
    if np.all(maxima <= _EXACT_ZERO * max(scale, 1.0)):
        return None, None, True
    fit = stats.linregress(np.log(meshes), np.log(np.maximum(maxima, 1e-300)))
    return float(fit.slope), float(fit.rvalue**2), False


def remainder_report(cp: ControlledPath, lift: RoughLift, n_levels: int = 6) -> RemainderReport:
    """Dyadic-coarsening study of the remainders of a controlled path.

    The controlled path must live on the lift's fine grid; it is restricted
    to dyadic coarsenings (n_fine / 2, n_fine / 4, ...) and the max cell
    remainders are fitted against the mesh.  At least 5 levels are kept
    whenever the fine grid allows it.
    """
    fine_n = cp.partition.n_intervals
    strides = [2**k for k in range(1, n_levels + 1) if fine_n % 2**k == 0 and fine_n // 2**k >= 2]
    if len(strides) < 3:
        raise ValueError("fine grid too small for a dyadic remainder study")
    rows = []
    for stride in strides:
        idx = np.arange(0, fine_n + 1, stride)
        sub = Partition(cp.partition.points[idx])
        sub_cp = ControlledPath(sub, cp.y[idx], cp.y1[idx], cp.y2[idx])
        r0, r1 = remainder_cells(sub_cp, lift)
        rows.append(
            (
                sub.n_intervals,
                sub.mesh,
                float(np.max(np.abs(r0))),
                float(np.max(np.abs(r1))),
                float(np.max(np.abs(np.diff(sub_cp.y, axis=0)))),
                float(np.max(np.abs(np.diff(sub_cp.y1, axis=0)))),
            )
        )
    meshes = np.array([r[1] for r in rows])
    y_scale = float(np.max(np.abs(cp.y)))
    r0_exp, r0_r2, r0_zero = _fit_exponent(meshes, np.array([r[2] for r in rows]), y_scale)
    r1_exp, r1_r2, r1_zero = _fit_exponent(meshes, np.array([r[3] for r in rows]), y_scale)
    dy_exp, _, _ = _fit_exponent(meshes, np.array([r[4] for r in rows]), y_scale)
    dy1_exp, _, _ = _fit_exponent(meshes, np.array([r[5] for r in rows]), y_scale)
    return RemainderReport(
        levels=rows,
        r0_exponent=r0_exp,
        r0_r2=r0_r2,
        r1_exponent=r1_exp,
        r1_r2=r1_r2,
        dy_exponent=dy_exp,
        dy1_exponent=dy1_exp,
        r0_exact_zero=r0_zero,
        r1_exact_zero=r1_zero,
    )
