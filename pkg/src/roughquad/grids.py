"""Time partitions and the discrete increment calculus.

Partitions are strictly increasing grids 0 = t_0 < ... < t_n = T.  One- and
two-parameter increments live on grid points and on the discrete simplex
{(t_i, t_j) : i < j} respectively.  The delta operator, p-variation, Holder
seminorms and the superadditivity check for control functions all operate on
these grid-restricted objects; the continuum suprema they approximate are
lower-bounded by the grid values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import GridLookupError

#: Absolute tolerance used when matching a time to a grid point.
TIME_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Partition:
    """Strictly increasing time grid on [0, T], starting at exactly 0."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("partition needs at least 2 points on one axis")
        if pts[0] != 0.0:
            raise ValueError("partition must start at t=0")
        if not np.all(np.diff(pts) > 0):
            raise ValueError("partition points must be strictly increasing")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def T(self) -> float:
        return float(self.points[-1])

    @property
    def n_intervals(self) -> int:
        return len(self.points) - 1

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.points)))

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and np.array_equal(
            self.points, other.points
        )

    def index_of(self, t: float, tol: float = TIME_TOL) -> int:
        """Index of the grid point equal to ``t`` (within ``tol``)."""
        j = int(np.searchsorted(self.points, t))
        for c in (j, j - 1):
            if 0 <= c < len(self.points) and abs(self.points[c] - t) <= tol:
                return c
        raise GridLookupError(f"time {t!r} is not a grid point")

    def indices_of(self, ts: Sequence[float], tol: float = TIME_TOL) -> np.ndarray:
        return np.array([self.index_of(t, tol) for t in np.asarray(ts, dtype=float)])


def make_uniform_partition(T: float, n: int) -> Partition:
    """Uniform grid of ``n`` intervals on [0, T] (n+1 points, mesh T/n)."""
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    if int(n) != n or n < 1:
        raise ValueError(f"interval count must be a positive integer, got {n}")
    return Partition(np.linspace(0.0, float(T), int(n) + 1))


def subgrid_indices(coarse: Partition, fine: Partition, tol: float = TIME_TOL) -> np.ndarray:
    """Indices of the coarse points inside the fine grid.

    Raises:
        GridLookupError: if some coarse point is missing from the fine grid.
    """
    return fine.indices_of(coarse.points, tol)


@dataclass(frozen=True)
class Increment1:
    """One-parameter family: a value (scalar or array) at every grid point."""

    partition: Partition
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape[0] != len(self.partition):
            raise ValueError("values must carry one entry per grid point")
        object.__setattr__(self, "values", vals)

    def at(self, t: float) -> np.ndarray:
        return self.values[self.partition.index_of(t)]


@dataclass(frozen=True)
class Increment2:
    """Two-parameter family h_{st} on the discrete simplex of a partition.

    Stored densely with the first two axes indexing (i, j); entries with
    i >= j are unused.
    """

    partition: Partition
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        n = len(self.partition)
        if vals.shape[:2] != (n, n):
            raise ValueError("values must be indexed by a full grid-pair square")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, partition: Partition, fn: Callable[[float, float], float]) -> "Increment2":
        n = len(partition)
        probe = np.asarray(fn(partition.points[0], partition.points[-1]), dtype=float)
        vals = np.zeros((n, n) + probe.shape)
        for i in range(n):
            for j in range(i + 1, n):
                vals[i, j] = fn(partition.points[i], partition.points[j])
        return cls(partition, vals)

    def at(self, s: float, t: float) -> np.ndarray:
        i = self.partition.index_of(s)
        j = self.partition.index_of(t)
        if i >= j:
            raise ValueError("Increment2 is defined for s < t only")
        return self.values[i, j]


def delta1(g: Increment1, s: float, t: float) -> np.ndarray:
    """First-order increment g_t - g_s over grid points."""
    i = g.partition.index_of(s)
    j = g.partition.index_of(t)
    return g.values[j] - g.values[i]


def delta2(h: Increment2, s: float, u: float, t: float) -> np.ndarray:
    """Second-order coboundary h_{st} - h_{su} - h_{ut} for s < u < t."""
    if not (s < u < t):
        raise ValueError("delta2 requires s < u < t")
    i = h.partition.index_of(s)
    j = h.partition.index_of(u)
    k = h.partition.index_of(t)
    return h.values[i, k] - h.values[i, j] - h.values[j, k]


def increment_of_path(g: Increment1) -> Increment2:
    """The Increment2 given by h_{st} = g_t - g_s (a delta1 coboundary)."""
    n = len(g.partition)
    vals = g.values[None, ...] - g.values[:, None, ...]
    lower = np.tril(np.ones((n, n), dtype=bool)).reshape((n, n) + (1,) * (vals.ndim - 2))
    vals = np.where(lower, 0.0, vals)
    return Increment2(g.partition, vals)


def _magnitudes(h: Increment2) -> np.ndarray:
    """|h_{ij}| per grid pair; Frobenius norm for tensor-valued increments."""
    vals = h.values
    if vals.ndim == 2:
        return np.abs(vals)
    return np.sqrt(np.sum(vals**2, axis=tuple(range(2, vals.ndim))))


def p_variation(h: Increment2, p: float) -> float:
    """Exact p-variation of h over sub-partitions of its grid.

    The supremum ranges over all subsequences of the grid that keep both
    endpoints; it is computed by dynamic programming in O(n^2).  The result
    is a lower bound of the continuum p-variation.

    Raises:
        ValueError: if p < 1.
    """
    if p < 1:
        raise ValueError(f"p-variation requires p >= 1, got {p}")
    mags = _magnitudes(h) ** p
    n = len(h.partition) - 1
    best = np.full(n + 1, -np.inf)
    best[0] = 0.0
    for j in range(1, n + 1):
        best[j] = np.max(best[:j] + mags[:j, j])
    return float(best[n] ** (1.0 / p))


def holder_norm(h: Increment2, gamma: float) -> float:
    """max |h_{st}| / (t-s)^gamma over all grid pairs s < t."""
    if not gamma > 0:
        raise ValueError(f"Holder exponent must be positive, got {gamma}")
    pts = h.partition.points
    gaps = pts[None, :] - pts[:, None]
    mags = _magnitudes(h)
    iu = np.triu_indices(len(pts), k=1)
    return float(np.max(mags[iu] / gaps[iu] ** gamma, initial=0.0))


@dataclass(frozen=True)
class SuperadditivityReport:
    """Outcome of a grid superadditivity check for a candidate control."""

    ok: bool
    max_violation: float
    worst: tuple

    def __bool__(self) -> bool:
        return self.ok


def check_superadditive(
    w: Callable[[float, float], float],
    P: Partition,
    tol: float = 1e-10,
) -> SuperadditivityReport:
    """Check w(s,u) + w(u,t) <= w(s,t) (1 + tol) on all grid triples.

    Returns a report carrying the worst relative violation
    (w(s,u)+w(u,t)-w(s,t)) / max(|w(s,t)|, tiny) and the triple attaining it.
    """
    pts = P.points
    n = len(pts)
    W = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            W[i, j] = w(pts[i], pts[j])
    worst = (-np.inf, (0, 0, 0))
    for j in range(1, n - 1):
        # all (i, j, k) with i < j < k at once
        excess = W[:j, j, None] + W[None, j, j + 1:] - W[:j, j + 1:]
        rel = excess / np.maximum(np.abs(W[:j, j + 1:]), 1e-300)
        idx = np.unravel_index(np.argmax(rel), rel.shape)
        if rel[idx] > worst[0]:
            worst = (float(rel[idx]), (idx[0], j, idx[1] + j + 1))
    i, j, k = worst[1]
    return SuperadditivityReport(
        ok=worst[0] <= tol,
        max_violation=worst[0],
        worst=(float(pts[i]), float(pts[j]), float(pts[k])),
    )


def check_superadditive_2d(
    w: Callable[[float, float, float, float], float],
    P: Partition,
    Q: Partition,
    tol: float = 1e-10,
) -> SuperadditivityReport:
    """Rectangle variant: splitting [s,t]x[u,v] along either axis must not
    increase w.  ``w`` takes (s, t, u, v)."""
    p, q = P.points, Q.points
    np_, nq = len(p), len(q)
    W = np.zeros((np_, np_, nq, nq))
    for i in range(np_):
        for j in range(i, np_):
            for k in range(nq):
                for l in range(k, nq):
                    W[i, j, k, l] = w(p[i], p[j], q[k], q[l])
    worst = (-np.inf, (0.0, 0.0, 0.0, 0.0, 0.0))
    for i in range(np_):
        for j in range(i + 2, np_):
            for mid in range(i + 1, j):
                for k in range(nq):
                    for l in range(k + 1, nq):
                        excess = W[i, mid, k, l] + W[mid, j, k, l] - W[i, j, k, l]
                        rel = excess / max(abs(W[i, j, k, l]), 1e-300)
                        if rel > worst[0]:
                            worst = (rel, (p[i], p[j], q[k], q[l], p[mid]))
    for k in range(nq):
        for l in range(k + 2, nq):
            for mid in range(k + 1, l):
                for i in range(np_):
                    for j in range(i + 1, np_):
                        excess = W[i, j, k, mid] + W[i, j, mid, l] - W[i, j, k, l]
                        rel = excess / max(abs(W[i, j, k, l]), 1e-300)
                        if rel > worst[0]:
                            worst = (rel, (p[i], p[j], q[k], q[l], q[mid]))
    return SuperadditivityReport(ok=worst[0] <= tol, max_violation=float(worst[0]), worst=worst[1])
