"""Geometric lift of a sampled path: levels X1, X2, X3 over grid intervals.

The path is interpreted as its piecewise-linear interpolation on the fine
grid.  Each chord contributes the exact iterated integrals of a straight
segment (v, v@v/2, v@v@v/6) and adjacent intervals are glued with Chen's
relation.  Prefix signatures from time 0 are stored at every grid point, so
the levels over any grid interval [s, t] come out of the truncated tensor
group identity X_{st} = X_{0s}^{-1} x X_{0t} in O(1) per query.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from itertools import product
from typing import NamedTuple

import numpy as np

from .grids import Partition
from .simulate import PathSample


class LiftLevels(NamedTuple):
    """Levels (X1, X2, X3) over one interval; shapes (d,), (d,d), (d,d,d)."""

    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray


def zero_levels(d: int) -> LiftLevels:
    return LiftLevels(np.zeros(d), np.zeros((d, d)), np.zeros((d, d, d)))


def lift_segment(v: np.ndarray) -> LiftLevels:
    """Iterated integrals of a single linear chord with increment v."""
    v = np.asarray(v, dtype=float)
    x2 = 0.5 * np.multiply.outer(v, v)
    x3 = np.multiply.outer(v, np.multiply.outer(v, v)) / 6.0
    return LiftLevels(v.copy(), x2, x3)


def chen_combine(a: LiftLevels, b: LiftLevels) -> LiftLevels:
    """Glue levels over [s,u] and [u,t] into levels over [s,t]."""
    x1 = a.x1 + b.x1
    x2 = a.x2 + b.x2 + np.multiply.outer(a.x1, b.x1)
    x3 = (
        a.x3
        + b.x3
        + np.multiply.outer(a.x2, b.x1)
        + np.multiply.outer(a.x1, b.x2)
    )
    return LiftLevels(x1, x2, x3)


@dataclass(frozen=True)
class RoughLift:
    """Prefix signature table of a piecewise-linear path on a fine grid."""

    partition: Partition
    s1: np.ndarray = field(repr=False)  # (N+1, d)
    s2: np.ndarray = field(repr=False)  # (N+1, d, d)
    s3: np.ndarray = field(repr=False)  # (N+1, d, d, d)

    @property
    def d(self) -> int:
        return self.s1.shape[1]

    @classmethod
    def from_values(cls, partition: Partition, values: np.ndarray) -> "RoughLift":
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] != len(partition):
            raise ValueError("one path value per grid point required")
        n, d = values.shape[0] - 1, values.shape[1]
        v = np.diff(values, axis=0)  # chord increments, (n, d)
        x2c = 0.5 * np.einsum("ki,kj->kij", v, v)
        x3c = np.einsum("ki,kjl->kijl", v, x2c) / 3.0  # v x (v x v)/2 / 3 = vvv/6

        s1 = np.vstack([np.zeros((1, d)), np.cumsum(v, axis=0)])
        p1 = s1[:-1]  # prefix at the left endpoint of each interval
        t2 = x2c + np.einsum("ki,kj->kij", p1, v)
        s2 = np.concatenate([np.zeros((1, d, d)), np.cumsum(t2, axis=0)])
        p2 = s2[:-1]
        t3 = x3c + np.einsum("kij,kl->kijl", p2, v) + np.einsum("ki,kjl->kijl", p1, x2c)
        s3 = np.concatenate([np.zeros((1, d, d, d)), np.cumsum(t3, axis=0)])
        for arr in (s1, s2, s3):
            arr.flags.writeable = False
        return cls(partition=partition, s1=s1, s2=s2, s3=s3)

    @classmethod
    def from_path(cls, path: PathSample) -> "RoughLift":
        return cls.from_values(path.partition, path.values)

    # -- interval queries ---------------------------------------------------

    def batch_levels(self, start: np.ndarray, end: np.ndarray):
        """Levels over [t_start[k], t_end[k]] for index arrays start <= end.

        Returns arrays of shape (K, d), (K, d, d), (K, d, d, d).
        """
        start = np.asarray(start, dtype=int)
        end = np.asarray(end, dtype=int)
        if np.any(start > end):
            raise ValueError("interval start indices must not exceed end indices")
        a1, b1 = self.s1[start], self.s1[end]
        x1 = b1 - a1
        x2 = self.s2[end] - self.s2[start] - np.einsum("ki,kj->kij", a1, x1)
        x3 = (
            self.s3[end]
            - self.s3[start]
            - np.einsum("kij,kl->kijl", self.s2[start], x1)
            - np.einsum("ki,kjl->kijl", a1, x2)
        )
        return x1, x2, x3

    def levels(self, i: int, j: int) -> LiftLevels:
        """Levels over the grid interval [t_i, t_j] by index."""
        x1, x2, x3 = self.batch_levels(np.array([i]), np.array([j]))
        return LiftLevels(x1[0], x2[0], x3[0])

    def cell_levels(self, indices: np.ndarray):
        """Levels over consecutive cells of the sub-grid given by indices."""
        return self.batch_levels(indices[:-1], indices[1:])

    def to_csv(self, path) -> None:
        """Per-fine-cell levels; supported for d <= 3."""
        d = self.d
        if d > 3:
            raise ValueError("CSV export supports d <= 3")
        idx = np.arange(len(self.partition))
        x1, x2, x3 = self.cell_levels(idx)
        header = (
            ["s", "t"]
            + [f"x1_{i + 1}" for i in range(d)]
            + [f"x2_{i + 1}{j + 1}" for i, j in product(range(d), repeat=2)]
            + [f"x3_{i + 1}{j + 1}{k + 1}" for i, j, k in product(range(d), repeat=3)]
        )
        pts = self.partition.points
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for k in range(len(pts) - 1):
                row = [pts[k], pts[k + 1]]
                row.extend(x1[k])
                row.extend(x2[k].ravel())
                row.extend(x3[k].ravel())
                writer.writerow([format(v, ".17g") for v in row])


def signature(lift: RoughLift, s: float, t: float) -> LiftLevels:
    """Levels of the lift over [s, t]; both must be fine-grid points.

    Returns zero levels when s equals t.

    Raises:
        GridLookupError: if s or t is off the fine grid.
        ValueError: if t < s.
    """
    i = lift.partition.index_of(s)
    j = lift.partition.index_of(t)
    if i == j:
        return zero_levels(lift.d)
    if i > j:
        raise ValueError("signature requires s <= t")
    return lift.levels(i, j)


@dataclass(frozen=True)
class LiftCheckReport:
    """Worst violations of the defining identities, relative to term scale."""

    max_chen2: float
    max_chen3: float
    max_sym: float
    max_diag2: float
    max_diag3: float
    n_checks: int
    tol: float

    @property
    def max_violation(self) -> float:
        return max(self.max_chen2, self.max_chen3, self.max_sym, self.max_diag2, self.max_diag3)

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol


def verify_lift(lift: RoughLift, tol: float = 1e-12, n_checks: int = 100, seed: int = 0) -> LiftCheckReport:
    """Spot-check Chen multiplicativity and geometricity on random triples.

    Draws ``n_checks`` random grid triples i < j < k (and uses the (i, k)
    pairs for the symmetry identities); violations are normalized by the
    magnitude of the terms entering each identity.
    """
    rng = np.random.default_rng(seed)
    n = len(lift.partition) - 1
    if n < 2:
        raise ValueError("need at least two intervals to test Chen's relation")
    trip = np.sort(
        np.array([rng.choice(n + 1, size=3, replace=False) for _ in range(n_checks)]),
        axis=1,
    )
    i, j, k = trip[:, 0], trip[:, 1], trip[:, 2]
    a1, a2, a3 = lift.batch_levels(i, j)
    b1, b2, b3 = lift.batch_levels(j, k)
    c1, c2, c3 = lift.batch_levels(i, k)

    def rel(err, *terms):
        scale = 1.0 + max(float(np.max(np.abs(t))) for t in terms)
        return float(np.max(np.abs(err))) / scale

    chen2 = c2 - a2 - b2 - np.einsum("ki,kj->kij", a1, b1)
    chen3 = (
        c3
        - a3
        - b3
        - np.einsum("kij,kl->kijl", a2, b1)
        - np.einsum("ki,kjl->kijl", a1, b2)
    )
    max_chen2 = rel(chen2, c2, a2, b2)
    max_chen3 = rel(chen3, c3, a3, b3)

    sym = 0.5 * (c2 + np.swapaxes(c2, 1, 2)) - 0.5 * np.einsum("ki,kj->kij", c1, c1)
    max_sym = rel(sym, c2)
    diag2 = np.einsum("kii->ki", c2) - 0.5 * c1**2
    max_diag2 = rel(diag2, c2)
    diag3 = np.einsum("kiii->ki", c3) - c1**3 / 6.0
    max_diag3 = rel(diag3, c3)

    return LiftCheckReport(
        max_chen2=max_chen2,
        max_chen3=max_chen3,
        max_sym=max_sym,
        max_diag2=max_diag2,
        max_diag3=max_diag3,
        n_checks=n_checks,
        tol=tol,
    )
