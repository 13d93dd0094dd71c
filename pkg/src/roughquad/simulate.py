"""Exact sampling of Gaussian paths with i.i.d. components, plus a seeded
Monte Carlo driver.

Two samplers produce the same law: a general route that factorizes the
increment Gram matrix, and a circulant-embedding fast path (O(n log n)) for
fBm on uniform grids.  Seeds are expanded with ``numpy.random.SeedSequence``
so that every (sample index, component) pair gets an independent stream and
results do not depend on evaluation order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .covariance import CovarianceModel, increment_gram
from .errors import SimulationError
from .grids import Partition

_JITTER_TOL = 1e-10  # relative eigenvalue deficit fixable by jitter
_JITTER = 1e-12  # relative diagonal boost applied once


@dataclass(frozen=True)
class PathSample:
    """One d-component Gaussian path sampled on a partition.

    values[k] is the state at partition.points[k]; values[0] is zero.
    """

    partition: Partition
    values: np.ndarray = field(repr=False)
    model: CovarianceModel
    seed: int

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def component(self, i: int) -> np.ndarray:
        return self.values[:, i]

    def to_csv(self, path) -> None:
        """Write columns time, x1..xd."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time"] + [f"x{i + 1}" for i in range(self.d)])
            for t, row in zip(self.partition.points, self.values):
                writer.writerow([format(t, ".17g")] + [format(v, ".17g") for v in row])


def _component_rng(seed: int, component: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(component)]))


def _factor_gram(G: np.ndarray) -> np.ndarray:
    """Lower-triangular (or symmetric) factor L with L L^T = G.

    Applies a one-shot diagonal jitter for eigenvalue deficits within
    _JITTER_TOL * trace; anything worse is a hard error.
    """
    try:
        return np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        pass
    trace = float(np.trace(G))
    w_min = float(np.linalg.eigvalsh(G)[0])
    if w_min <= -_JITTER_TOL * trace:
        raise SimulationError(
            f"increment Gram matrix is not PSD (min eigenvalue {w_min:.3e}, "
            f"trace {trace:.3e}); refusing to sample"
        )
    # one-shot diagonal jitter sized to clear the (tiny) deficit
    bump = _JITTER * trace + max(0.0, -w_min)
    G = G + bump * np.eye(G.shape[0])
    try:
        return np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise SimulationError("factorization failed after jitter") from exc


def _is_uniform(P: Partition) -> bool:
    steps = np.diff(P.points)
    return bool(np.all(np.abs(steps - steps[0]) <= 1e-12 * max(steps[0], 1.0)))


def _fgn_eigenvalues(H: float, n: int, dt: float) -> np.ndarray:
    """Circulant eigenvalues for fractional Gaussian noise of length n."""
    k = np.arange(n + 1, dtype=float)
    gamma = 0.5 * dt ** (2 * H) * (
        (k + 1) ** (2 * H) - 2 * k ** (2 * H) + np.abs(k - 1) ** (2 * H)
    )
    c = np.concatenate([gamma, gamma[-2:0:-1]])  # length 2n
    lam = np.fft.fft(c).real
    floor = -1e-10 * float(np.max(lam))
    if np.any(lam < floor):
        raise SimulationError(
            f"circulant embedding produced negative eigenvalues for H={H}, n={n}"
        )
    return np.clip(lam, 0.0, None)


class _GramSampler:
    """Draws increment vectors via a cached Gram factor."""

    def __init__(self, model: CovarianceModel, P: Partition):
        self.L = _factor_gram(increment_gram(model, P))

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal(self.L.shape[0])
        return self.L @ z


class _CirculantSampler:
    """Davies-Harte sampler for fBm increments on a uniform grid."""

    def __init__(self, model: CovarianceModel, P: Partition):
        (H,) = model.params
        n = P.n_intervals
        self.n = n
        self.lam = _fgn_eigenvalues(H, n, P.mesh)

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        n = self.n
        m = 2 * n
        z = rng.standard_normal(m)
        A = np.zeros(m, dtype=complex)
        A[0] = np.sqrt(self.lam[0]) * z[0]
        A[n] = np.sqrt(self.lam[n]) * z[1]
        half = np.sqrt(self.lam[1:n] / 2.0)
        A[1:n] = half * (z[2 : n + 1] + 1j * z[n + 1 :])
        A[n + 1 :] = np.conj(A[n - 1 : 0 : -1])
        return (np.fft.fft(A) / np.sqrt(m)).real[:n]


def _make_sampler(model: CovarianceModel, P: Partition, method: str):
    if method == "auto":
        method = "circulant" if model.kind == "fbm" and _is_uniform(P) else "gram"
    if method == "circulant":
        if model.kind != "fbm" or not _is_uniform(P):
            raise SimulationError("circulant sampling requires fBm on a uniform grid")
        return _CirculantSampler(model, P)
    if method == "gram":
        return _GramSampler(model, P)
    raise ValueError(f"unknown sampling method {method!r}")


def sample_path(
    model: CovarianceModel,
    P: Partition,
    d: int,
    seed: int,
    method: str = "auto",
) -> PathSample:
    """Draw one d-component path; components use independent streams.

    Args:
        method: "gram" (factorized increment covariance, any model),
            "circulant" (fBm on uniform grids only), or "auto".

    Raises:
        SimulationError: when the increment covariance cannot be factorized.
    """
    if d < 1:
        raise ValueError(f"need at least one component, got d={d}")
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    sampler = _make_sampler(model, P, method)
    increments = np.empty((P.n_intervals, d))
    for comp in range(d):
        increments[:, comp] = sampler.draw(_component_rng(seed, comp))
    values = np.vstack([np.zeros((1, d)), np.cumsum(increments, axis=0)])
    return PathSample(partition=P, values=values, model=model, seed=int(seed))


class MCResult(NamedTuple):
    mean: float
    stderr: float
    n: int


def derive_sample_seed(base_seed: int, index: int) -> int:
    """Deterministic per-sample seed, independent of evaluation order."""
    state = np.random.SeedSequence([int(base_seed), int(index)]).generate_state(1, np.uint64)
    return int(state[0])


def mc_run(
    stat: Callable[[PathSample], float],
    n_samples: int,
    base_seed: int,
    *,
    model: CovarianceModel,
    P: Partition,
    d: int = 1,
    method: str = "auto",
) -> MCResult:
    """Monte Carlo mean and standard error of a path statistic.

    Sample i uses a seed derived from (base_seed, i), so the result is
    reproducible regardless of scheduling; the reduction is indexed and
    deterministic.

    Raises:
        SimulationError: if the statistic returns a non-finite value
            (the failing sample index is reported).
    """
    if n_samples < 2:
        raise ValueError("mc_run needs n_samples >= 2")
    sampler = _make_sampler(model, P, method)
    n_inc = P.n_intervals
    vals = np.empty(n_samples)
    for i in range(n_samples):
        seed_i = derive_sample_seed(base_seed, i)
        increments = np.empty((n_inc, d))
        for comp in range(d):
            increments[:, comp] = sampler.draw(_component_rng(seed_i, comp))
        values = np.vstack([np.zeros((1, d)), np.cumsum(increments, axis=0)])
        ps = PathSample(partition=P, values=values, model=model, seed=seed_i)
        v = float(stat(ps))
        if not np.isfinite(v):
            raise SimulationError(f"statistic returned non-finite value at sample {i}")
        vals[i] = v
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / np.sqrt(n_samples))
    return MCResult(mean=mean, stderr=stderr, n=n_samples)
