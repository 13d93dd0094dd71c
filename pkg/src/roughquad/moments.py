"""Gaussian moment oracles: Hermite pairing and Isserlis closed forms.

These are the exact values the Monte Carlo estimates are judged against.
The second-moment formulas come from the Isserlis (Wick) theorem, which is
normalization-unambiguous:

    Cov(Z^2, W^2) = 2 Cov(Z, W)^2
    E[Z^3 W^3]    = 6 c^3 + 9 c var(Z) var(W),   c = Cov(Z, W)

The Hermite pairing E[H_n(X) H_n(Y)] = n! rho^n (probabilists' convention)
is cross-validated against 2-d Gauss-Hermite quadrature.  A competing
normalization with a 1/n! factor circulates in the literature; it fails the
quadrature check (0.5 vs 2 already at n=2, rho=1), which is why the
factorial form is the one implemented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import CovarianceModel, increment_gram
from .grids import Partition
from .simulate import MCResult

_HERMITE_MAX = 6


def hermite(n: int, x):
    """Probabilists' Hermite polynomial H_n(x), recurrence H_{n+1} = x H_n - n H_{n-1}.

    Supports 0 <= n <= 6; x may be an array.
    """
    if int(n) != n or not 0 <= n <= _HERMITE_MAX:
        raise ValueError(f"hermite supports integer orders 0..{_HERMITE_MAX}, got {n}")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = x.copy()
    for k in range(1, n):
        h, h_prev = x * h - k * h_prev, h
    return h if h.ndim else float(h)


def hermite_pairing(n: int, rho: float) -> float:
    """E[H_n(X) H_n(Y)] for standard jointly normal X, Y with correlation rho."""
    if abs(rho) > 1:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho}")
    if int(n) != n or not 0 <= n <= _HERMITE_MAX:
        raise ValueError(f"hermite_pairing supports orders 0..{_HERMITE_MAX}, got {n}")
    return math.factorial(n) * rho**n


def hermite_pairing_quadrature(n: int, rho: float, nodes: int = 64) -> float:
    """Quadrature oracle for the Hermite pairing.

    Integrates H_n(x) H_n(y) over the correlated standard bivariate normal,
    realized as y = rho x + sqrt(1 - rho^2) z with independent x, z, on a
    tensor Gauss-Hermite grid (probabilists' weight).
    """
    if abs(rho) > 1:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho}")
    x, wx = np.polynomial.hermite_e.hermegauss(nodes)
    z, wz = np.polynomial.hermite_e.hermegauss(nodes)
    xx = x[:, None]
    yy = rho * xx + math.sqrt(max(0.0, 1 - rho**2)) * z[None, :]
    vals = hermite(n, xx) * hermite(n, yy)
    total = float(np.einsum("i,j,ij->", wx, wz, vals))
    return total / (2 * math.pi)


@dataclass(frozen=True)
class MomentReport:
    """Analytic value against its Monte Carlo estimate."""

    statistic: str
    analytic: float
    mc_mean: float
    mc_stderr: float
    n_samples: int

    @property
    def verdict(self) -> bool:
        return abs(self.analytic - self.mc_mean) <= 3.0 * self.mc_stderr

    @staticmethod
    def from_mc(statistic: str, analytic: float, mc: MCResult) -> "MomentReport":
        return MomentReport(
            statistic=statistic,
            analytic=float(analytic),
            mc_mean=mc.mean,
            mc_stderr=mc.stderr,
            n_samples=mc.n,
        )


def isserlis_second_moment_F_diag(model: CovarianceModel, P: Partition) -> float:
    """Exact E[(F^{ii}_T)^2] for the compensated diagonal level-2 sums.

    F^{ii}_T = sum_k (dX_k^2 - sigma_k^2) / 2, so by Isserlis the second
    moment is half the squared Frobenius norm of the increment Gram matrix.
    """
    G = increment_gram(model, P)
    return 0.5 * float(np.sum(G**2))


def isserlis_second_moment_g_diag(model: CovarianceModel, P: Partition) -> float:
    """Exact E[(g^{iii}_{0T})^2] for the level-3 diagonal sums.

    g = sum_k dX_k^3 / 6 and E[Z^3 W^3] = 6 c^3 + 9 c var var.
    """
    G = increment_gram(model, P)
    var = np.diag(G)
    cross = 6.0 * G**3 + 9.0 * G * np.multiply.outer(var, var)
    return float(np.sum(cross)) / 36.0


@dataclass(frozen=True)
class StieltjesMoment:
    """2-d Young discretization value with its resolution-doubling check."""

    value: float
    coarse_value: float
    rel_diff: float
    converged: bool


def _left_corner_sum(model: CovarianceModel, P: Partition, ratio: int) -> float:
    """sum over fine cells of R^{[t_k, u] x [t_k', u']} dR at left corners."""
    pts = P.points
    widths = np.diff(pts)
    # global fine grid: `ratio` equal steps inside each coarse cell
    offsets = np.arange(ratio) / ratio
    u = (pts[:-1, None] + widths[:, None] * offsets[None, :]).ravel()
    u = np.append(u, pts[-1])
    anchors = np.repeat(pts[:-1], ratio)  # left coarse endpoint per fine cell

    total = 0.0
    chunk = 1024
    n_fine = len(u) - 1
    for lo in range(0, n_fine, chunk):
        hi = min(lo + chunk, n_fine)
        ua, ca = u[lo:hi, None], anchors[lo:hi, None]
        ub, cb = u[None, :-1], anchors[None, :]
        A = model.cov(ua, ub) - model.cov(ua, cb) - model.cov(ca, ub) + model.cov(ca, cb)
        B = (
            model.cov(u[lo + 1 : hi + 1, None], u[None, 1:])
            - model.cov(u[lo + 1 : hi + 1, None], u[None, :-1])
            - model.cov(ua, u[None, 1:])
            + model.cov(ua, ub)
        )
        total += float(np.sum(A * B))
    return total


def f_offdiag_second_moment_2dyoung(
    model: CovarianceModel, P: Partition, fine_n: int
) -> StieltjesMoment:
    """E[(F^{ij}_T)^2] for i != j via a discretized double Young integral.

    Independence of the components turns the second moment into the sum over
    coarse cell pairs of the integral of the anchored rectangular increment
    R^{[t_k, r] x [t_k', r']} against dR(r, r').  It is discretized with
    left-corner evaluation on a fine refinement (``fine_n`` total intervals,
    a multiple of the coarse count) and the same sum at half resolution
    provides the convergence check; ``converged`` is False when the two
    resolutions differ by more than 1 percent.
    """
    n = P.n_intervals
    if fine_n % (2 * n) != 0 or fine_n < 2 * n:
        raise ValueError("fine_n must be a multiple of 2 * len(P) intervals")
    ratio = fine_n // n
    v_fine = _left_corner_sum(model, P, ratio)
    v_half = _left_corner_sum(model, P, ratio // 2)
    rel = abs(v_fine - v_half) / max(abs(v_fine), 1e-300)
    return StieltjesMoment(
        value=v_fine,
        coarse_value=v_half,
        rel_diff=rel,
        converged=rel <= 0.01,
    )


def brownian_f_offdiag_second_moment(n: int, T: float = 1.0) -> float:
    """Closed form T^2 / (2n) for the off-diagonal F second moment."""
    return T * T / (2 * n)


def brownian_f_diag_second_moment(n: int, T: float = 1.0) -> float:
    """Closed form for uniform Brownian grids: n (T/n)^2 / 2."""
    return 0.5 * n * (T / n) ** 2


def brownian_g_diag_second_moment(n: int, T: float = 1.0) -> float:
    """Closed form 15 T^3 / (36 n^2) for uniform Brownian grids."""
    return 15.0 * T**3 / (36.0 * n * n)
