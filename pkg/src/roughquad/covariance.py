"""Covariance catalog for the Gaussian drivers and the 2-d rho-variation.

Three model families are supported, all centered with X_0 = 0:

* ``fbm(H)``          R(s,t) = (t^2H + s^2H - |t-s|^2H) / 2
* ``bifractional(H,K)``  R(s,t) = 2^-K ((t^2H + s^2H)^K - |t-s|^2HK)
* ``fbm_sum(H1,H2)``  sum of two independent fBm covariances

Rectangular increments R^{st}_{uv} are the mixed second differences of R and
equal E[(X_t - X_s)(X_v - X_u)].  The 2-d rho-variation is computed exactly
over sub-partitions of small grids and by alternating dynamic programming
beyond that (a documented lower bound of the grid supremum).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ModelInvalidError
from .grids import Partition

_NEG_SIGMA_TOL = 1e-12
#: Eigenvalue floor (relative to trace) accepted for increment Gram matrices.
PSD_TOL = 1e-10

# grids with more interior points than this on their thinner axis fall back
# from exhaustive subset enumeration to alternating DP
_EXHAUSTIVE_CAP = 11


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle [s,t] x [u,v] in the (time, time) plane."""

    s: float
    t: float
    u: float
    v: float

    def __post_init__(self):
        if self.t < self.s or self.v < self.u:
            raise ValueError("rectangle sides must satisfy s <= t and u <= v")

    @property
    def degenerate(self) -> bool:
        return self.t == self.s or self.v == self.u


@dataclass(frozen=True)
class CovarianceModel:
    """Descriptor of a covariance function R(s,t) from the model catalog.

    Use the ``fbm`` / ``bifractional`` / ``fbm_sum`` constructors rather than
    instantiating directly.  ``allow_low_hurst`` relaxes the H > 1/4
    requirement for exploratory runs; results are then outside the toolkit's
    rough-path guarantees.
    """

    kind: str
    params: tuple
    allow_low_hurst: bool = False

    def __post_init__(self):
        if self.kind == "fbm":
            (H,) = self.params
            if not 0 < H < 1:
                raise ModelInvalidError(f"fbm requires 0 < H < 1, got {H}")
            if H <= 0.25 and not self.allow_low_hurst:
                raise ModelInvalidError(
                    f"fbm with H={H} <= 1/4 is outside the supported range; "
                    "pass allow_low_hurst=True to override"
                )
        elif self.kind == "bifractional":
            H, K = self.params
            if not 0 < H < 1:
                raise ModelInvalidError(f"bifractional requires 0 < H < 1, got {H}")
            if not 0 < K <= 1:
                raise ModelInvalidError(f"bifractional requires 0 < K <= 1, got {K}")
            if not (0.25 < H * K < 1) and not self.allow_low_hurst:
                raise ModelInvalidError(
                    f"bifractional requires HK in (1/4, 1), got HK={H * K}"
                )
        elif self.kind == "fbm_sum":
            for H in self.params:
                if not 0 < H < 1:
                    raise ModelInvalidError(f"fbm_sum requires 0 < H < 1, got {H}")
                if H <= 0.25 and not self.allow_low_hurst:
                    raise ModelInvalidError(
                        f"fbm_sum requires both H in (1/4, 1), got {H}"
                    )
        else:
            raise ModelInvalidError(f"unknown covariance kind {self.kind!r}")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def fbm(H: float, allow_low_hurst: bool = False) -> "CovarianceModel":
        return CovarianceModel("fbm", (float(H),), allow_low_hurst)

    @staticmethod
    def bifractional(H: float, K: float, allow_low_hurst: bool = False) -> "CovarianceModel":
        return CovarianceModel("bifractional", (float(H), float(K)), allow_low_hurst)

    @staticmethod
    def fbm_sum(H1: float, H2: float, allow_low_hurst: bool = False) -> "CovarianceModel":
        return CovarianceModel("fbm_sum", (float(H1), float(H2)), allow_low_hurst)

    # -- evaluation ---------------------------------------------------------

    def cov(self, s, t):
        """R(s, t), vectorized over numpy broadcasting of s and t."""
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        if self.kind == "fbm":
            (H,) = self.params
            return 0.5 * (t ** (2 * H) + s ** (2 * H) - np.abs(t - s) ** (2 * H))
        if self.kind == "bifractional":
            H, K = self.params
            return 2.0 ** (-K) * (
                (t ** (2 * H) + s ** (2 * H)) ** K - np.abs(t - s) ** (2 * H * K)
            )
        H1, H2 = self.params
        return CovarianceModel.fbm(H1, True).cov(s, t) + CovarianceModel.fbm(H2, True).cov(s, t)

    @property
    def rho(self) -> float:
        """Finite 2-d variation exponent associated with the model.

        1/(2H) for fbm with H <= 1/2 and 1 otherwise; the bifractional
        analogue uses HK, and a sum of fBms inherits the rougher component.
        """
        if self.kind == "fbm":
            (H,) = self.params
            return 1.0 / (2 * H) if H <= 0.5 else 1.0
        if self.kind == "bifractional":
            H, K = self.params
            hk = H * K
            return 1.0 / (2 * hk) if hk <= 0.5 else 1.0
        H = min(self.params)
        return 1.0 / (2 * H) if H <= 0.5 else 1.0

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_dict(self) -> dict:
        if self.kind == "fbm":
            d = {"kind": "fbm", "H": self.params[0]}
        elif self.kind == "bifractional":
            d = {"kind": "bifractional", "H": self.params[0], "K": self.params[1]}
        else:
            d = {"kind": "fbm_sum", "H1": self.params[0], "H2": self.params[1]}
        if self.allow_low_hurst:
            d["allow_low_hurst"] = True
        return d

    @staticmethod
    def from_dict(d: dict) -> "CovarianceModel":
        kind = d.get("kind")
        low = bool(d.get("allow_low_hurst", False))
        try:
            if kind == "fbm":
                return CovarianceModel.fbm(d["H"], low)
            if kind == "bifractional":
                return CovarianceModel.bifractional(d["H"], d["K"], low)
            if kind == "fbm_sum":
                return CovarianceModel.fbm_sum(d["H1"], d["H2"], low)
        except KeyError as exc:
            raise ModelInvalidError(f"missing model parameter: {exc}") from exc
        raise ModelInvalidError(f"unknown covariance kind {kind!r}")

    @staticmethod
    def from_json(text: str) -> "CovarianceModel":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelInvalidError(f"bad model JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ModelInvalidError("model JSON must be an object")
        return CovarianceModel.from_dict(data)

    def label(self) -> str:
        params = ",".join(f"{p:g}" for p in self.params)
        return f"{self.kind}({params})"


def cov_eval(model: CovarianceModel, s: float, t: float) -> float:
    """Pointwise covariance R(s, t)."""
    return float(model.cov(s, t))


def rect_increment(model: CovarianceModel, rect: Rectangle) -> float:
    """R(t,v) - R(t,u) - R(s,v) + R(s,u) = E[(X_t - X_s)(X_v - X_u)]."""
    return float(
        model.cov(rect.t, rect.v)
        - model.cov(rect.t, rect.u)
        - model.cov(rect.s, rect.v)
        + model.cov(rect.s, rect.u)
    )


def sigma_sq(model: CovarianceModel, s: float, t: float) -> float:
    """Increment variance E[(X_t - X_s)^2], the square rectangle increment.

    Raises:
        ModelInvalidError: if the value is negative beyond roundoff, which
            flags a non-PSD covariance.
    """
    if t < s:
        raise ValueError("sigma_sq requires s <= t")
    val = rect_increment(model, Rectangle(s, t, s, t))
    if val < -_NEG_SIGMA_TOL:
        raise ModelInvalidError(
            f"negative increment variance {val} for {model.label()} on [{s},{t}]"
        )
    return max(val, 0.0)


def increment_gram(model: CovarianceModel, P: Partition) -> np.ndarray:
    """Gram matrix G[k,l] = E[dX_k dX_l] of consecutive increments over P."""
    R = model.cov(P.points[:, None], P.points[None, :])
    return R[1:, 1:] - R[1:, :-1] - R[:-1, 1:] + R[:-1, :-1]


def check_gram_psd(G: np.ndarray, tol: float = PSD_TOL) -> float:
    """Smallest eigenvalue of G; raises if below -tol * trace."""
    w_min = float(np.linalg.eigvalsh(G)[0])
    floor = -tol * float(np.trace(G))
    if w_min < floor:
        raise ModelInvalidError(
            f"increment Gram matrix is not PSD: min eigenvalue {w_min} < {floor}"
        )
    return w_min


# ---------------------------------------------------------------------------
# 2-d rho-variation over sub-partitions of a grid pair
# ---------------------------------------------------------------------------


def _corner_matrix(model: CovarianceModel, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.asarray(model.cov(p[:, None], q[None, :]), dtype=float)


def _chain_cost(C: np.ndarray, rows: np.ndarray, rho: float) -> np.ndarray:
    """cost[k,l] = sum over row cells of |rect([p_r, p_r+1] x [q_k, q_l])|^rho.

    ``C`` is the corner covariance matrix; ``rows`` an increasing index chain.
    """
    # A[r, k, l] = R(p_r, q_l) - R(p_r, q_k), differenced along the chain
    A = C[rows][:, None, :] - C[rows][:, :, None]
    D = np.abs(np.diff(A, axis=0)) ** rho
    return D.sum(axis=0)


def _chain_dp(cost: np.ndarray) -> tuple[float, np.ndarray]:
    """Maximize sum of cost[k_i, k_i+1] over chains 0 = k_0 < ... < k_r = n."""
    n = cost.shape[0] - 1
    best = np.full(n + 1, -np.inf)
    best[0] = 0.0
    prev = np.zeros(n + 1, dtype=int)
    for j in range(1, n + 1):
        cand = best[:j] + cost[:j, j]
        i = int(np.argmax(cand))
        best[j] = cand[i]
        prev[j] = i
    chain = [n]
    while chain[-1] != 0:
        chain.append(int(prev[chain[-1]]))
    return float(best[n]), np.array(chain[::-1])


def two_d_rho_variation(
    model: CovarianceModel,
    rect: Rectangle,
    grid: tuple[Partition, Partition],
    rho: float,
) -> float:
    """(sup over grid sub-partitions of sum |R^cell|^rho)^(1/rho).

    The supremum is over pairs of sub-partitions of the supplied grids that
    keep the rectangle's corners.  Grids whose thinner axis has at most 11
    interior points are solved exactly by subset enumeration combined with a
    1-d dynamic program on the other axis; larger grids use alternating
    coordinate-ascent DP, which yields a certified lower bound.

    Raises:
        ValueError: if rho < 1 or the grids do not span the rectangle.
    """
    if rho < 1:
        raise ValueError(f"rho-variation requires rho >= 1, got {rho}")
    if rect.degenerate:
        return 0.0
    P, Q = grid
    p = rect.s + P.points
    q = rect.u + Q.points
    if abs(p[-1] - rect.t) > 1e-9 or abs(q[-1] - rect.v) > 1e-9:
        raise ValueError("grids must span the rectangle sides")
    C = _corner_matrix(model, p, q)

    n_p, n_q = len(p) - 1, len(q) - 1
    if min(n_p, n_q) - 1 <= _EXHAUSTIVE_CAP:
        # enumerate subsets of the thinner axis, DP on the other
        transpose = n_q < n_p
        Cw = C.T if transpose else C
        interior = (n_q if transpose else n_p) - 1
        m = Cw.shape[0] - 1
        best = -np.inf
        for mask in range(1 << interior):
            rows = [0]
            rows.extend(i + 1 for i in range(interior) if mask >> i & 1)
            rows.append(m)
            val, _ = _chain_dp(_chain_cost(Cw, np.array(rows), rho))
            best = max(best, val)
        return float(best ** (1.0 / rho))

    # alternating ascent from the full grid
    rows = np.arange(len(p))
    best = -np.inf
    for _ in range(50):
        val_c, cols = _chain_dp(_chain_cost(C, rows, rho))
        val_r, rows = _chain_dp(_chain_cost(C.T, cols, rho))
        if val_r <= best * (1 + 1e-14):
            break
        best = val_r
    return float(best ** (1.0 / rho))
