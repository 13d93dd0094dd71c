"""Closed catalog of integrand functions with hand-coded derivatives.

Only registered ids are available to experiments; this keeps every
derivative testable against finite differences.  All entries map R^d to R^d
so that the componentwise pairing with the driver is well defined.
"""

from __future__ import annotations

import numpy as np

from .controlled import SmoothFunction
from .errors import ConfigError


def _linear(d: int) -> SmoothFunction:
    eye = np.eye(d)

    return SmoothFunction(
        name="linear",
        d=d,
        m=d,
        f=lambda x: np.asarray(x, dtype=float).copy(),
        df=lambda x: np.broadcast_to(eye, np.shape(x)[:-1] + (d, d)).copy(),
        d2f=lambda x: np.zeros(np.shape(x)[:-1] + (d, d, d)),
        d3f=lambda x: np.zeros(np.shape(x)[:-1] + (d, d, d, d)),
    )


def _quadratic(d: int) -> SmoothFunction:
    """Componentwise square, f_a(x) = x_a^2."""
    eye = np.eye(d)
    diag3 = np.zeros((d, d, d))
    for a in range(d):
        diag3[a, a, a] = 2.0

    def df(x):
        x = np.asarray(x, dtype=float)
        return 2.0 * x[..., :, None] * eye

    return SmoothFunction(
        name="quadratic",
        d=d,
        m=d,
        f=lambda x: np.asarray(x, dtype=float) ** 2,
        df=df,
        d2f=lambda x: np.broadcast_to(diag3, np.shape(x)[:-1] + (d, d, d)).copy(),
        d3f=lambda x: np.zeros(np.shape(x)[:-1] + (d, d, d, d)),
    )


def _sin(d: int) -> SmoothFunction:
    """Componentwise sine."""
    eye = np.eye(d)

    def df(x):
        return np.cos(np.asarray(x, dtype=float))[..., :, None] * eye

    def d2f(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (d, d, d))
        idx = np.arange(d)
        out[..., idx, idx, idx] = -np.sin(x)
        return out

    def d3f(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (d, d, d, d))
        idx = np.arange(d)
        out[..., idx, idx, idx, idx] = -np.cos(x)
        return out

    return SmoothFunction(name="sin", d=d, m=d, f=np.sin, df=df, d2f=d2f, d3f=d3f)


def _sin_mix(d: int) -> SmoothFunction:
    """f_a(x) = sin(sum_j W[a,j] x_j + phi_a) with fixed mixing weights.

    The weights are a deterministic function of d alone, so experiment
    outputs are stable across runs and platforms.
    """
    a = np.arange(d)
    W = np.sin(1.0 + 3.0 * a[:, None] + 7.0 * a[None, :]) / np.sqrt(d)
    phi = 0.5 + 0.3 * a

    def u(x):
        return np.asarray(x, dtype=float) @ W.T + phi

    return SmoothFunction(
        name="sin-mix",
        d=d,
        m=d,
        f=lambda x: np.sin(u(x)),
        df=lambda x: np.cos(u(x))[..., None] * W,
        d2f=lambda x: -np.sin(u(x))[..., None, None] * W[:, :, None] * W[:, None, :],
        d3f=lambda x: -np.cos(u(x))[..., None, None, None]
        * W[:, :, None, None]
        * W[:, None, :, None]
        * W[:, None, None, :],
    )


FUNCTION_CATALOG = {
    "linear": _linear,
    "quadratic": _quadratic,
    "sin": _sin,
    "sin-mix": _sin_mix,
}


def make_function(name: str, d: int) -> SmoothFunction:
    """Instantiate a catalog function for dimension d.

    Raises:
        ConfigError: for ids outside the catalog.
    """
    try:
        factory = FUNCTION_CATALOG[name]
    except KeyError:
        known = ", ".join(sorted(FUNCTION_CATALOG))
        raise ConfigError(f"unknown function id {name!r}; catalog: {known}") from None
    if d < 1:
        raise ConfigError(f"function dimension must be positive, got {d}")
    return factory(d)
