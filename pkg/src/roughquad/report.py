"""Figure rendering for experiment reports.

Every renderer writes a PNG next to the delimited output and returns the
path.  The Agg backend is forced so the CLI works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams["figure.dpi"] = 110
plt.rcParams["axes.grid"] = True
plt.rcParams["grid.alpha"] = 0.3

_RULE_COLORS = {
    "trapezoid": "tab:blue",
    "midpoint": "tab:orange",
    "rough": "tab:green",
    "young": "tab:red",
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def render_convergence_figure(medians, fits, meshes, cfg, path) -> Path:
    """Log-log plot of median error vs mesh, one line per rule."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    meshes = np.asarray(meshes, dtype=float)
    for rule in cfg.rules:
        med = np.array([medians[rule][n] for n in cfg.levels])
        fit = fits[rule]
        if fit.exact:
            label = f"{rule} (exact)"
        elif fit.slope is None:
            label = rule
        else:
            label = f"{rule} (slope {fit.slope:.2f})"
        color = _RULE_COLORS.get(rule)
        pos = med > 0
        ax.loglog(meshes[pos], med[pos], "o-", color=color, label=label)
    ax.set_xlabel("mesh")
    ax.set_ylabel("median error vs fine reference")
    ax.set_title(f"{cfg.model.label()}, {cfg.function}, {len(cfg.seeds)} seeds")
    ax.legend()
    return _save(fig, path)


def render_moments_figure(reports, cfg, path) -> Path:
    """Analytic second moments vs Monte Carlo means with 3-sigma bars."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    xs = np.arange(len(reports))
    analytic = [r.analytic for r in reports]
    mc = [r.mc_mean for r in reports]
    err = [3.0 * r.mc_stderr for r in reports]
    ax.errorbar(xs, mc, yerr=err, fmt="o", capsize=4, label="MC mean (3 stderr)")
    ax.scatter(xs, analytic, marker="_", s=400, color="tab:red", label="analytic")
    ax.set_xticks(xs)
    ax.set_xticklabels([r.statistic for r in reports], rotation=20)
    ax.set_ylabel("second moment")
    ax.set_title(f"{cfg.model.label()}, n={cfg.n}, {cfg.samples} samples")
    ax.legend()
    return _save(fig, path)


def render_rhovar_figure(rows, cfg, path) -> Path:
    """2-d rho-variation of the covariance as the grid refines."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ns = [row[1] for row in rows]
    vals = [row[3] for row in rows]
    ax.semilogx(ns, vals, "o-", base=2)
    ax.set_xlabel("grid intervals per axis")
    ax.set_ylabel("rho-variation over square")
    rho = rows[0][2] if rows else None
    ax.set_title(f"{cfg.model.label()}, rho={rho}")
    return _save(fig, path)
