"""Batch experiment drivers behind the CLI: sweeps, CSV output, slope fits.

Every run is fully determined by its ExperimentConfig; the canonical config
hash is embedded in the first line of each CSV so outputs can be traced back
to their configuration, and rerunning the same config reproduces the files
byte for byte.  Convergence errors are aggregated with medians over seeds,
which is robust to the occasional heavy-tailed seed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
from scipy import stats

from .controlled import from_function
from .covariance import CovarianceModel, Rectangle, increment_gram, two_d_rho_variation
from .errors import ConfigError, NumericalError
from .functions import FUNCTION_CATALOG, make_function
from .grids import Increment1, Partition, make_uniform_partition
from .integrate import midpoint, rough_integral, trapezoid, young_integral
from .lift import RoughLift
from .moments import (
    MomentReport,
    brownian_f_offdiag_second_moment,
    f_offdiag_second_moment_2dyoung,
    isserlis_second_moment_F_diag,
    isserlis_second_moment_g_diag,
)
from .simulate import mc_run, sample_path
from . import report as report_mod

KNOWN_RULES = ("trapezoid", "midpoint", "rough", "young")


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment run."""

    model: CovarianceModel = field(default_factory=lambda: CovarianceModel.fbm(0.5))
    d: int = 2
    m: int | None = None
    T: float = 1.0
    function: str = "sin-mix"
    levels: tuple = (16, 32, 64, 128, 256, 512, 1024)
    fine_ratio: int = 16
    seeds: tuple = tuple(range(20))
    rules: tuple = ("trapezoid", "midpoint")
    samples: int = 10000
    n: int = 64
    rho: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(int(n) for n in self.levels))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.m is None:
            object.__setattr__(self, "m", self.d)
        self.validate()

    def validate(self) -> None:
        if self.d < 1:
            raise ConfigError(f"d must be positive, got {self.d}")
        if self.m != self.d:
            raise ConfigError(
                "the componentwise driver pairing requires m == d "
                f"(got m={self.m}, d={self.d})"
            )
        if not self.T > 0:
            raise ConfigError(f"T must be positive, got {self.T}")
        if self.function not in FUNCTION_CATALOG:
            raise ConfigError(f"unknown function id {self.function!r}")
        if not self.levels:
            raise ConfigError("at least one mesh level is required")
        if any(n < 1 for n in self.levels):
            raise ConfigError("mesh levels must be positive")
        if list(self.levels) != sorted(self.levels):
            raise ConfigError("mesh levels must be ascending")
        if len(set(self.levels)) != len(self.levels):
            raise ConfigError("mesh levels must be distinct")
        if self.fine_ratio < 2:
            raise ConfigError(f"fine_ratio must be >= 2, got {self.fine_ratio}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if any(s < 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative")
        unknown = set(self.rules) - set(KNOWN_RULES)
        if unknown:
            raise ConfigError(f"unknown rules {sorted(unknown)}; known: {KNOWN_RULES}")
        if not self.rules:
            raise ConfigError("at least one rule is required")
        if self.samples < 2:
            raise ConfigError("samples must be >= 2")
        if self.n < 1:
            raise ConfigError("n must be positive")
        fine_n = self.fine_n
        for n in self.levels:
            if fine_n % n != 0:
                raise ConfigError(
                    f"fine grid of {fine_n} intervals is not divisible by level {n}"
                )
        if self.rho is not None and self.rho < 1:
            raise ConfigError(f"rho must be >= 1, got {self.rho}")

    @property
    def fine_n(self) -> int:
        return max(self.levels) * self.fine_ratio

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.to_dict()
        d["levels"] = list(self.levels)
        d["seeds"] = list(self.seeds)
        d["rules"] = list(self.rules)
        return d

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        data = dict(data)
        unknown = set(data) - set(ExperimentConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        if "model" in data and not isinstance(data["model"], CovarianceModel):
            data["model"] = CovarianceModel.from_dict(data["model"])
        try:
            return ExperimentConfig(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config JSON must be an object")
    return ExperimentConfig.from_dict(data)


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _write_csv(path: Path, config_hash: str, header: list, rows: list) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# config={config_hash}", ",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def _model_columns(model: CovarianceModel):
    """(header names, row values) identifying the model in sweep CSVs."""
    d = model.to_dict()
    d.pop("kind")
    d.pop("allow_low_hurst", None)
    names = sorted(d)
    return ["model"] + names, [model.kind] + [d[k] for k in names]


@dataclass(frozen=True)
class RuleFit:
    slope: float | None
    r_squared: float | None
    exact: bool


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-(seed, level) errors with median aggregation and slope fits."""

    config: ExperimentConfig
    rows: list
    medians: dict  # rule -> {n: median error}
    fits: dict  # rule -> RuleFit
    csv_path: Path | None = None
    summary_path: Path | None = None
    figure_path: Path | None = None


_EXACT_ERR = 1e-12


def _fit_medians(meshes: np.ndarray, medians: np.ndarray) -> RuleFit:
    if np.all(medians <= _EXACT_ERR):
        return RuleFit(slope=None, r_squared=None, exact=True)
    if len(meshes) < 3:
        return RuleFit(slope=None, r_squared=None, exact=False)
    fit = stats.linregress(np.log(meshes), np.log(np.maximum(medians, 1e-300)))
    return RuleFit(slope=float(fit.slope), r_squared=float(fit.rvalue**2), exact=False)


def run_converge(cfg: ExperimentConfig, out_dir=None) -> ConvergenceReport:
    """Convergence sweep of the configured rules against the fine reference.

    For each seed one fine path and lift are built; every coarse level is a
    sub-grid of the fine partition and the error is the Euclidean distance
    to the compensated-sum reference evaluated on the fine grid.
    """
    fn = make_function(cfg.function, cfg.d)
    fine_n = cfg.fine_n
    P_fine = make_uniform_partition(cfg.T, fine_n)
    model_header, model_row = _model_columns(cfg.model)

    rows = []
    errors = {rule: {n: [] for n in cfg.levels} for rule in cfg.rules}
    for seed in cfg.seeds:
        path = sample_path(cfg.model, P_fine, cfg.d, seed)
        lift = RoughLift.from_path(path)
        cp_fine = from_function(fn, path)
        ref = rough_integral(cp_fine, lift, P_fine).value
        y_inc = Increment1(P_fine, cp_fine.y)
        x_inc = Increment1(P_fine, path.values)
        for n in cfg.levels:
            stride = fine_n // n
            idx = np.arange(0, fine_n + 1, stride)
            P_n = Partition(P_fine.points[idx])
            cp_n = cp_fine.restrict(P_n)
            for rule in cfg.rules:
                if rule == "trapezoid":
                    res = trapezoid(cp_n, path, P_n)
                elif rule == "midpoint":
                    res = midpoint(fn, path, P_n)
                elif rule == "rough":
                    res = rough_integral(cp_n, lift, P_n)
                else:
                    res = young_integral(y_inc, x_inc, P_n)
                err = float(np.linalg.norm(res.value - ref))
                if not np.isfinite(err):
                    raise NumericalError(
                        f"non-finite error for rule {rule}, seed {seed}, n={n}"
                    )
                errors[rule][n].append(err)
                rows.append(
                    [seed] + model_row + [n, P_n.mesh, rule]
                    + list(res.value)
                    + [err]
                )

    medians = {
        rule: {n: float(np.median(errors[rule][n])) for n in cfg.levels}
        for rule in cfg.rules
    }
    meshes = np.array([cfg.T / n for n in cfg.levels])
    fits = {
        rule: _fit_medians(meshes, np.array([medians[rule][n] for n in cfg.levels]))
        for rule in cfg.rules
    }

    csv_path = summary_path = figure_path = None
    if out_dir is not None:
        out = Path(out_dir)
        h = cfg.config_hash()
        header = (
            ["seed"] + model_header + ["n", "mesh", "rule"]
            + [f"value_{i + 1}" for i in range(cfg.m)]
            + ["err_vs_reference"]
        )
        csv_path = _write_csv(out / "converge.csv", h, header, rows)
        srows = []
        for rule in cfg.rules:
            fit = fits[rule]
            for n in cfg.levels:
                srows.append(
                    [rule, n, cfg.T / n, medians[rule][n],
                     "exact" if fit.exact else _fmt(fit.slope),
                     "" if fit.r_squared is None else _fmt(fit.r_squared)]
                )
        summary_path = _write_csv(
            out / "converge_summary.csv",
            h,
            ["rule", "n", "mesh", "median_err", "slope", "r_squared"],
            srows,
        )
        figure_path = report_mod.render_convergence_figure(
            medians, fits, meshes, cfg, out / "converge.png"
        )
    return ConvergenceReport(
        config=cfg,
        rows=rows,
        medians=medians,
        fits=fits,
        csv_path=csv_path,
        summary_path=summary_path,
        figure_path=figure_path,
    )


#: lift refinement for the off-diagonal F Monte Carlo (chord areas are biased
#: by about -1/(2 ratio) relative to the true area, so keep the ratio high)
MC_LIFT_RATIO = 64


def moment_reports(cfg: ExperimentConfig) -> list:
    """MomentReport rows for the second moments of F (diag and off-diag)
    and g (diag) under the configured model, on an n-interval grid of [0,T].
    """
    model = cfg.model
    n = cfg.n
    P = make_uniform_partition(cfg.T, n)
    cell_idx = np.arange(n + 1)
    comp = 0.5 * float(np.trace(increment_gram(model, P)))
    reports = []

    # Diagonal statistics only need squares and cubes of the raw increments,
    # which the geometric lift reproduces exactly at refinement 1.
    def f11_stat(ps):
        x2 = RoughLift.from_path(ps).cell_levels(cell_idx)[1]
        return (float(np.sum(x2[:, 0, 0])) - comp) ** 2

    mc = mc_run(f11_stat, cfg.samples, base_seed=17, model=model, P=P, d=1)
    reports.append(
        MomentReport.from_mc("F_diag_sq", isserlis_second_moment_F_diag(model, P), mc)
    )

    def g111_stat(ps):
        x3 = RoughLift.from_path(ps).cell_levels(cell_idx)[2]
        return float(np.sum(x3[:, 0, 0, 0])) ** 2

    mc = mc_run(g111_stat, cfg.samples, base_seed=29, model=model, P=P, d=1)
    reports.append(
        MomentReport.from_mc("g_diag_sq", isserlis_second_moment_g_diag(model, P), mc)
    )

    # Off-diagonal F carries genuine Levy area, so samples are drawn on a
    # finer grid.  For standard Brownian motion the exact second moment is
    # known and the chord-area lift is nearly unbiased (relative bias
    # -1/(2 ratio)), so the production lift is exercised directly.  For
    # other models the reference is the left-corner 2-d Young sum at the
    # fine resolution, and the sampled statistic is the matching left-point
    # iterated sum: its second moment equals that sum exactly, so the
    # comparison isolates simulator correctness from discretization drift
    # (which the oracle's own resolution-doubling check reports).
    ratio = MC_LIFT_RATIO
    fine = make_uniform_partition(cfg.T, n * ratio)
    if model.kind == "fbm" and model.params[0] == 0.5:
        analytic = brownian_f_offdiag_second_moment(n, cfg.T)
        coarse_idx = np.arange(0, n * ratio + 1, ratio)

        def f12_stat(ps):
            x2 = RoughLift.from_path(ps).cell_levels(coarse_idx)[1]
            return float(np.sum(x2[:, 0, 1])) ** 2

    else:
        analytic = f_offdiag_second_moment_2dyoung(model, P, n * ratio).value

        def f12_stat(ps):
            v = np.diff(ps.values, axis=0)
            v1 = v[:, 0].reshape(n, ratio)
            v2 = v[:, 1].reshape(n, ratio)
            prefix = np.cumsum(v1, axis=1) - v1
            return float(np.sum(prefix * v2)) ** 2

    mc = mc_run(f12_stat, cfg.samples, base_seed=43, model=model, P=fine, d=2)
    reports.append(MomentReport.from_mc("F_offdiag_sq", analytic, mc))
    return reports


def run_moments(cfg: ExperimentConfig, out_dir=None):
    """Emit MomentReport rows as CSV (plus a figure when out_dir is set)."""
    reports = moment_reports(cfg)
    csv_path = figure_path = None
    if out_dir is not None:
        out = Path(out_dir)
        h = cfg.config_hash()
        rows = [
            [cfg.model.label(), r.statistic, r.analytic, r.mc_mean, r.mc_stderr,
             "pass" if r.verdict else "fail"]
            for r in reports
        ]
        csv_path = _write_csv(
            out / "moments.csv",
            h,
            ["model", "statistic", "analytic", "mc_mean", "mc_stderr", "verdict"],
            rows,
        )
        figure_path = report_mod.render_moments_figure(reports, cfg, out / "moments.png")
    return reports, csv_path, figure_path


def run_rhovar(cfg: ExperimentConfig, out_dir=None):
    """2-d rho-variation of the model covariance on [0,T]^2 per grid level."""
    rho = cfg.rho if cfg.rho is not None else cfg.model.rho
    rect = Rectangle(0.0, cfg.T, 0.0, cfg.T)
    rows = []
    for n in cfg.levels:
        P = make_uniform_partition(cfg.T, n)
        val = two_d_rho_variation(cfg.model, rect, (P, P), rho)
        rows.append([cfg.model.label(), n, rho, val])
    csv_path = figure_path = None
    if out_dir is not None:
        out = Path(out_dir)
        h = cfg.config_hash()
        csv_path = _write_csv(
            out / "rhovar.csv", h, ["model", "n", "rho", "value"], rows
        )
        figure_path = report_mod.render_rhovar_figure(rows, cfg, out / "rhovar.png")
    return rows, csv_path, figure_path


def run_simulate(cfg: ExperimentConfig, out_dir):
    """Sample one path per seed and write each to its own CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    P = make_uniform_partition(cfg.T, cfg.n)
    paths = []
    for seed in cfg.seeds:
        ps = sample_path(cfg.model, P, cfg.d, seed)
        target = out / f"sample_{seed}.csv"
        ps.to_csv(target)
        paths.append(target)
    return paths


def run_lift(cfg: ExperimentConfig, out_dir):
    """Lift the first seed's path on an n-interval grid and export levels."""
    if cfg.d > 3:
        raise ConfigError("lift export supports d <= 3")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    P = make_uniform_partition(cfg.T, cfg.n)
    seed = cfg.seeds[0]
    lift = RoughLift.from_path(sample_path(cfg.model, P, cfg.d, seed))
    target = out / f"lift_{seed}.csv"
    lift.to_csv(target)
    return target


def run_integrate(cfg: ExperimentConfig, out_dir=None):
    """Evaluate the configured rules on each level against the fine reference."""
    report = run_converge(cfg, out_dir=None)
    csv_path = None
    if out_dir is not None:
        out = Path(out_dir)
        h = cfg.config_hash()
        model_header, _ = _model_columns(cfg.model)
        header = (
            ["seed"] + model_header + ["n", "mesh", "rule"]
            + [f"value_{i + 1}" for i in range(cfg.m)]
            + ["err_vs_reference"]
        )
        csv_path = _write_csv(out / "integrate.csv", h, header, report.rows)
    return report, csv_path
