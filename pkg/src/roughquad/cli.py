"""Command line front end.

Subcommands: simulate, lift, integrate, converge, moments, rhovar.
Options given on the command line override values from --config; anything
not set falls back to per-subcommand defaults.

Exit codes: 0 on success, 2 for configuration problems, 3 for numerical
failures (covariance not PSD, non-finite statistics, oracle did not
stabilize).
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, ModelInvalidError, NumericalError, SimulationError
from .experiments import (
    ExperimentConfig,
    run_converge,
    run_integrate,
    run_lift,
    run_moments,
    run_rhovar,
    run_simulate,
)

_DEFAULTS = {
    "simulate": {"n": 256, "d": 1, "seeds": [0]},
    "lift": {"n": 128, "d": 2, "seeds": [0]},
    "integrate": {"levels": [64], "seeds": [0]},
    "converge": {},
    "moments": {"d": 1, "n": 64},
    "rhovar": {"levels": [4, 8, 16, 32], "d": 1},
}


def _int_list(text: str) -> list:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from exc


def _str_list(text: str) -> list:
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roughquad",
        description="Gaussian path sampling, rough lifts, and quadrature sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "simulate": "sample Gaussian paths, one CSV per seed",
        "lift": "export the level-1..3 lift of a sampled path",
        "integrate": "evaluate quadrature rules against a fine reference",
        "converge": "mesh sweep with median errors, slopes, and a figure",
        "moments": "check second moments of F and g against analytic values",
        "rhovar": "2-d rho-variation of the covariance on [0,T]^2",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--seeds", type=_int_list, help="comma-separated seeds, e.g. 0,1,2")
        p.add_argument("--levels", type=_int_list, help="comma-separated mesh levels")
        p.add_argument(
            "--model",
            help='covariance kind (fbm, bifractional, fbm_sum) or inline JSON '
            'like {"kind":"fbm","H":0.35}',
        )
        p.add_argument("--H", type=float, dest="hurst", help="Hurst parameter override")
        p.add_argument("--fine-ratio", type=int, dest="fine_ratio")
        p.add_argument("--samples", type=int, help="Monte Carlo sample count")
        p.add_argument("--n", type=int, help="grid intervals for single-grid commands")
        p.add_argument("--T", type=float, dest="horizon", help="time horizon")
        p.add_argument("--d", type=int, help="path dimension")
        p.add_argument("--function", help="integrand id (linear, quadratic, sin, sin-mix)")
        p.add_argument("--rules", type=_str_list, help="comma-separated rule names")
        p.add_argument("--rho", type=float, help="rho for the 2-d variation")
    return parser


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    data = dict(_DEFAULTS[args.command])
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config JSON must be an object")
        data.update(loaded)
    if args.model:
        text = args.model.strip()
        if text.startswith("{"):
            try:
                data["model"] = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"bad inline model JSON: {exc}") from exc
        else:
            data["model"] = {"kind": text}
    if args.hurst is not None:
        model = dict(data.get("model", {"kind": "fbm"}))
        if model.get("kind") == "fbm_sum":
            raise ConfigError("--H is ambiguous for fbm_sum; set H1/H2 in JSON")
        model.setdefault("kind", "fbm")
        model["H"] = args.hurst
        data["model"] = model
    if isinstance(data.get("model"), dict) and "H" not in data["model"] and data[
        "model"
    ].get("kind") == "fbm":
        data["model"]["H"] = 0.5
    for key, value in [
        ("seeds", args.seeds),
        ("levels", args.levels),
        ("fine_ratio", args.fine_ratio),
        ("samples", args.samples),
        ("n", args.n),
        ("T", args.horizon),
        ("d", args.d),
        ("function", args.function),
        ("rules", args.rules),
        ("rho", args.rho),
    ]:
        if value is not None:
            data[key] = value
    return ExperimentConfig.from_dict(data)


def _dispatch(args: argparse.Namespace, cfg: ExperimentConfig) -> None:
    out = args.out
    if args.command == "simulate":
        paths = run_simulate(cfg, out)
        for p in paths:
            print(f"wrote {p}")
    elif args.command == "lift":
        print(f"wrote {run_lift(cfg, out)}")
    elif args.command == "integrate":
        _, csv_path = run_integrate(cfg, out)
        print(f"wrote {csv_path}")
    elif args.command == "converge":
        report = run_converge(cfg, out)
        for rule, fit in report.fits.items():
            if fit.exact:
                print(f"{rule}: exact (all errors below 1e-12)")
            elif fit.slope is None:
                print(f"{rule}: slope not fitted (need >= 3 levels)")
            else:
                print(f"{rule}: slope {fit.slope:.3f} (R^2 {fit.r_squared:.3f})")
        for p in (report.csv_path, report.summary_path, report.figure_path):
            print(f"wrote {p}")
    elif args.command == "moments":
        reports, csv_path, figure_path = run_moments(cfg, out)
        for r in reports:
            verdict = "pass" if r.verdict else "FAIL"
            print(
                f"{r.statistic}: analytic {r.analytic:.6g}, "
                f"mc {r.mc_mean:.6g} +- {r.mc_stderr:.2g} [{verdict}]"
            )
        print(f"wrote {csv_path}")
        print(f"wrote {figure_path}")
    else:
        rows, csv_path, figure_path = run_rhovar(cfg, out)
        for row in rows:
            print(f"n={row[1]}: rho-variation {row[3]:.8g}")
        print(f"wrote {csv_path}")
        print(f"wrote {figure_path}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
    except (ConfigError, ModelInvalidError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        _dispatch(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, SimulationError, ModelInvalidError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
