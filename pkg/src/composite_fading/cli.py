"""composite-fading: tabulate composite fading densities, run sweeps, sample, validate.

Exit codes: 0 success, 1 validation failure, 2 usage or parameter error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .base import GammaShadowParams, KappaMuExtremeParams, KappaMuParams, ParameterError
from .composite import (
    CompositeSpec,
    SeriesConfig,
    composite_envelope_pdf_numeric,
    envelope_pdf_series,
    series_origin_value,
)
from .quadrature import ENV_TOL, QuadConfig, QuadratureError
from .special import DomainError
from .suite import DEFAULT_FAULT, run_suite
from .validation import GoFError, goodness_of_fit, sample_law

COLUMNS = ("x", "pdf_numeric", "pdf_series", "abs_diff")
COMPOSITE_MODELS = ("kmu-gamma", "kmu-extreme-gamma")
SAMPLE_MODELS = COMPOSITE_MODELS + ("kmu", "kmu-extreme", "gamma")
MODEL_PARAMS = {
    "kmu-gamma": ("kappa", "mu", "b", "omega"),
    "kmu-extreme-gamma": ("m", "b", "omega"),
    "kmu": ("kappa", "mu", "r_hat"),
    "kmu-extreme": ("m",),
    "gamma": ("b", "omega"),
}
COMPOUNDING = {"rms": "root_mean_square", "ms": "mean_square"}

PRESETS = {
    "fig1": dict(model="kmu-gamma", fixed=dict(b=1.4, omega=1.2, mu=2.0), swept="kappa", values=[1.0, 2.0, 4.0, 8.0]),
    "fig2": dict(model="kmu-gamma", fixed=dict(b=1.4, omega=1.2, kappa=1.0), swept="mu", values=[0.5, 1.0, 2.0, 3.0]),
    "fig3": dict(model="kmu-extreme-gamma", fixed=dict(b=1.2, omega=0.8), swept="m", values=[0.5, 1.0, 1.5, 2.0]),
}


class UsageError(ValueError):
    pass


# -- parsing helpers ------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    count: int

    def points(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def as_dict(self) -> dict:
        return {"start": self.start, "stop": self.stop, "count": self.count}


def parse_grid(text: str) -> Grid:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"x grid must be start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"x grid must be start:stop:count, got {text!r}") from None
    if count < 2:
        raise UsageError("x grid count must be >= 2")
    if not (0.0 <= start < stop and math.isfinite(stop)):
        raise UsageError("x grid needs 0 <= start < stop")
    return Grid(start, stop, count)


def parse_values(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise UsageError("swept values must be non-empty")
    return vals


def parse_fixed(text: str) -> dict[str, float]:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"fixed parameters are name=value pairs, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise UsageError(f"fixed parameter {name!r} is not a number") from None
    return out


def build_law(model: str, params: dict[str, float | None], compounding: str = "rms"):
    """Model name plus parameters -> CompositeSpec or base-model parameters."""
    if model not in MODEL_PARAMS:
        raise UsageError(f"unknown model {model!r}")
    needed = MODEL_PARAMS[model]
    for name in needed:
        if name == "r_hat":
            continue
        if params.get(name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required for model {model}")
    extra = [k for k, v in params.items() if v is not None and k not in needed]
    if extra:
        raise UsageError(f"model {model} does not take {', '.join(sorted(extra))}")
    p = params
    if model == "kmu-gamma":
        return CompositeSpec.kappa_mu_gamma(p["kappa"], p["mu"], p["b"], p["omega"], COMPOUNDING[compounding])
    if model == "kmu-extreme-gamma":
        return CompositeSpec.extreme_gamma(p["m"], p["b"], p["omega"], COMPOUNDING[compounding])
    if model == "kmu":
        return KappaMuParams(p["kappa"], p["mu"], p.get("r_hat") or 1.0)
    if model == "kmu-extreme":
        return KappaMuExtremeParams(p["m"])
    return GammaShadowParams(p["b"], p["omega"])


def _model_params(args) -> dict[str, float | None]:
    return {k: getattr(args, k) for k in ("kappa", "mu", "m", "b", "omega", "r_hat")}


def fmt(v: float) -> str:
    """Positional decimal with 17 significant digits (round-trips every double)."""
    if not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return np.format_float_positional(v, precision=17, unique=False, fractional=False, trim="k")


# -- tabulation -------------------------------------------------------------------


def tabulate(spec: CompositeSpec, grid: Grid, sc: SeriesConfig, cfg: QuadConfig) -> np.ndarray:
    """Rows (x, pdf_numeric, pdf_series, abs_diff) of the continuous density.

    The series is defined for root_mean_square compounding only; for
    mean_square the series columns are NaN.
    """
    x = grid.points()
    num = np.asarray(composite_envelope_pdf_numeric(x, spec, cfg).value, dtype=float)
    ser = np.full_like(x, np.nan)
    if spec.compounding == "root_mean_square":
        pos = x > 0
        if np.any(pos):
            ser[pos] = envelope_pdf_series(x[pos], spec, sc).value
        if np.any(~pos):
            ser[~pos] = series_origin_value(spec, sc)
    with np.errstate(invalid="ignore"):
        diff = np.where(num == ser, 0.0, np.abs(num - ser))
    return np.column_stack([x, num, ser, diff])


def write_csv(path: Path | None, rows: np.ndarray) -> None:
    text = ",".join(COLUMNS) + "\n" + "".join(",".join(fmt(v) for v in row) + "\n" for row in rows)
    _emit(path, text)


def table_json(rows: np.ndarray, meta: dict) -> str:
    # one row per line; json writes floats as their shortest round-trip repr
    head = json.dumps({**meta, "columns": list(COLUMNS)}, indent=1)[:-2]
    body = ",\n".join("  " + json.dumps(r) for r in rows.tolist())
    return f'{head},\n "rows": [\n{body}\n ]\n}}\n'


def _emit(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _series_config(args) -> SeriesConfig:
    return SeriesConfig(n=args.series_n, mode=args.mode)


# -- commands ---------------------------------------------------------------------


def cmd_pdf(args) -> int:
    grid = parse_grid(args.x)
    spec = build_law(args.model, _model_params(args), args.compounding)
    cfg = QuadConfig.from_env()
    rows = tabulate(spec, grid, _series_config(args), cfg)
    out = Path(args.out) if args.out else None
    if args.format == "csv":
        write_csv(out, rows)
    else:
        meta = {"params": spec.describe(), "atom_weight": spec.atom_weight, "series_n": args.series_n,
                "mode": args.mode, "x_grid": grid.as_dict()}
        _emit(out, table_json(rows, meta))
    return 0


def _sweep_plan(args) -> dict:
    if args.preset:
        plan = dict(PRESETS[args.preset])
        plan["fixed"] = dict(plan["fixed"])
        override = {"kappa": args.kappa_values, "mu": args.mu_values, "m": args.m_values}
        for name, text in override.items():
            if text is None:
                continue
            if name != plan["swept"]:
                raise UsageError(f"preset {args.preset} sweeps {plan['swept']}, not {name}")
            plan["values"] = parse_values(text)
        if args.swept_values is not None:
            plan["values"] = parse_values(args.swept_values)
        plan["name"] = args.preset
        return plan
    if not (args.model and args.swept_param and args.swept_values):
        raise UsageError("sweep needs --preset, or --model with --swept-param and --swept-values")
    fixed = parse_fixed(args.fixed or "")
    if args.swept_param in fixed:
        raise UsageError(f"swept parameter {args.swept_param} must not also be fixed")
    return dict(model=args.model, fixed=fixed, swept=args.swept_param,
                values=parse_values(args.swept_values), name=args.model)


def cmd_sweep(args) -> int:
    plan = _sweep_plan(args)
    grid = parse_grid(args.x)
    sc = _series_config(args)
    cfg = QuadConfig.from_env()
    specs = []
    for value in plan["values"]:
        params = {k: None for k in ("kappa", "mu", "m", "b", "omega", "r_hat")}
        params.update(plan["fixed"])
        params[plan["swept"]] = value
        specs.append(build_law(plan["model"], params, args.compounding))

    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out_dir}: {exc.strerror}") from None
    files = []
    for value, spec in zip(plan["values"], specs):
        rows = tabulate(spec, grid, sc, cfg)
        name = f"{plan['name']}_{plan['swept']}={value:g}.{args.format}"
        path = out_dir / name
        if args.format == "csv":
            write_csv(path, rows)
        else:
            _emit(path, table_json(rows, {"params": spec.describe(), "atom_weight": spec.atom_weight}))
        interior = rows[np.isfinite(rows[:, 1]) & (rows[:, 0] > 0)]
        argmax = float(interior[np.argmax(interior[:, 1]), 0])
        files.append({"file": name, plan["swept"]: value, "params": spec.describe(),
                      "atom_weight": spec.atom_weight, "argmax_x": argmax})

    manifest = {
        "tool": "composite-fading",
        "version": __version__,
        "preset": args.preset,
        "model": plan["model"],
        "compounding": COMPOUNDING[args.compounding],
        "fixed_params": plan["fixed"],
        "swept_param": plan["swept"],
        "swept_values": plan["values"],
        "x_grid": grid.as_dict(),
        "format": args.format,
        "series_n": sc.n,
        "mode": sc.mode,
        "quad": {"rel_tol": cfg.rel_tol, "abs_tol": cfg.abs_tol,
                 "max_refinements": cfg.max_refinements, "transform": cfg.transform},
        "seed": None,
        "files": files,
    }
    with open(out_dir / "manifest.json", "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    print(f"wrote {len(files)} {args.format} files and manifest.json to {out_dir}")
    return 0


def cmd_validate(args) -> int:
    if args.samples:
        law = build_law(args.model, _model_params(args), args.compounding)
        samples = np.loadtxt(args.samples, ndmin=1)
        rep = goodness_of_fit(samples, law, QuadConfig.from_env())
        text = json.dumps({"gof": rep.as_dict(), "passed": rep.passed}, indent=1)
        _emit(Path(args.out) if args.out else None, text + "\n")
        if not rep.passed:
            print("failed: gof.samples", file=sys.stderr)
            return 1
        return 0
    fault = args.inject_fault
    report = run_suite(quick=args.quick, fault=fault)
    _emit(Path(args.out) if args.out else None, json.dumps(report.as_dict(), indent=1) + "\n")
    if not report.ok:
        print("failed: " + ", ".join(report.failed), file=sys.stderr)
        return 1
    return 0


def cmd_sample(args) -> int:
    if args.count <= 0:
        raise UsageError("count must be positive")
    law = build_law(args.model, _model_params(args), args.compounding)
    draws = sample_law(law, np.random.default_rng(args.seed), args.count)
    text = "".join(repr(float(v)) + "\n" for v in draws)
    _emit(Path(args.out) if args.out else None, text)
    return 0


# -- argument parser ----------------------------------------------------------------


def _add_model_args(p, required_model: bool = True, choices=COMPOSITE_MODELS):
    p.add_argument("--model", choices=choices, required=required_model)
    for name in ("kappa", "mu", "m", "b", "omega"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--compounding", choices=sorted(COMPOUNDING), default="rms",
                   help="gamma variate is the mean power (rms, default) or the rms envelope (ms)")


def _add_series_args(p):
    p.add_argument("--series-n", type=int, default=30)
    p.add_argument("--mode", choices=("renormalized", "paper_literal"), default="renormalized")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="composite-fading", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pdf", help="tabulate numeric and series envelope densities")
    _add_model_args(p)
    p.add_argument("--x", default="0:4:81", help="grid start:stop:count (default 0:4:81)")
    _add_series_args(p)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_pdf)

    p = sub.add_parser("sweep", help="one table per swept parameter value, plus a manifest")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--kappa-values")
    p.add_argument("--mu-values")
    p.add_argument("--m-values")
    p.add_argument("--model", choices=COMPOSITE_MODELS)
    p.add_argument("--fixed", help="name=value pairs, e.g. b=1.4,omega=1.2,mu=2")
    p.add_argument("--swept-param", choices=("kappa", "mu", "m", "b", "omega"))
    p.add_argument("--swept-values")
    p.add_argument("--compounding", choices=sorted(COMPOUNDING), default="rms")
    p.add_argument("--x", default="0:4:81")
    _add_series_args(p)
    p.add_argument("--out", default="sweep_out", help="output directory")
    p.set_defaults(func=cmd_sweep)

    for name, quick in (("validate", False), ("selfcheck", True)):
        p = sub.add_parser(name, help="run the validation suite" if not quick else "alias of validate --quick")
        if not quick:
            p.add_argument("--quick", action="store_true", help="reduced grids and 2e5 Monte Carlo samples")
            p.add_argument("--samples", help="newline-delimited samples to test against the model")
            _add_model_args(p, required_model=False, choices=SAMPLE_MODELS)
            p.add_argument("--r-hat", type=float)
        p.add_argument("--inject-fault", nargs="?", const=DEFAULT_FAULT, default=None, help=argparse.SUPPRESS)
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.set_defaults(func=cmd_validate, quick=quick, samples=None)

    p = sub.add_parser("sample", help="newline-delimited Monte Carlo draws")
    _add_model_args(p, choices=SAMPLE_MODELS)
    p.add_argument("--r-hat", type=float)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "samples", None) and not args.model:
        print("error: --samples needs --model and its parameters", file=sys.stderr)
        return 2
    for name in ("r_hat",):
        if not hasattr(args, name):
            setattr(args, name, None)
    try:
        return args.func(args)
    except (UsageError, ParameterError, DomainError, GoFError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # e.g. an unparsable COMPOSITE_FADING_QUAD_TOL or sample file
        print(f"error: {exc} (check {ENV_TOL} and input files)", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QuadratureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
