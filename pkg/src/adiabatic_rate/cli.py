"""Command-line front end: ``simulate`` a grid to CSV, ``analyze`` a CSV to JSON."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import jsonschema
import numpy as np

from . import analysis, luttinger, tfim, xxz
from .core import DomainError, RampProtocol

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
HEADER = ["model", "N", "T", "f_N"]

_NUM = {"type": "number"}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["model", "ramp", "N_list", "T_list"],
    "properties": {
        "model": {"enum": ["tfim", "ll", "xxz"]},
        "ramp": {
            "type": "object", "additionalProperties": False, "required": ["from", "to"],
            "properties": {"from": _NUM, "to": _NUM},
        },
        "N_list": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 2}},
        "T_list": {
            "oneOf": [
                {"type": "array", "minItems": 1, "items": {"type": "number", "minimum": 0}},
                {
                    "type": "object", "additionalProperties": False,
                    "required": ["log_min", "log_max", "points"],
                    "properties": {"log_min": _NUM, "log_max": _NUM,
                                   "points": {"type": "integer", "minimum": 1}},
                },
            ]
        },
        "tolerances": {
            "type": "object", "additionalProperties": False,
            "properties": {"rtol": {"type": "number", "exclusiveMinimum": 0},
                           "atol": {"type": "number", "exclusiveMinimum": 0}},
        },
        "ll": {
            "type": "object", "additionalProperties": False,
            "properties": {"omega": {"type": "number", "exclusiveMinimum": 0},
                           "n_max": {"type": "integer", "minimum": 8, "multipleOf": 2}},
        },
        "xxz": {
            "type": "object", "additionalProperties": False,
            "properties": {"dt": {"type": "number", "exclusiveMinimum": 0},
                           "sector": {"oneOf": [{"enum": ["fm", "afm", "xy"]}, _NUM]},
                           "krylov_dim": {"type": "integer", "minimum": 2}},
        },
        "workers": {"type": "integer", "minimum": 1},
    },
}


class ConfigError(ValueError):
    pass


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from exc
    if cfg["model"] in ("tfim", "ll") and any(n % 2 for n in cfg["N_list"]):
        raise ConfigError("N_list entries must be even")
    return cfg


def t_values(grid) -> list[float]:
    """Explicit list, or ``{log_min, log_max, points}`` as base-10 exponents."""
    if isinstance(grid, dict):
        return [float(t) for t in np.logspace(grid["log_min"], grid["log_max"], grid["points"])]
    return [float(t) for t in grid]


def compute_point(cfg: dict, N: int, T: float) -> float:
    """One ``f_N(T)`` value; the same library call a user would make directly."""
    ramp = RampProtocol(cfg["ramp"]["from"], cfg["ramp"]["to"])
    tol = cfg.get("tolerances", {})
    kw = {k: tol[k] for k in ("rtol", "atol") if k in tol}
    model = cfg["model"]
    if model == "tfim":
        return tfim.rate_function_finite(N, ramp, T, **kw)
    if model == "ll":
        ll = cfg.get("ll", {})
        return luttinger.rate_function_finite(
            N, ramp, T, n_max=ll.get("n_max", luttinger.DEFAULT_NMAX), omega=ll.get("omega", 1.0), **kw
        )
    opts = cfg.get("xxz", {})
    sector = opts.get("sector", "afm")
    Sz = xxz.sector_for(sector, N) if isinstance(sector, str) else sector
    return xxz.rate_function(N, ramp, T, dt=opts.get("dt"), Sz=Sz, krylov_dim=opts.get("krylov_dim", 30))


def _task(args):
    cfg, N, T = args
    try:
        return N, T, compute_point(cfg, N, T), None
    except (ArithmeticError, RuntimeError, DomainError, MemoryError) as exc:
        return N, T, None, f"{type(exc).__name__}: {exc}"


def format_csv(model: str, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for N, T, f in sorted(rows, key=lambda r: (r[0], r[1])):
        w.writerow([model, N, f"{T:.17g}", f"{f:.17g}"])
    return buf.getvalue()


def simulate(config_path, out_path, workers: int | None = None) -> int:
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    grid = [(cfg, N, T) for N in sorted(set(cfg["N_list"])) for T in sorted(set(t_values(cfg["T_list"])))]
    workers = workers or cfg.get("workers", 1)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_task, grid))
    else:
        results = [_task(g) for g in grid]
    rows = []
    for N, T, f, err in results:
        if err is not None:
            print(f"error: numerical failure (model={cfg['model']}, N={N}, T={T:g}): {err}", file=sys.stderr)
            return EXIT_NUMERICAL
        rows.append((N, T, f))
    text = format_csv(cfg["model"], rows)
    if out_path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
    return EXIT_OK


def read_csv(path) -> list[tuple]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != HEADER:
            raise ConfigError(f"CSV header must be {','.join(HEADER)}, got {header}")
        rows = []
        for line_no, rec in enumerate(reader, start=2):
            if len(rec) != 4:
                raise ConfigError(f"line {line_no}: expected 4 fields")
            try:
                rows.append((rec[0], int(rec[1]), float(rec[2]), float(rec[3])))
            except ValueError as exc:
                raise ConfigError(f"line {line_no}: {exc}") from exc
    if not rows:
        raise ConfigError("CSV has no data rows")
    return rows


def _pick(values, requested, label):
    values = sorted(set(values))
    if requested is not None:
        if requested not in values:
            raise ConfigError(f"{label}={requested} not present in CSV")
        return requested
    if len(values) != 1:
        raise ConfigError(f"CSV holds several {label} values {values}; select one with --{label}")
    return values[0]


def analyze(in_csv, mode: str, window=None, N=None, T=None):
    rows = read_csv(in_csv)
    if mode == "extrapolate":
        t = _pick([r[2] for r in rows], T, "T")
        fit = analysis.extrapolate_quadratic([(r[1], r[3]) for r in rows if r[2] == t])
        return {"g": fit.g, "h": fit.h, "i": fit.i}
    n = _pick([r[1] for r in rows], N, "N")
    series = sorted((r[2], r[3]) for r in rows if r[1] == n)
    if mode == "envelope":
        series = analysis.envelope_extract(series)
    fit = analysis.powerlaw_fit(series, tuple(window) if window else None)
    return {
        "mode": mode,
        "window": list(fit.window),
        "amplitude": fit.amplitude,
        "exponent": fit.exponent,
        "rms_residual": fit.rms_residual,
        "n_points": fit.n_points,
    }


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adiabatic-rate", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", help="evaluate f_N(T) over the configured grid")
    s.add_argument("config")
    s.add_argument("-o", "--out", default="-")
    s.add_argument("-j", "--workers", type=int, default=None)
    a = sub.add_parser("analyze", help="fit a CSV produced by simulate")
    a.add_argument("csv")
    a.add_argument("--mode", choices=["powerlaw", "envelope", "extrapolate"], default="powerlaw")
    a.add_argument("--window", nargs=2, type=float, metavar=("T_MIN", "T_MAX"))
    a.add_argument("--N", type=int)
    a.add_argument("--T", type=float)
    a.add_argument("-o", "--out", default="-")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "simulate":
        return simulate(args.config, args.out, args.workers)
    try:
        report = analyze(args.csv, args.mode, args.window, args.N, args.T)
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except analysis.FitError as exc:
        print(f"error: fit failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    text = json.dumps(report, indent=2) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
