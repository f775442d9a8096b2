"""Command-line front end.

Every command prints its fully resolved configuration next to the results:
inside the document for ``--format json``, and for CSV either on stderr or
in ``<out>.config.json`` when ``--out`` is given.  Feeding that configuration
to ``legpos replay`` reproduces the output byte for byte.

Exit codes: 0 success, 1 a numerical check failed, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .amplitude import AmplitudeSpec, amplitude_value, expand_amplitude, min_coefficient, noise_floor
from .basis import BasisSpec, ScalarMode
from .quadrature import coefficients_by_quadrature
from .schoenberg import ConfigError, SchoenbergRun, stats_rows
from .search import BisectionConfig, InvalidBracket, critical_alpha, landscape

SCHEMA_VERSION = 1

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2

GLOBAL_DEFAULTS = {"mode": "float", "digits": 50, "seed": 0, "format": "csv", "out": None}


class UsageError(Exception):
    pass


def _global_options() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--mode", choices=["rational", "float"], default=argparse.SUPPRESS)
    p.add_argument("--digits", type=int, default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--format", choices=["csv", "json"], default=argparse.SUPPRESS)
    p.add_argument("--out", default=argparse.SUPPRESS)
    return p


def _amplitude_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--alpha", type=str, required=True)
    p.add_argument("--beta", type=str, default="2")
    p.add_argument("--gamma", type=str, default=None, help="defaults to beta + 1")
    p.add_argument("--d", type=int, default=2, help="sphere dimension of the basis")


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = argparse.ArgumentParser(prog="legpos", parents=[common],
                                     description="Legendre/Gegenbauer positivity tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", parents=[common], help="basis coefficients of the amplitude")
    _amplitude_options(p)

    p = sub.add_parser("critical-alpha", parents=[common], help="bisect alpha_crit(M, beta)")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--alpha-min", type=float, default=0.0)
    p.add_argument("--alpha-max", type=float, default=1.0)

    p = sub.add_parser("landscape", parents=[common], help="alpha_crit over an (M, beta) grid")
    p.add_argument("--M-min", type=int, default=0)
    p.add_argument("--M-max", type=int, required=True)
    p.add_argument("--beta-min", type=float, required=True)
    p.add_argument("--beta-max", type=float, required=True)
    p.add_argument("--beta-steps", type=int, default=1)
    p.add_argument("--gamma-offset", type=float, default=1.0, help="gamma = beta + offset")
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("schoenberg", parents=[common], help="Monte-Carlo Schoenberg test")
    p.add_argument("config", help="JSON problem configuration")

    p = sub.add_parser("quad-check", parents=[common],
                       help="compare recurrence and quadrature coefficients")
    _amplitude_options(p)
    p.add_argument("--tol", type=float, default=None, help="defaults to the mode's noise floor")

    p = sub.add_parser("replay", parents=[common], help="rerun a resolved configuration")
    p.add_argument("config")
    return parser


def _mode(cfg: dict) -> ScalarMode:
    try:
        return ScalarMode(cfg["mode"], cfg["digits"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _amplitude_spec(cfg: dict) -> AmplitudeSpec:
    try:
        return AmplitudeSpec(cfg["M"], cfg["alpha"], cfg["beta"], cfg["gamma"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def run_expand(cfg: dict):
    mode = _mode(cfg)
    spec = _amplitude_spec(cfg)
    try:
        basis = BasisSpec(cfg["d"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    v = expand_amplitude(spec, basis, mode)
    low = min_coefficient(v, noise_floor(mode))
    rows = [[n, mode.to_str(a)] for n, a in enumerate(v.coeffs)]
    summary = {
        "min_index": low.index,
        "min_value": mode.to_str(low.value),
        "verdict": "negative" if low.is_negative else "positive",
    }
    document = {"coefficients": [{"n": n, "a_n": a} for n, a in rows], **summary}
    return _csv(["n", "a_n"], rows), document, summary, EXIT_OK


def run_critical_alpha(cfg: dict):
    mode = _mode(cfg)
    try:
        config = BisectionConfig(cfg["alpha_min"], cfg["alpha_max"], cfg["epsilon"])
        basis = BasisSpec(cfg["d"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    gamma = cfg["gamma"] if cfg["gamma"] is not None else cfg["beta"] + 1
    try:
        res = critical_alpha(cfg["M"], cfg["beta"], gamma, basis, config, mode)
        value, status, code = repr(res.value), res.status, EXIT_OK
    except InvalidBracket as exc:
        value, status, code = "nan", f"error: {exc}", EXIT_CHECK
    row = [cfg["M"], repr(cfg["beta"]), repr(gamma), cfg["d"], value, status]
    header = ["M", "beta", "gamma", "d", "alpha_crit", "status"]
    document = dict(zip(header, row))
    return _csv(header, [row]), document, {"status": status}, code


def run_landscape(cfg: dict):
    mode = _mode(cfg)
    if cfg["beta_min"] > cfg["beta_max"]:
        raise UsageError("beta_min must not exceed beta_max")
    if cfg["M_min"] < 0 or cfg["M_min"] > cfg["M_max"]:
        raise UsageError("need 0 <= M_min <= M_max")
    if cfg["beta_steps"] < 1:
        raise UsageError("beta_steps must be >= 1")
    try:
        config = BisectionConfig(0.0, 1.0, cfg["epsilon"])
        basis = BasisSpec(cfg["d"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    steps = cfg["beta_steps"]
    if steps == 1:
        betas = [cfg["beta_min"]]
    else:
        width = cfg["beta_max"] - cfg["beta_min"]
        betas = [cfg["beta_min"] + width * i / (steps - 1) for i in range(steps)]
    offset = cfg["gamma_offset"]
    result = landscape(range(cfg["M_min"], cfg["M_max"] + 1), betas, lambda b: b + offset,
                       basis, config, mode, workers=cfg["workers"])
    document = result.to_dict()
    stab = result.stabilization()
    document["stabilization"] = [{"beta": b, **info} for b, info in stab.items()]
    summary = {"profile": document["profile"], "stabilization": document["stabilization"]}
    return result.to_csv(), document, summary, EXIT_OK


def run_schoenberg(cfg: dict):
    run = SchoenbergRun.from_config(cfg["problem"])
    stats = run.run()
    rows = stats_rows(stats, run.problem.d, run.problem.a0)
    header = ["n", "n_scaled", "mean_alpha", "std_alpha", "samples", "a0"]
    table = [[r["n"], repr(r["n_scaled"]), repr(r["mean_alpha"]), repr(r["std_alpha"]),
              r["samples"], repr(r["a0"])] for r in rows]
    return _csv(header, table), {"rows": rows}, {}, EXIT_OK


def run_quad_check(cfg: dict):
    if cfg["d"] != 2:
        raise UsageError("quad-check only supports the Legendre basis (d=2)")
    mode = _mode(cfg)
    spec = _amplitude_spec(cfg)
    tol = cfg["tol"] if cfg["tol"] is not None else noise_floor(
        mode if not mode.exact else ScalarMode.high_precision(mode.digits))
    recurrence = expand_amplitude(spec, BasisSpec(2), mode)
    degree = spec.M + 1
    quad_mode = mode if not mode.exact else ScalarMode.high_precision(mode.digits)
    quad = coefficients_by_quadrature(lambda x: amplitude_value(spec, x, quad_mode), degree + 1,
                                      degree, mode=quad_mode, degree=degree)
    diffs = [abs(quad_mode.convert(a) - b) for a, b in zip(recurrence.coeffs, quad.coeffs)]
    worst = max(diffs)
    passed = bool(worst <= tol)
    row = [spec.M, quad_mode.to_str(worst), repr(tol), "pass" if passed else "fail"]
    header = ["M", "max_discrepancy", "tolerance", "result"]
    document = dict(zip(header, row))
    return _csv(header, [row]), document, {"result": row[-1]}, EXIT_OK if passed else EXIT_CHECK


RUNNERS = {
    "expand": run_expand,
    "critical-alpha": run_critical_alpha,
    "landscape": run_landscape,
    "schoenberg": run_schoenberg,
    "quad-check": run_quad_check,
}

# argparse keys that are not part of a command's resolved configuration
_NON_CONFIG = {"command", "out", "config"}


def resolve(args: argparse.Namespace) -> dict:
    """Materialize every default into a flat configuration dictionary."""
    raw = vars(args)
    cfg = {"schema_version": SCHEMA_VERSION, "command": raw["command"]}
    for key, default in GLOBAL_DEFAULTS.items():
        if key != "out":
            cfg[key] = raw.get(key, default)
    for key, value in raw.items():
        if key not in _NON_CONFIG and key not in GLOBAL_DEFAULTS:
            cfg[key] = value
    if raw["command"] == "schoenberg":
        try:
            problem = json.loads(Path(raw["config"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {raw['config']}: {exc}") from None
        if isinstance(problem, dict):
            problem.setdefault("seed", cfg["seed"])
            problem.setdefault("tol_eig", 0.0)
        cfg["problem"] = problem
    return cfg


def execute(cfg: dict, out: str | None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    runner = RUNNERS.get(cfg.get("command"))
    if runner is None:
        raise UsageError(f"unknown command {cfg.get('command')!r}")
    table, document, summary, code = runner(cfg)
    config_doc = {"config": cfg, "summary": summary}
    if cfg["format"] == "json":
        text = json.dumps({"schema_version": SCHEMA_VERSION, "config": cfg, "result": document},
                          indent=2) + "\n"
        side = None
    else:
        text = table
        side = json.dumps(config_doc, indent=2) + "\n"
    if out:
        Path(out).write_text(text, newline="")
        if side is not None:
            Path(out + ".config.json").write_text(side)
    else:
        stdout.write(text)
        if side is not None:
            stderr.write(side)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            try:
                loaded = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read config {args.config}: {exc}") from None
            cfg = loaded.get("config", loaded)
        else:
            cfg = resolve(args)
        return execute(cfg, getattr(args, "out", None))
    except (UsageError, ConfigError) as exc:
        if isinstance(exc, ConfigError):
            for msg in exc.errors:
                print(f"config error: {msg}", file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
