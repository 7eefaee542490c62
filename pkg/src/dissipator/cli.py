"""Command-line interface.

Exit codes: 0 success, 1 certificate failure, 2 usage error, 3 resolution or
timeout refusal. Diagnostics are single lines on stderr. Settings resolve as
flags over ``--config`` file over built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .bench import SweepConfig, emit_report, fit_log, fit_power, records_to_csv, report_dict, sweep
from .geometry import DomainError, best_lower_bound, omega, omega1_weierstrass_certificate
from .profile import ProfileError, ShearProfile, make_profile, validate_ratio
from .semigroup import (
    DEFAULT_THRESHOLD,
    DissipationTimeout,
    EvolutionOperator,
    certificate_rate,
    decay_curve,
    dissipation_time,
    gp_certificate,
)
from .spectral import MAX_MODES, ResolutionError, assemble, psi1_direct, required_modes

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_REFUSED = 0, 1, 2, 3

DEFAULTS = {
    "mode": "power",
    "alpha": 0.5,
    "terms": 4,
    "coeffs": None,
    "mean": 0.0,
    "delta": 0.1,
    "order": 1,
    "nu": 1e-3,
    "k": 1,
    "scale": 1.0,
    "modes": None,
    "t_max": None,
    "samples": 50,
    "threshold": DEFAULT_THRESHOLD,
    "variant": "R",
    "nu_grid": None,
    "delta_grid": None,
    "m_max": 5,
    "direct": None,  # psi: true, sweep: false
    "output": None,
    "format": "csv",
    "threads": None,
}


class UsageError(ValueError):
    pass


class Refusal(RuntimeError):
    pass


# --------------------------------------------------------------------------
# formatting


def fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g") if math.isfinite(v) else ("null" if math.isnan(v) else str(v))
    if v is None:
        return ""
    return str(v)


def dumps(obj) -> str:
    """JSON with floats at 17 significant digits."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, (bool, type(None))):
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return format(v, ".17g") if math.isfinite(v) else "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    return json.dumps(obj)


def _csv(rows, header) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# parser


def _floats(text: str) -> list[float]:
    """Comma list ``a,b,c`` or geometric range ``lo:hi:n``."""
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            return [float(x) for x in np.geomspace(float(lo), float(hi), int(n))]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def _add_profile(p):
    g = p.add_argument_group("profile")
    g.add_argument("--mode", choices=["power", "log", "explicit"], help="coefficient law (default power)")
    g.add_argument("--alpha", type=float, help="decay exponent of the coefficients, dimensionless (default 0.5)")
    g.add_argument("--terms", type=int, help="number of lacunary terms N (default 4)")
    g.add_argument("--coeffs", type=_floats, help="explicit amplitudes a_1..a_N, comma separated, velocity units")
    g.add_argument("--mean", type=float, help="constant added to u, velocity units (default 0)")


def _add_output(p, formats=("csv",)):
    g = p.add_argument_group("output")
    g.add_argument("--output", help="output file, UTF-8 (default stdout)")
    if len(formats) > 1:
        g.add_argument("--format", choices=formats, help="report format (default csv)")


def _add_flow(p):
    g = p.add_argument_group("flow")
    g.add_argument("--nu", type=float, help="viscosity, dimensionless (default 1e-3)")
    g.add_argument("--k", type=int, help="streamwise wavenumber, nonzero integer (default 1)")
    g.add_argument("--modes", type=int, help="Fourier truncation M, basis |m| <= M (default 4*3**N)")
    g.add_argument("--variant", choices=["R", "L"], help="R = i k u - nu d_yy; L adds nu k^2 (default R)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of settings; flags take precedence")
    common.add_argument(
        "--threads", type=int, default=argparse.SUPPRESS,
        help="worker processes (default $DISSIPATOR_THREADS, else logical cores)",
    )

    ap = argparse.ArgumentParser(
        prog="dissipator",
        description="Decay certificates for shear-flow drift-diffusion operators on the 2*pi torus.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    kw = dict(parents=[common], argument_default=argparse.SUPPRESS)

    p = sub.add_parser("profile", help="describe a profile as JSON", **kw)
    _add_profile(p)

    p = sub.add_parser("omega", help="window functional; CSV delta,order,x_star,c1,c2,value", **kw)
    _add_profile(p)
    p.add_argument("--delta", type=float, help="window half-width in y, radians (default 0.1)")
    p.add_argument("--order", type=int, choices=[0, 1], help="0 constant fit, 1 affine fit (default 1)")
    _add_output(p)

    p = sub.add_parser("psi", help="Psi_0 and Psi_1 of -d_yy + i*scale*u as JSON", **kw)
    _add_profile(p)
    p.add_argument("--scale", type=float, help="multiplier of u, i.e. k/nu, inverse velocity units (default 1)")
    p.add_argument("--modes", type=int, help="Fourier truncation M (default 4*3**N)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--direct", dest="direct", action="store_true", help="singular-value computation (default)")
    mode.add_argument("--lower", dest="direct", action="store_false", help="geometric lower bounds only")
    p.add_argument("--delta-grid", dest="delta_grid", type=_floats,
                   help="window half-widths for --lower, radians; list or lo:hi:n")
    _add_output(p)

    p = sub.add_parser("decay", help="propagator norms; CSV t,norm,gp_bound then a JSON summary", **kw)
    _add_profile(p)
    _add_flow(p)
    p.add_argument("--tmax", dest="t_max", type=float,
                   help="largest time, in the time units of nu (default 5*(pi/2+1)/rate)")
    p.add_argument("--samples", type=int, help="time samples including t=0 (default 50)")
    p.add_argument("--threshold", type=float, help="norm level defining the dissipation time (default e^-1)")
    _add_output(p)

    p = sub.add_parser("certify-gp", help="check norm <= exp(-t nu Psi_1 + pi/2); JSON", **kw)
    _add_profile(p)
    _add_flow(p)
    p.add_argument("--tmax", dest="t_max", type=float,
                   help="largest time, in the time units of nu (default 5*(pi/2+1)/rate)")
    p.add_argument("--samples", type=int, help="time samples including t=0 (default 50)")

    p = sub.add_parser("sweep", help="viscosity sweep with lower bounds and scaling fits", **kw)
    _add_profile(p)
    p.add_argument("--k", type=int, help="streamwise wavenumber, nonzero integer (default 1)")
    p.add_argument("--nu-grid", dest="nu_grid", type=_floats,
                   help="viscosities, dimensionless; list or lo:hi:n geometric (required)")
    p.add_argument("--direct", dest="direct", action="store_true",
                   help="also compute direct Psi_1 where M = 4*3**N <= 4096")
    _add_output(p, ("csv", "json"))

    p = sub.add_parser("certify-lemma52", help="omega_1(3^-m pi) against the lacunary constant; CSV m,lhs,rhs,pass", **kw)
    _add_profile(p)
    p.add_argument("--m-max", dest="m_max", type=int, help="largest scale index m (default 5)")
    _add_output(p)
    return ap


# --------------------------------------------------------------------------
# configuration


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc.msg} at line {exc.lineno}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    data.pop("subcommand", None)
    unknown = sorted(set(data) - set(DEFAULTS))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return data


def resolve(args: argparse.Namespace, env) -> dict:
    """Defaults, then the config file, then explicit flags."""
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "subcommand")}
    cfg = dict(DEFAULTS)
    cfg.update(load_config(getattr(args, "config", None)))
    cfg.update(flags)
    if cfg["threads"] is None:
        env_threads = env.get("DISSIPATOR_THREADS")
        if env_threads:
            try:
                cfg["threads"] = int(env_threads)
            except ValueError as exc:
                raise UsageError(f"DISSIPATOR_THREADS must be an integer, got {env_threads!r}") from exc
        else:
            cfg["threads"] = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
    if cfg["threads"] < 1:
        raise UsageError(f"threads must be >= 1, got {cfg['threads']}")
    return cfg


def _profile(cfg) -> ShearProfile:
    if cfg["mode"] != "explicit" and (cfg["terms"] is None or cfg["terms"] < 1):
        raise UsageError(f"terms must be >= 1, got {cfg['terms']}")
    return make_profile(cfg["mode"], cfg["alpha"], cfg["terms"], cfg["coeffs"], cfg["mean"])


def _positive(cfg, *names):
    for n in names:
        v = cfg[n]
        if v is None or not v > 0 or not math.isfinite(v):
            raise UsageError(f"{n} must be a positive finite number, got {v!r}")


def _modes(cfg, p) -> int:
    need = required_modes(p.terms)
    modes = cfg["modes"] if cfg["modes"] is not None else max(4 * 3**p.terms, 1)
    if modes < max(need, 1):
        raise UsageError(f"modes={modes} under-resolves a {p.terms}-term profile; need modes >= {need}")
    if modes > MAX_MODES:
        raise Refusal(f"modes={modes} exceeds the limit {MAX_MODES}")
    return modes


def _write(cfg, text, out):
    path = cfg["output"]
    if path is None:
        out.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from exc


# --------------------------------------------------------------------------
# subcommands


def cmd_profile(cfg, out) -> int:
    p = _profile(cfg)
    info = {
        "mode": p.mode,
        "alpha": p.alpha,
        "terms": p.terms,
        "coeffs": list(p.coeffs),
        "mean": p.mean,
        "ratio_ok": validate_ratio(p),
    }
    out.write(dumps(info) + "\n")
    return EXIT_OK


def cmd_omega(cfg, out) -> int:
    p = _profile(cfg)
    _positive(cfg, "delta")
    fit = omega(p, cfg["delta"], cfg["order"])
    _write(cfg, _csv([fit.row()], ("delta", "order", "x_star", "c1", "c2", "value")), out)
    return EXIT_OK


def _scaled(p: ShearProfile, s: float) -> ShearProfile:
    return ShearProfile(tuple(s * a for a in p.coeffs), mean=s * p.mean, mode=p.mode, alpha=p.alpha)


def cmd_psi(cfg, out) -> int:
    p = _profile(cfg)
    s = cfg["scale"]
    if s is None or not math.isfinite(s):
        raise UsageError(f"scale must be finite, got {s!r}")
    if cfg["direct"] is None or cfg["direct"]:
        modes = _modes(cfg, p)
        res = psi1_direct(assemble(p, modes, scale=s))
        _write(cfg, dumps(res.to_dict()) + "\n", out)
        return EXIT_OK
    grid = cfg["delta_grid"] or list(np.geomspace(3.0 ** (1 - p.terms) * math.pi, math.pi / 3, 8))
    if any(not d > 0 for d in grid):
        raise UsageError("delta_grid entries must be positive")
    q = _scaled(p, s)
    b0 = best_lower_bound(q, grid, 0)
    b1 = best_lower_bound(q, grid, 1)
    info = {
        "psi0_lower": b0.bound,
        "psi1_lower": b1.bound,
        "delta0_star": b0.delta,
        "delta1_star": b1.delta,
        "terms": p.terms,
    }
    _write(cfg, dumps(info) + "\n", out)
    return EXIT_OK


def _operator(cfg):
    p = _profile(cfg)
    _positive(cfg, "nu")
    if cfg["k"] == 0:
        raise UsageError("k must be a nonzero integer")
    modes = _modes(cfg, p)
    if cfg["samples"] < 2:
        raise UsageError(f"samples must be >= 2, got {cfg['samples']}")
    if cfg["t_max"] is not None:
        _positive(cfg, "t_max")
    return EvolutionOperator.from_profile(p, cfg["nu"], cfg["k"], modes, cfg["variant"])


def _curve(cfg, e):
    spec = psi1_direct(e.base)
    rate = certificate_rate(e, spec.psi1)
    t_max = cfg["t_max"] or 5.0 * (math.pi / 2 + 1.0) / rate
    return decay_curve(e, t_max, cfg["samples"], psi=rate), spec, rate, t_max


def cmd_decay(cfg, out) -> int:
    if not 0.0 < cfg["threshold"] < 1.0:
        raise UsageError(f"threshold must lie in (0, 1), got {cfg['threshold']!r}")
    e = _operator(cfg)
    c, spec, rate, _ = _curve(cfg, e)
    ok, margin = gp_certificate(c)
    try:
        tau = dissipation_time(e, cfg["threshold"], psi1=spec.psi1)
    except DissipationTimeout as exc:
        raise Refusal(f"{exc}; last bracket {exc.bracket}") from exc
    rows = zip(c.times, c.norms, c.gp_bound)
    _write(cfg, _csv(rows, ("t", "norm", "gp_bound")), out)
    out.write(dumps({"tau": tau, "psi": rate, "pass": ok, "margin": margin}) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_certify_gp(cfg, out) -> int:
    e = _operator(cfg)
    c, spec, rate, t_max = _curve(cfg, e)
    ok, margin = gp_certificate(c)
    info = {
        "pass": ok,
        "margin": margin,
        "psi1": spec.psi1,
        "rate": rate,
        "t_max": t_max,
        "samples": cfg["samples"],
        "modes": e.base.modes,
        "converged": spec.converged,
    }
    out.write(dumps(info) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sweep(cfg, out) -> int:
    if not cfg["nu_grid"]:
        raise UsageError("sweep needs --nu-grid")
    if cfg["mode"] not in ("power", "log"):
        raise UsageError("sweep needs --mode power or log")
    if cfg["format"] not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {cfg['format']!r}")
    k = cfg["k"]
    for nu in cfg["nu_grid"]:
        if not nu > 0 or nu / abs(k or 1) > 0.5 or k == 0:
            raise UsageError(f"need nu > 0, k != 0 and nu/|k| <= 1/2, got nu={nu!r}, k={k!r}")
    direct = bool(cfg["direct"])
    sc = SweepConfig(workers=cfg["threads"])
    records = sweep(cfg["mode"], cfg["alpha"], k, cfg["nu_grid"], direct, sc)
    fits = {}
    if len(records) >= 3:
        fit = fit_power if cfg["mode"] == "power" else fit_log
        fits["rate_lower"] = fit(records)
        if direct and all(r.rate_direct is not None for r in records):
            fits["rate_direct"] = fit(records, key="rate_direct")
    if cfg["output"] is not None:
        try:
            emit_report(records, fits, cfg["output"], cfg["format"], sc)
        except OSError as exc:
            raise UsageError(str(exc)) from exc
    elif cfg["format"] == "csv":
        out.write(records_to_csv(records))
    else:
        out.write(json.dumps(report_dict(records, fits, sc), indent=2) + "\n")
    return EXIT_OK


def cmd_certify_lemma52(cfg, out) -> int:
    p = _profile(cfg)
    if not validate_ratio(p):
        raise UsageError("profile violates 1 <= |a_n|/|a_{n+1}| <= 3")
    m_max = cfg["m_max"]
    if not 1 <= m_max <= p.terms:
        raise UsageError(f"m-max must lie in [1, {p.terms}], got {m_max}")
    rows = []
    for m in range(1, m_max + 1):
        lhs, rhs, ok = omega1_weierstrass_certificate(p, m)
        rows.append((m, lhs, rhs, ok))
    _write(cfg, _csv(rows, ("m", "lhs", "rhs", "pass")), out)
    return EXIT_OK if all(r[3] for r in rows) else EXIT_FAIL


COMMANDS = {
    "profile": cmd_profile,
    "omega": cmd_omega,
    "psi": cmd_psi,
    "decay": cmd_decay,
    "certify-gp": cmd_certify_gp,
    "sweep": cmd_sweep,
    "certify-lemma52": cmd_certify_lemma52,
}


def parse_and_dispatch(argv: Sequence[str] | None = None, env=None, out=None, err=None) -> int:
    env = os.environ if env is None else env
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = resolve(args, env)
        return COMMANDS[args.subcommand](cfg, out)
    except (UsageError, ProfileError, DomainError, ResolutionError, ValueError) as exc:
        err.write(f"dissipator {args.subcommand}: error: {_one_line(exc)}\n")
        return EXIT_USAGE
    except (Refusal, DissipationTimeout) as exc:
        err.write(f"dissipator {args.subcommand}: refused: {_one_line(exc)}\n")
        return EXIT_REFUSED


def _one_line(exc) -> str:
    return " ".join(str(exc).split())


def main() -> None:
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
