"""Viscosity sweeps, scaling-law fits and report files.

For each viscosity the window functional of the unscaled profile is reused
through its degree-2 homogeneity, ``omega_1(delta, s*u) = s**2 omega_1(delta, u)``
with ``s = k/nu``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from . import __version__
from .geometry import bound_from_omega, omega, phi_inv, terms_for_delta
from .profile import make_profile
from .spectral import MAX_MODES, assemble, psi1_direct

COLUMNS = (
    "nu",
    "k",
    "alpha",
    "mode",
    "delta_star",
    "omega1",
    "psi1_lower",
    "psi1_direct",
    "rate_lower",
    "rate_direct",
    "lambda_tilde",
    "ratio",
    "converged",
)

SCHEMA_NAME = "sweep.v1"


class FitError(ValueError):
    """Too few or degenerate points for a least-squares fit."""


@dataclass(frozen=True)
class SweepConfig:
    """Numerical settings of :func:`sweep`.

    Attributes
    ----------
    lattice_per_triple : int
        ``delta_star`` is searched on the lattice ``pi 3**(-j/L)``.
    lattice_below, lattice_above : float
        Initial search window ``[dp 3**-below, dp 3**above]`` around the
        scaling-law width ``dp``, in powers of 3.
    max_lattice_steps : int
        Extensions allowed when the maximum sits on the window edge.
    extra_terms : int
        Terms kept beyond the minimum truncation for each width.
    omega_rtol : float
        Optimality gap of the search over window centres.
    modes_factor : int
        Direct values use ``modes_factor * 3**N`` Fourier modes.
    max_modes : int
        Larger discretisations are refused.
    spectral_rtol : float
        Accuracy of the direct ``lambda`` search.
    workers : int
        Processes used across viscosities.
    """

    lattice_per_triple: int = 8
    lattice_below: float = 0.0
    lattice_above: float = 2.5
    max_lattice_steps: int = 32
    extra_terms: int = 0
    omega_rtol: float = 1e-10
    modes_factor: int = 4
    max_modes: int = MAX_MODES
    spectral_rtol: float = 1e-6
    workers: int = 1

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SweepRecord:
    """One viscosity of a sweep; the first 13 fields are the CSV columns."""

    nu: float
    k: float
    alpha: float
    mode: str
    delta_star: float
    omega1: float
    psi1_lower: float
    psi1_direct: float | None
    rate_lower: float
    rate_direct: float | None
    lambda_tilde: float
    ratio: float
    converged: bool | None
    delta_scaling: float = field(default=math.nan, compare=False)
    omega1_scaling: float = field(default=math.nan, compare=False)
    terms: int = field(default=0, compare=False)
    note: str = field(default="", compare=False)

    @property
    def c1_effective(self) -> float:
        """``delta * omega_1(delta, k u / nu)`` at the scaling-law width."""
        return self.delta_scaling * self.omega1_scaling

    def row(self) -> dict:
        return {c: getattr(self, c) for c in COLUMNS}

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FitResult:
    exponent: float
    intercept: float
    r_squared: float
    n_points: int

    def to_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# scaling laws


def delta_scaling(mode: str, alpha: float, nu: float, k: float) -> float:
    """Window width of the scaling argument for the given viscosity."""
    q = nu / abs(k)
    if mode == "power":
        return q ** (1.0 / (alpha + 2.0))
    if mode == "log":
        return math.sqrt(q) * math.log(1.0 / q) ** (alpha / 2.0)
    raise ValueError(f"mode must be 'power' or 'log', got {mode!r}")


def lambda_tilde(mode: str, alpha: float, nu: float, k: float) -> float:
    """Predicted decay rate."""
    k = abs(k)
    if mode == "power":
        return nu ** (alpha / (alpha + 2.0)) * k ** (2.0 / (alpha + 2.0))
    if mode == "log":
        return k * math.log(k / nu) ** (-alpha)
    raise ValueError(f"mode must be 'power' or 'log', got {mode!r}")


# --------------------------------------------------------------------------
# sweep


_OMEGA_CACHE: dict = {}


def _omega_unscaled(
    mode: str, alpha: float, delta: float, rtol: float, extra: int = 0
) -> tuple[float, int]:
    """``omega_1(delta, u_N)`` for the profile truncated at ``N = N(delta) + extra``."""
    n = terms_for_delta(delta) + extra
    key = (mode, float(alpha), n, delta, rtol)
    if key not in _OMEGA_CACHE:
        _OMEGA_CACHE[key] = omega(make_profile(mode, alpha, n), delta, 1, rtol=rtol).value
    return _OMEGA_CACHE[key], n


def _check_args(mode, alpha, k, nu_list):
    if mode not in ("power", "log"):
        raise ValueError(f"mode must be 'power' or 'log', got {mode!r}")
    if k == 0 or int(k) != k:
        raise ValueError(f"k must be a nonzero integer, got {k!r}")
    nu_list = [float(nu) for nu in nu_list]
    if not nu_list:
        raise ValueError("nu_list must be non-empty")
    for nu in nu_list:
        if not nu > 0:
            raise ValueError(f"nu must be positive, got {nu!r}")
        if nu / abs(k) > 0.5:
            raise ValueError(f"need nu/|k| <= 1/2, got nu={nu!r}, k={k!r}")
    make_profile(mode, alpha, 1)  # validates alpha
    return nu_list


def _lattice_delta(j: int, per_triple: int) -> float:
    return math.pi * 3.0 ** (-j / per_triple)


def _best_delta(mode, alpha, s, dp, cfg):
    """Largest lower bound over widths on the lattice ``pi 3**(-j/L)``.

    All lattice points within ``[dp 3**-below, dp 3**above]`` are tried and
    the window grows while the maximum sits on its edge. The lattice is
    shared by all records, so cached window functionals are reused across
    viscosities. Returns the best ``(bound, N)`` and the pair at ``dp``.
    """
    per = cfg.lattice_per_triple

    def bound(d):
        om, n = _omega_unscaled(mode, alpha, d, cfg.omega_rtol, cfg.extra_terms)
        return bound_from_omega(d, s * s * om, 1), n

    at_scaling = bound(dp)
    j0 = round(per * math.log(math.pi / dp, 3.0))
    lo = max(0, j0 - round(per * cfg.lattice_above))
    hi = j0 + round(per * cfg.lattice_below)
    seen = {j: bound(_lattice_delta(j, per)) for j in range(lo, hi + 1)}
    for _ in range(cfg.max_lattice_steps):
        jb = max(seen, key=lambda j: seen[j][0].bound)
        if jb == min(seen) and jb > 0:
            seen[jb - 1] = bound(_lattice_delta(jb - 1, per))
        elif jb == max(seen):
            seen[jb + 1] = bound(_lattice_delta(jb + 1, per))
        else:
            break
    best = max(list(seen.values()) + [at_scaling], key=lambda t: t[0].bound)
    return best, at_scaling


def sweep_record(
    mode: str,
    alpha: float,
    k: float,
    nu: float,
    use_direct: bool = False,
    config: SweepConfig | None = None,
) -> SweepRecord:
    """Lower bound (and optionally the direct value) for one viscosity.

    Each window width uses the profile truncated at ``N(delta)`` terms (the
    finest retained mode resolves a third of the window); ``terms`` reports
    the truncation at ``delta_star``.
    """
    cfg = config or SweepConfig()
    s = k / nu
    dp = delta_scaling(mode, alpha, nu, k)
    (best, n_terms), (b_scaling, _) = _best_delta(mode, alpha, s, dp, cfg)
    p = make_profile(mode, alpha, n_terms)
    omega_p = b_scaling.omega
    psi_low = best.bound
    rate_low = nu * psi_low
    lt = lambda_tilde(mode, alpha, nu, k)

    psi_dir = rate_dir = converged = None
    note = ""
    if use_direct:
        modes = cfg.modes_factor * 3**n_terms
        if modes > cfg.max_modes:
            note = f"resolution: direct value needs {modes} modes > {cfg.max_modes}"
        else:
            res = psi1_direct(assemble(p, modes, scale=s), rtol=cfg.spectral_rtol)
            psi_dir, converged = res.psi1, res.converged
            rate_dir = nu * psi_dir
    return SweepRecord(
        nu=nu,
        k=float(k),
        alpha=float(alpha),
        mode=mode,
        delta_star=best.delta,
        omega1=best.omega,
        psi1_lower=psi_low,
        psi1_direct=psi_dir,
        rate_lower=rate_low,
        rate_direct=rate_dir,
        lambda_tilde=lt,
        ratio=rate_low / lt,
        converged=converged,
        delta_scaling=dp,
        omega1_scaling=omega_p,
        terms=n_terms,
        note=note,
    )


def sweep(
    mode: str,
    alpha: float,
    k: float,
    nu_list: Sequence[float],
    use_direct: bool = False,
    config: SweepConfig | None = None,
) -> list[SweepRecord]:
    """One :class:`SweepRecord` per viscosity, in the given order.

    Raises
    ------
    ValueError
        For an empty list, ``nu/|k| > 1/2`` or invalid profile parameters.
    """
    nu_list = _check_args(mode, alpha, k, nu_list)
    cfg = config or SweepConfig()
    if cfg.workers > 1 and len(nu_list) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futs = [
                pool.submit(sweep_record, mode, alpha, k, nu, use_direct, cfg)
                for nu in nu_list
            ]
            return [f.result() for f in futs]
    return [sweep_record(mode, alpha, k, nu, use_direct, cfg) for nu in nu_list]


def dominance_floor(r: SweepRecord) -> float:
    """``phi^-1(C1_eff)**2 * lambda_tilde``, a floor for ``rate_lower``."""
    return phi_inv(r.c1_effective) ** 2 * r.lambda_tilde


# --------------------------------------------------------------------------
# fits


def _linfit(x, y) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise FitError(f"need at least 3 points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FitError("non-finite values in fit data")
    if np.ptp(x) <= 1e-12 * max(1.0, float(np.max(np.abs(x)))):
        raise FitError("degenerate spread in the abscissa")
    res = stats.linregress(x, y)
    r2 = min(1.0, max(0.0, float(res.rvalue) ** 2))
    return FitResult(float(res.slope), float(res.intercept), r2, int(x.size))


def _rates(records, key):
    vals = [getattr(r, key) for r in records]
    if any(v is None for v in vals):
        raise FitError(f"{key} missing on some records")
    if any(not v > 0 for v in vals):
        raise FitError(f"{key} must be positive for a log fit")
    return np.array(vals, dtype=float)


def _same(records, attr):
    return len({getattr(r, attr) for r in records}) == 1


def fit_power(records: Sequence[SweepRecord], key: str = "rate_lower") -> FitResult:
    """Slope of ``ln(rate)`` against ``ln(nu)``."""
    records = list(records)
    if len(records) < 3:
        raise FitError(f"need at least 3 records, got {len(records)}")
    if any(r.mode != "power" for r in records):
        raise FitError("fit_power needs power-mode records")
    if not (_same(records, "k") and _same(records, "alpha")):
        raise FitError("records must share k and alpha")
    nu = np.array([r.nu for r in records])
    return _linfit(np.log(nu), np.log(_rates(records, key)))


def fit_log(records: Sequence[SweepRecord], key: str = "rate_lower") -> FitResult:
    """Slope of ``ln(rate/|k|)`` against ``ln(ln(|k|/nu))``."""
    records = list(records)
    if len(records) < 3:
        raise FitError(f"need at least 3 records, got {len(records)}")
    if any(r.mode != "log" for r in records):
        raise FitError("fit_log needs log-mode records")
    if not (_same(records, "k") and _same(records, "alpha")):
        raise FitError("records must share k and alpha")
    k = np.array([abs(r.k) for r in records])
    nu = np.array([r.nu for r in records])
    return _linfit(np.log(np.log(k / nu)), np.log(_rates(records, key) / k))


# --------------------------------------------------------------------------
# reports


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def records_to_csv(records: Iterable[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        w.writerow([_fmt(v) for v in r.row().values()])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def report_dict(records, fits=None, config=None, timestamp=True) -> dict:
    """JSON report with config echo and disclosures of derived constants."""
    records = list(records)
    c1 = [r.c1_effective for r in records if math.isfinite(r.c1_effective)]
    out = {
        "schema": SCHEMA_NAME,
        "tool": "dissipator",
        "version": __version__,
        "config": config.to_dict() if isinstance(config, SweepConfig) else (config or {}),
        "disclosures": {
            "c1_effective_min": min(c1) if c1 else None,
            "epsilon_from_c1": phi_inv(min(c1)) ** 2 if c1 else None,
            "phi": "36 x tan x",
            "rate_direct_fit_gated": False,
        },
        "columns": list(COLUMNS),
        "records": [{c: _json_value(v) for c, v in r.row().items()} for r in records],
        "fits": {name: f.to_dict() for name, f in (fits or {}).items()},
    }
    if timestamp:
        out["generated_at"] = datetime.now(timezone.utc).isoformat()
    return out


def emit_report(records, fits, path, format: str = "csv", config=None) -> None:
    """Write records (and fits, for JSON) to ``path``.

    Raises
    ------
    ValueError
        Unknown format.
    OSError
        With the path in the message.
    """
    records = list(records)
    if format == "csv":
        text = records_to_csv(records)
    elif format == "json":
        text = json.dumps(report_dict(records, fits, config), indent=2) + "\n"
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {format!r}")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report to {os.fspath(path)}: {exc.strerror}") from exc


_FLOAT_COLS = {
    "nu", "k", "alpha", "delta_star", "omega1", "psi1_lower", "psi1_direct",
    "rate_lower", "rate_direct", "lambda_tilde", "ratio",
}


def _parse_cell(col, text):
    if text == "":
        return None
    if col in _FLOAT_COLS:
        return float(text)
    if col == "converged":
        return {"true": True, "false": False}[text]
    return text


def _record_from_row(row: dict) -> SweepRecord:
    names = [f.name for f in fields(SweepRecord)][: len(COLUMNS)]
    return SweepRecord(**{n: row[n] for n in names})


def read_report(path, format: str | None = None) -> list[SweepRecord]:
    """Parse a report written by :func:`emit_report`."""
    fmt = format or ("json" if os.fspath(path).endswith(".json") else "csv")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if fmt == "json":
        rows = json.loads(text)["records"]
        return [_record_from_row(r) for r in rows]
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ValueError(f"unexpected CSV header in {os.fspath(path)}")
    return [_record_from_row({c: _parse_cell(c, row[c]) for c in COLUMNS}) for row in reader]


def schema_path() -> str:
    return os.path.join(os.path.dirname(__file__), "schemas", "sweep.v1.json")
