"""Window functionals of the stream function and the resulting spectral bounds.

``omega(p, delta, order)`` is the smallest L2 distance, over windows
``[x - delta, x + delta]``, between ``psi`` and constants (order 0) or affine
functions (order 1). Writing ``y = x + delta*t`` each lacunary mode of
``psi`` splits into an even part ``cos(p t)`` and an odd part ``sin(p t)``
(``p = 3**n delta``). The constant fit only touches even parts and the slope
only odd parts, so the window energy is the quadratic form

    delta * (A^T E A + B^T O B),   A_n = -b_n cos(3**n x),  B_n = b_n sin(3**n x)

with Gram matrices ``E``, ``O`` that depend on ``delta`` alone. The Gram
entries are exact integrals; near-degenerate entries (small ``p``) come from
their power series instead of the trigonometric closed forms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .profile import ShearProfile, validate_ratio
from .search import golden_section

HALF_PI = 0.5 * math.pi
PERIOD = 2.0 * math.pi / 3.0  # every mode 3**n, n >= 1, has this period
LACUNARY_CONSTANT = 9.0 * math.pi / 8000.0

_SERIES_CUTOFF = 2.0
_SERIES_TERMS = 16
_POLISH = 24
_DEPTH = 1e-9  # smallest cell, relative to the finest-mode spacing
_SMOOTH = 2.0  # terms with w*r below this join the smooth part of the bound
_START = 1.0  # initial cell half-width times the finest frequency
_DOMAIN = math.pi / 6.0  # fundamental domain of the window energy


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class TruncationWarning(UserWarning):
    """Profile truncation too coarse for the requested window width."""


@dataclass(frozen=True)
class WindowFit:
    delta: float
    order: int
    x_star: float
    c1: float
    c2: float
    value: float
    terms: int = 0
    truncated: bool = False
    lower: float = 0.0

    def row(self):
        return (self.delta, self.order, self.x_star, self.c1, self.c2, self.value)


@dataclass(frozen=True)
class PhiBound:
    delta: float
    omega: float
    phi_arg: float
    bound: float
    order: int = 1
    fit: WindowFit | None = field(default=None, compare=False, repr=False)


# --------------------------------------------------------------------------
# phi and its inverse


def phi(x: float) -> float:
    """``36 x tan x`` on ``[0, pi/2)``."""
    if not 0.0 <= x < HALF_PI:
        raise DomainError(f"phi is defined on [0, pi/2), got {x!r}")
    return 36.0 * x * math.tan(x)


def _dphi(x):
    t = math.tan(x)
    return 36.0 * (t + x * (1.0 + t * t))


def phi_inv(v: float, rtol: float = 1e-12) -> float:
    """Inverse of :func:`phi`; bracketed Newton with bisection fallback."""
    if not v >= 0.0:
        raise DomainError(f"phi_inv needs v >= 0, got {v!r}")
    if v == 0.0:
        return 0.0
    if math.isinf(v):
        return math.nextafter(HALF_PI, 0.0)
    tol = rtol * v
    # phi(x) >= 36 x**2, so sqrt(v/36) bounds the root from above
    lo, hi = 0.0, min(math.nextafter(HALF_PI, 0.0), math.sqrt(v / 36.0))
    x = min(math.atan(v / 36.0), HALF_PI * v / (v + 36.0))
    if v < 36.0:
        x = hi  # Newton on the convex phi decreases monotonically from above
    best, best_err = x, math.inf
    for _ in range(200):
        f = 36.0 * x * math.tan(x) - v
        if abs(f) < best_err:
            best, best_err = x, abs(f)
        if abs(f) <= tol:
            return x
        if f > 0:
            hi = x
        else:
            lo = x
        if math.nextafter(lo, hi) >= hi:
            break
        xn = x - f / _dphi(x)
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        x = xn
    # bracket exhausted at the resolution of binary64
    for cand in (lo, hi):
        if cand < HALF_PI:
            err = abs(36.0 * cand * math.tan(cand) - v)
            if err < best_err:
                best, best_err = cand, err
    return best


# --------------------------------------------------------------------------
# Gram matrices


def _sinc(x):
    return np.sinc(np.asarray(x, dtype=float) / math.pi)


def _odd_moment(p):
    """``J(p) = int_{-1}^{1} t sin(p t) dt``."""
    p = np.asarray(p, dtype=float)
    out = np.empty_like(p)
    small = np.abs(p) < 0.5
    ps = p[small]
    acc = np.zeros_like(ps)
    term = ps.copy()
    for j in range(12):
        acc += term / (2 * j + 3)
        term = -term * ps * ps / ((2 * j + 2) * (2 * j + 3))
    out[small] = 2.0 * acc
    pl = p[~small]
    out[~small] = 2.0 * (np.sin(pl) - pl * np.cos(pl)) / (pl * pl)
    return out


def _series_basis(p, odd):
    """Columns ``(-1)^j p^(2j[+1]) / (2j[+1])!`` for j = 0..J-1."""
    p = np.asarray(p, dtype=float)
    cols = np.empty((p.size, _SERIES_TERMS))
    k0 = 1 if odd else 0
    term = p.copy() if odd else np.ones_like(p)
    for j in range(_SERIES_TERMS):
        cols[:, j] = term
        k = 2 * j + k0
        term = -term * p * p / ((k + 1) * (k + 2))
    return cols


def _series_weights():
    j = np.arange(_SERIES_TERMS)[:, None]
    l = np.arange(_SERIES_TERMS)[None, :]
    even = 2.0 / (2 * j + 2 * l + 1) - 2.0 / ((2 * j + 1) * (2 * l + 1))
    odd0 = 2.0 / (2 * j + 2 * l + 3)
    odd1 = odd0 - 6.0 / ((2 * j + 3) * (2 * l + 3))
    return even, odd0, odd1


_W_EVEN, _W_ODD0, _W_ODD1 = _series_weights()


def gram_matrices(scaled_freq, order: int):
    """Even and odd Gram matrices on ``t in [-1, 1]`` for ``p = kappa*delta``.

    ``E[n, m] = int (cos p_n t - sinc p_n)(cos p_m t - sinc p_m) dt``;
    ``O[n, m] = int r_n r_m dt`` where ``r`` is ``sin(p t)`` (order 0) or
    its residual after projection onto ``t`` (order 1).
    """
    p = np.asarray(scaled_freq, dtype=float)
    pn, pm = np.meshgrid(p, p, indexing="ij")
    sp = _sinc(p)
    diff = _sinc(pn - pm)
    summ = _sinc(pn + pm)
    even = diff + summ - 2.0 * np.outer(sp, sp)
    odd = diff - summ
    if order == 1:
        jp = _odd_moment(p)
        odd = odd - 1.5 * np.outer(jp, jp)

    small = p <= _SERIES_CUTOFF
    if np.any(small):
        idx = np.flatnonzero(small)
        ce = _series_basis(p[idx], odd=False)
        co = _series_basis(p[idx], odd=True)
        w_odd = _W_ODD1 if order == 1 else _W_ODD0
        sub = np.ix_(idx, idx)
        even[sub] = ce @ _W_EVEN @ ce.T
        odd[sub] = co @ w_odd @ co.T
    return even, odd


# --------------------------------------------------------------------------
# omega


def fine_spacing(terms):
    """Quarter of the oscillation length of the finest mode ``3**(N+1)``."""
    return 2.0 * math.pi * 3.0 ** (-(terms + 1)) / 4.0


class _WindowObjective:
    """Window energy ``F(x)`` (without the ``delta`` factor) for one profile.

    ``F`` is also kept as a sparse cosine sum ``const + sum_t c_t cos(w_t x)``
    over the frequencies ``kappa_j -+ kappa_i``, which gives rigorous bounds
    on intervals of centres.
    """

    def __init__(self, p: ShearProfile, delta: float, order: int):
        self.kappa = p.frequencies
        self.b = p.psi_amplitudes
        self.even, self.odd = gram_matrices(self.kappa * delta, order)
        self.n = len(self.b)
        i, j = np.triu_indices(self.n)
        bb = np.where(i == j, 1.0, 2.0) * self.b[i] * self.b[j]
        c_diff = 0.5 * bb * (self.even[i, j] + self.odd[i, j])
        c_sum = 0.5 * bb * (self.even[i, j] - self.odd[i, j])
        off = i != j
        self.terms_i = np.concatenate([i[off], i]).astype(np.int64)
        self.terms_j = np.concatenate([j[off], j]).astype(np.int64)
        self.terms_sum = np.concatenate([np.zeros(off.sum()), np.ones(i.size)]).astype(np.int64)
        self.terms_c = np.concatenate([c_diff[off], c_sum])
        self.terms_w = np.where(
            self.terms_sum == 1,
            self.kappa[self.terms_i] + self.kappa[self.terms_j],
            self.kappa[self.terms_j] - self.kappa[self.terms_i],
        )

    def __call__(self, x):
        return kernels.window_energy(x, self.kappa, self.b, self.even, self.odd)

    def scalar(self, x):
        return float(self(np.array([x]))[0])

    def lower_bounds(self, x, r, fl, fr):
        """Lower bounds of ``F`` on ``[x - r, x + r]`` given ``F(x -+ r)``."""
        a = self.terms_w * r
        smooth = a <= _SMOOTH
        order = np.argsort(~smooth, kind="stable")
        n_low = int(np.sum(smooth))
        c, w, a = self.terms_c[order], self.terms_w[order], a[order]
        curv = float(np.sum(np.abs(c[:n_low]) * w[:n_low] ** 2))
        return kernels.interval_lower(
            x, r, fl, fr, self.kappa, self.terms_i[order], self.terms_j[order],
            self.terms_sum[order], c, n_low, np.cos(a), np.sin(a),
            np.cos(np.minimum(a, math.pi)), curv,
        )


def _search_centre(obj: _WindowObjective, delta: float, rtol: float):
    """Certified global minimisation of the window energy over centres.

    ``psi`` without its linear part is even, and shifting by ``pi/3`` flips
    its sign, so ``F`` is even with period ``pi/3`` and the search runs over
    ``[0, pi/6]``. That interval is covered by cells of half-width about
    ``_START / kappa_N`` which are trisected level by level, with ``F`` known
    at every cell endpoint. A cell is discarded once its lower bound exceeds
    the best value found minus ``rtol`` times it. Cells still alive at
    ``_DEPTH`` times the finest-mode spacing (a flat minimum at rounding
    level) are polished by golden-section search.

    Returns
    -------
    x, value, lower : float
        Minimiser, minimum and a certified lower bound for the minimum.
    """
    h_stop = fine_spacing(obj.n) * _DEPTH
    n0 = max(3, int(math.ceil(_DOMAIN * obj.kappa[-1] / (2.0 * _START))))
    r = 0.5 * _DOMAIN / n0
    nodes = np.linspace(0.0, _DOMAIN, n0 + 1)
    fn = obj(nodes)
    i = int(np.argmin(fn))
    best_x, best_f = float(nodes[i]), float(fn[i])
    xl, fl, fr = nodes[:-1], fn[:-1], fn[1:]
    lower = math.inf
    while True:
        lb = obj.lower_bounds(xl + r, r, fl, fr)
        keep = lb <= best_f - rtol * abs(best_f)
        if not np.all(keep):
            lower = min(lower, float(np.min(lb[~keep])))
        xl, fl, fr, lb = xl[keep], fl[keep], fr[keep], lb[keep]
        if xl.size == 0:
            break
        if r <= h_stop:
            lower = min(lower, float(np.min(lb)))
            for j in np.argsort(np.minimum(fl, fr), kind="stable")[:_POLISH]:
                x, fx = golden_section(obj.scalar, xl[j], xl[j] + 2.0 * r, xtol=1e-3 * r)
                if fx < best_f:
                    best_x, best_f = x, fx
            break
        w = 2.0 * r / 3.0
        p1, p2 = xl + w, xl + 2.0 * w
        f12 = obj(np.concatenate([p1, p2]))
        f1, f2 = f12[: xl.size], f12[xl.size :]
        j = int(np.argmin(f12))
        if f12[j] < best_f:
            best_x, best_f = float(np.concatenate([p1, p2])[j]), float(f12[j])
        xl = np.concatenate([xl, p1, p2])
        fl, fr = np.concatenate([fl, f1, f2]), np.concatenate([f1, f2, fr])
        r /= 3.0
    return best_x, best_f, min(lower, best_f)


def needs_more_terms(p: ShearProfile, delta: float) -> bool:
    """True when ``3**-N pi > delta/3`` (finest mode coarser than the window)."""
    return 3.0 ** (-p.terms) * math.pi > delta / 3.0


def terms_for_delta(delta: float) -> int:
    """Smallest ``N`` with ``3**-N pi <= delta/3``."""
    n = max(1, math.ceil(math.log(3.0 * math.pi / delta, 3.0)))
    while 3.0 ** (-n) * math.pi > delta / 3.0:
        n += 1
    return n


def omega(
    p: ShearProfile,
    delta: float,
    order: int = 1,
    rtol: float = 1e-10,
) -> WindowFit:
    """Window functional ``omega_order(delta, u)`` with minimiser and fit.

    Parameters
    ----------
    p : ShearProfile
    delta : float
        Half-width of the window.
    order : {0, 1}
        Constant (0) or affine (1) fit.
    rtol : float
        Relative optimality gap at which the search over centres stops.

    Returns
    -------
    WindowFit
        ``value`` is the smallest energy found; ``lower`` is a certified
        lower bound for the true minimum.
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta!r}")
    if order not in (0, 1):
        raise DomainError(f"order must be 0 or 1, got {order!r}")
    if order == 0 and p.mean != 0.0:
        raise DomainError("omega of order 0 requires a mean-zero profile")
    truncated = needs_more_terms(p, delta)
    if truncated:
        warnings.warn(
            f"{p.terms} terms under-resolve delta={delta:.3g}; "
            f"need {terms_for_delta(delta)}",
            TruncationWarning,
            stacklevel=2,
        )
    if p.terms == 0:
        return WindowFit(delta, order, 0.0, 0.0, p.mean if order else 0.0, 0.0, 0, truncated, 0.0)

    obj = _WindowObjective(p, delta, order)
    x, energy, lower = _search_centre(obj, delta, rtol)
    value = delta * max(energy, 0.0)

    pd = obj.kappa * delta
    amp_even = -obj.b * np.cos(obj.kappa * x)
    amp_odd = obj.b * np.sin(obj.kappa * x)
    const_local = float(amp_even @ _sinc(pd))
    slope = 0.0
    if order == 1:
        slope = 1.5 * float(amp_odd @ _odd_moment(pd)) / delta
        const_local += p.mean * x
        slope += p.mean
    return WindowFit(
        delta=delta,
        order=order,
        x_star=x,
        c1=const_local - slope * x,
        c2=slope,
        value=value,
        terms=p.terms,
        truncated=truncated,
        lower=delta * max(lower, 0.0),
    )


# --------------------------------------------------------------------------
# lower bounds


def bound_from_omega(delta: float, omega_value: float, order: int = 1) -> PhiBound:
    arg = delta * omega_value
    return PhiBound(delta, omega_value, arg, (phi_inv(arg) / delta) ** 2, order)


def psi_lower_bound(p: ShearProfile, delta: float, order: int = 1, **kw) -> PhiBound:
    """Lower bound ``(phi^-1(delta*omega)/delta)**2`` on ``Psi_0``/``Psi_1``."""
    fit = omega(p, delta, order, **kw)
    b = bound_from_omega(delta, fit.value, order)
    return PhiBound(b.delta, b.omega, b.phi_arg, b.bound, order, fit)


def best_lower_bound(p: ShearProfile, deltas: Sequence[float], order: int = 1, **kw) -> PhiBound:
    """The largest :func:`psi_lower_bound` over a list of window widths."""
    deltas = list(deltas)
    if not deltas:
        raise ValueError("deltas must be non-empty")
    best = None
    for d in deltas:
        b = psi_lower_bound(p, d, order, **kw)
        if best is None or b.bound > best.bound:
            best = b
    return best


def omega1_weierstrass_certificate(p: ShearProfile, m: int, **kw):
    """Check ``omega_1(3**-m pi, u) >= (9 pi / 8000) 3**(-3m) a_m**2``.

    The constant composes ``(3/10)**2 pi`` from the lacunary lower bound on
    the third difference with the factor 80 from Cauchy-Schwarz over the
    weights (1, 3, 3, 1) on four shifted windows.

    Returns
    -------
    lhs, rhs : float
    passed : bool
    """
    if not validate_ratio(p):
        raise ValueError("profile violates 1 <= |a_n|/|a_{n+1}| <= 3")
    if not 1 <= m <= p.terms:
        raise ValueError(f"m must lie in [1, {p.terms}], got {m}")
    lhs = omega(p, 3.0 ** (-m) * math.pi, 1, **kw).value
    rhs = LACUNARY_CONSTANT * 3.0 ** (-3 * m) * p.coeffs[m - 1] ** 2
    return lhs, rhs, bool(lhs >= rhs)
