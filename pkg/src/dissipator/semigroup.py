"""Propagator norms of the per-wavenumber advection-diffusion semigroup.

For a streamwise wavenumber ``k`` the generator is ``R = i k u - nu d^2/dy^2``
(hypoelliptic part) or ``L = R + nu k^2``. Both are ``nu`` times ``H`` for the
profile ``(k/nu) u``, up to the scalar shift, so they reuse the spectral
discretisation and its block structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .geometry import HALF_PI, DomainError
from .profile import ShearProfile
from .spectral import OperatorDisc, SpectralResult, assemble, psi1_direct

DEFAULT_THRESHOLD = math.exp(-1.0)


class DissipationTimeout(RuntimeError):
    """The norm did not reach the threshold before the time cap."""

    def __init__(self, message: str, bracket: tuple[float, float]):
        super().__init__(message)
        self.bracket = bracket


@dataclass(frozen=True)
class EvolutionOperator:
    """Generator ``R`` or ``L`` on one streamwise wavenumber.

    Attributes
    ----------
    base : OperatorDisc
        Discretisation of ``H`` for the profile ``(k/nu) u``.
    nu : float
        Viscosity.
    k : int
        Streamwise wavenumber (0 only for operators from :meth:`from_matrix`).
    variant : {"R", "L"}
    """

    base: OperatorDisc
    nu: float
    k: int
    variant: str = "R"

    def __post_init__(self):
        if not self.nu > 0:
            raise DomainError(f"nu must be positive, got {self.nu!r}")
        if self.variant not in ("R", "L"):
            raise DomainError(f"variant must be 'R' or 'L', got {self.variant!r}")

    @classmethod
    def from_profile(
        cls, p: ShearProfile, nu: float, k: int, modes: int, variant: str = "R"
    ) -> "EvolutionOperator":
        if int(k) != k or k == 0:
            raise DomainError(f"k must be a nonzero integer, got {k!r}")
        if not nu > 0:
            raise DomainError(f"nu must be positive, got {nu!r}")
        return cls(assemble(p, modes, scale=k / nu), float(nu), int(k), variant)

    @classmethod
    def from_matrix(cls, generator) -> "EvolutionOperator":
        """Wrap an arbitrary generator ``G`` (so ``nu = 1``, ``k = 0``)."""
        return cls(OperatorDisc.from_matrix(generator), 1.0, 0, "R")

    @property
    def shift(self) -> float:
        return self.nu * self.k**2 if self.variant == "L" else 0.0

    @cached_property
    def generator_blocks(self) -> tuple:
        out = []
        for idx, b in self.base.blocks:
            a = b.toarray() if sp.issparse(b) else np.array(b)
            if np.iscomplexobj(a) and not np.any(a.imag):
                a = a.real.copy()
            a = self.nu * a
            a[np.diag_indices_from(a)] += self.shift
            out.append((idx, a))
        return tuple(out)

    @cached_property
    def generator(self) -> np.ndarray:
        """Dense generator matrix in the full basis."""
        n = self.base.dim
        out = np.zeros((n, n), dtype=complex)
        for idx, a in self.generator_blocks:
            out[np.ix_(idx, idx)] = a
        return out


def propagator_norm(e: EvolutionOperator, t: float) -> float:
    """``||exp(-t G)||_2`` by scaling-and-squaring and a full SVD per block."""
    if not t >= 0:
        raise DomainError(f"t must be nonnegative, got {t!r}")
    if t == 0:
        return 1.0
    best = 0.0
    for _, a in e.generator_blocks:
        ex = scipy.linalg.expm(-t * a)
        best = max(best, float(scipy.linalg.svdvals(ex, check_finite=False)[0]))
    return best


def time_grid(t_max: float, samples: int) -> np.ndarray:
    """``t = 0`` followed by ``samples - 1`` geometric points in ``[t_max 1e-4, t_max]``."""
    return np.concatenate(([0.0], np.geomspace(t_max * 1e-4, t_max, samples - 1)))


def certificate_rate(e: EvolutionOperator, psi1: float) -> float:
    """Decay rate ``nu Psi_1 (+ nu k^2 for L)`` in the time units of ``e``."""
    return e.nu * psi1 + e.shift


@dataclass(frozen=True)
class DecayCurve:
    """Sampled propagator norms with the Gearhart-Pruss comparison.

    ``psi`` is the rate used in the bound ``exp(-t psi + pi/2)``, in the time
    units of the generator.
    """

    times: np.ndarray
    norms: np.ndarray
    psi: float
    gp_margin: float
    spectral: SpectralResult | None = None

    @property
    def gp_bound(self) -> np.ndarray:
        return np.exp(-self.times * self.psi + HALF_PI)


def _margin(times, norms, psi):
    return float(np.min(np.exp(-times * psi + HALF_PI) / norms))


def decay_curve(
    e: EvolutionOperator,
    t_max: float,
    samples: int,
    psi: float | None = None,
    **spectral_kw,
) -> DecayCurve:
    """Propagator norms on :func:`time_grid` and the certificate rate.

    When ``psi`` is omitted it is taken from :func:`psi1_direct` on the same
    discretisation, scaled to a rate by :func:`certificate_rate`.
    """
    if not t_max > 0:
        raise DomainError(f"t_max must be positive, got {t_max!r}")
    if samples < 2:
        raise DomainError(f"samples must be >= 2, got {samples!r}")
    spec = None
    if psi is None:
        spec = psi1_direct(e.base, **spectral_kw)
        psi = certificate_rate(e, spec.psi1)
    times = time_grid(t_max, samples)
    norms = np.array([propagator_norm(e, t) for t in times])
    return DecayCurve(times, norms, float(psi), _margin(times, norms, psi), spec)


def gp_certificate(c: DecayCurve, rtol: float = 1e-6) -> tuple[bool, float]:
    """Pass iff every sample satisfies ``norm <= exp(-t psi + pi/2) (1 + rtol)``."""
    ok = bool(np.all(c.norms <= c.gp_bound * (1.0 + rtol)))
    return ok, c.gp_margin


def dissipation_time(
    e: EvolutionOperator,
    threshold: float = DEFAULT_THRESHOLD,
    psi1: float | None = None,
    rtol: float = 1e-3,
) -> float:
    """First time the propagator norm drops to ``threshold``.

    Returns ``tau`` with ``norm(tau) <= threshold < norm(tau (1 - rtol))``.
    The search doubles a bracket from ``1/rate`` and then bisects; the norm
    is non-increasing so the bracket stays valid. The cap
    ``10 (pi/2 - ln threshold) / rate`` follows from the resolvent bound.

    Raises
    ------
    DissipationTimeout
        If the norm is still above ``threshold`` at the cap.
    """
    if not 0.0 < threshold < 1.0:
        raise DomainError(f"threshold must lie in (0, 1), got {threshold!r}")
    if psi1 is None:
        psi1 = psi1_direct(e.base).psi1
    rate = certificate_rate(e, psi1)
    if not rate > 0:
        raise DissipationTimeout("decay rate is zero; the norm never crosses", (0.0, math.inf))
    t_cap = 10.0 * (HALF_PI - math.log(threshold)) / rate
    lo, hi = 0.0, min(1.0 / rate, t_cap)
    while propagator_norm(e, hi) > threshold:
        if hi >= t_cap:
            raise DissipationTimeout(
                f"norm above {threshold:.3g} at t_cap={t_cap:.6g}", (lo, hi)
            )
        lo, hi = hi, min(2.0 * hi, t_cap)
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if propagator_norm(e, mid) > threshold:
            lo = mid
        else:
            hi = mid
    return hi
