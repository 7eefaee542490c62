"""Lacunary (Weierstrass-type) shear profiles.

A profile is ``u(y) = mean + sum_n a_n sin(3**n y)`` for ``n = 1..N`` on the
2*pi torus, together with its antiderivative
``psi(y) = mean*y - sum_n (a_n / 3**n) cos(3**n y)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

BASE = 3


class ProfileError(ValueError):
    """Raised for invalid profile parameters."""


@dataclass(frozen=True)
class ShearProfile:
    """Immutable truncated Weierstrass shear.

    Attributes
    ----------
    coeffs : tuple of float
        Amplitudes ``a_1..a_N``.
    base : int
        Lacunary base, always 3.
    mean : float
        Constant ``c_0`` added to ``u``.
    mode : str
        ``"power"``, ``"log"`` or ``"explicit"``; provenance of ``coeffs``.
    alpha : float or None
        Exponent used to generate ``coeffs`` (``None`` for explicit).
    """

    coeffs: tuple[float, ...]
    base: int = BASE
    mean: float = 0.0
    mode: str = "explicit"
    alpha: float | None = None
    _freq: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.base != BASE:
            raise ProfileError(f"lacunary base must be {BASE}, got {self.base}")
        object.__setattr__(self, "coeffs", tuple(float(a) for a in self.coeffs))
        object.__setattr__(self, "mean", float(self.mean))
        freq = float(BASE) ** np.arange(1, len(self.coeffs) + 1)
        freq.setflags(write=False)
        object.__setattr__(self, "_freq", freq)

    @property
    def terms(self) -> int:
        return len(self.coeffs)

    @property
    def frequencies(self) -> np.ndarray:
        """Wavenumbers ``3**n``, ``n = 1..N``."""
        return self._freq

    @property
    def amplitudes(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    @property
    def psi_amplitudes(self) -> np.ndarray:
        """Cosine amplitudes ``a_n / 3**n`` of ``-psi``."""
        return self.amplitudes / self._freq

    def scaled(self, factor: float) -> "ShearProfile":
        """Return the profile of ``factor * u``."""
        return ShearProfile(
            tuple(factor * a for a in self.coeffs),
            mean=factor * self.mean,
            mode="explicit",
        )

    def shifted(self, c: float) -> "ShearProfile":
        """Return the profile of ``u + c``."""
        return ShearProfile(
            self.coeffs, mean=self.mean + c, mode=self.mode, alpha=self.alpha
        )

    def sup_norm_bound(self) -> float:
        """Upper bound ``|mean| + sum |a_n|`` on ``max |u|``."""
        return abs(self.mean) + float(np.sum(np.abs(self.amplitudes)))

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "alpha": self.alpha,
            "terms": self.terms,
            "coeffs": list(self.coeffs),
            "mean": self.mean,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def make_weierstrass_power(alpha: float, terms: int) -> ShearProfile:
    """Profile with ``a_n = 3**(-n*alpha)``, ``0 < alpha < 1``."""
    if not 0.0 < alpha < 1.0:
        raise ProfileError(f"power mode needs alpha in (0, 1), got {alpha}")
    if terms < 1:
        raise ProfileError(f"terms must be >= 1, got {terms}")
    n = np.arange(1, terms + 1)
    return ShearProfile(tuple(BASE ** (-n * alpha)), mode="power", alpha=alpha)


def make_weierstrass_log(alpha: float, terms: int) -> ShearProfile:
    """Profile with ``a_n = n**(-alpha)``, ``1 < alpha < 2``."""
    if not 1.0 < alpha < 2.0:
        raise ProfileError(f"log mode needs alpha in (1, 2), got {alpha}")
    if terms < 1:
        raise ProfileError(f"terms must be >= 1, got {terms}")
    n = np.arange(1, terms + 1, dtype=float)
    return ShearProfile(tuple(n ** (-alpha)), mode="log", alpha=alpha)


def make_profile(
    mode: str,
    alpha: float | None = None,
    terms: int | None = None,
    coeffs: Sequence[float] | None = None,
    mean: float = 0.0,
) -> ShearProfile:
    """Build a profile from its serialized description."""
    if mode == "power":
        p = make_weierstrass_power(alpha, terms)
    elif mode == "log":
        p = make_weierstrass_log(alpha, terms)
    elif mode == "explicit":
        if coeffs is None:
            raise ProfileError("explicit mode requires coeffs")
        p = ShearProfile(tuple(coeffs))
    else:
        raise ProfileError(f"unknown profile mode {mode!r}")
    if mean:
        p = ShearProfile(p.coeffs, mean=mean, mode=p.mode, alpha=p.alpha)
    return p


def profile_from_dict(d: dict) -> ShearProfile:
    unknown = set(d) - {"mode", "alpha", "terms", "coeffs", "mean"}
    if unknown:
        raise ProfileError(f"unknown profile keys: {sorted(unknown)}")
    return make_profile(
        d.get("mode", "explicit"),
        alpha=d.get("alpha"),
        terms=d.get("terms"),
        coeffs=d.get("coeffs"),
        mean=d.get("mean", 0.0),
    )


def profile_from_json(text: str) -> ShearProfile:
    return profile_from_dict(json.loads(text))


def eval_u(p: ShearProfile, y):
    """Evaluate ``u(y)``; accepts scalars or arrays."""
    y = np.asarray(y, dtype=float)
    phase = np.multiply.outer(y, p.frequencies)
    out = p.mean + np.sin(phase) @ p.amplitudes
    return float(out) if out.ndim == 0 else out


def eval_psi(p: ShearProfile, y):
    """Evaluate the antiderivative ``psi(y)`` with ``psi' = u``."""
    y = np.asarray(y, dtype=float)
    phase = np.multiply.outer(y, p.frequencies)
    out = p.mean * y - np.cos(phase) @ p.psi_amplitudes
    return float(out) if out.ndim == 0 else out


def third_difference(p: ShearProfile, h: float, y):
    """Four-term difference ``psi(y) - 3psi(y+h) + 3psi(y+2h) - psi(y+3h)``."""
    if h <= 0:
        raise ProfileError(f"step must be positive, got {h}")
    y = np.asarray(y, dtype=float)
    out = (
        eval_psi(p, y)
        - 3.0 * eval_psi(p, y + h)
        + 3.0 * eval_psi(p, y + 2 * h)
        - eval_psi(p, y + 3 * h)
    )
    return out


def third_difference_closed_form(p: ShearProfile, h: float, y):
    """Lacunary closed form of the third difference of ``psi``.

    Each mode ``-b cos(k y)`` maps to ``b sin(k (y + 3h/2)) (2 sin(k h/2))**3``;
    the linear ``mean*y`` part is annihilated.
    """
    y = np.asarray(y, dtype=float)
    k = p.frequencies
    phase = np.multiply.outer(y + 1.5 * h, k)
    out = np.sin(phase) @ (p.psi_amplitudes * (2.0 * np.sin(0.5 * k * h)) ** 3)
    return float(out) if np.ndim(out) == 0 else out


def validate_ratio(p: ShearProfile) -> bool:
    """True iff every ``a_n != 0`` and ``1 <= |a_n|/|a_{n+1}| <= 3``."""
    a = np.abs(p.amplitudes)
    if np.any(a == 0):
        return False
    r = a[:-1] / a[1:]
    return bool(np.all((r >= 1.0) & (r <= 3.0)))
