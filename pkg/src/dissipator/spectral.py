"""Fourier discretisation of ``H = -d^2/dy^2 + i u(y)`` and its singular values.

In the basis ``e^{imy}``, ``|m| <= M``, the multiplier ``i u`` couples ``m`` and
``m'`` only when ``m - m' = +-3**n``. Every such offset is a multiple of 3, so
the matrix splits exactly into three independent blocks indexed by
``m mod 3`` (the translation by ``2 pi / 3`` commutes with ``H``). All
singular value and exponential computations run blockwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .profile import ShearProfile
from .search import certified_minimize

DENSE_MAX = 150  # block dimension up to which full SVDs are used
MAX_MODES = 4096


class ResolutionError(ValueError):
    """The requested truncation cannot resolve the profile."""

    def __init__(self, message: str, required_modes: int):
        super().__init__(message)
        self.required_modes = required_modes


def required_modes(terms: int) -> int:
    """Hard minimum ``M = 2 * 3**N`` for a profile with ``N`` terms."""
    return 2 * 3**terms if terms else 0


@dataclass(frozen=True)
class OperatorDisc:
    """Immutable Galerkin matrix of ``H`` (or of an arbitrary generator).

    Attributes
    ----------
    modes : int or None
        Truncation ``M``; ``None`` for operators built with :meth:`from_matrix`.
    profile : ShearProfile or None
        Unscaled profile ``u``.
    scale : float
        Multiplier applied to ``u`` at assembly (``k/nu`` in applications).
    blocks : tuple
        Pairs ``(index, block)`` of positions in the full basis and the
        corresponding diagonal block as a CSR (or dense) matrix.
    """

    modes: int | None
    profile: ShearProfile | None
    scale: float
    blocks: tuple = field(repr=False)
    dim: int = 0

    @classmethod
    def from_matrix(cls, matrix) -> "OperatorDisc":
        a = np.array(matrix, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        n = a.shape[0]
        return cls(None, None, 1.0, ((np.arange(n), a),), n)

    @property
    def wavenumbers(self) -> np.ndarray:
        if self.modes is None:
            raise ValueError("operator has no Fourier basis")
        return np.arange(-self.modes, self.modes + 1)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense ``(2M+1) x (2M+1)`` complex matrix."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for idx, b in self.blocks:
            out[np.ix_(idx, idx)] = b.toarray() if sp.issparse(b) else b
        return out

    def imaginary_range(self) -> tuple[float, float]:
        """Interval containing ``Im <Hf, f>`` for unit ``f``."""
        if self.profile is not None:
            s = abs(self.scale) * float(np.sum(np.abs(self.profile.amplitudes)))
            c = self.scale * self.profile.mean
            return c - s, c + s
        a = self.blocks[0][1]
        k = (a - a.conj().T) / 2j
        w = np.linalg.eigvalsh(k)
        return float(w[0]), float(w[-1])


def assemble(p: ShearProfile, modes: int, scale: float = 1.0) -> OperatorDisc:
    """Assemble the Galerkin matrix of ``-d^2/dy^2 + i*scale*u``.

    Raises
    ------
    ResolutionError
        If ``modes < 2 * 3**N``.
    """
    modes = int(modes)
    if modes < 1:
        raise ValueError(f"modes must be positive, got {modes}")
    need = required_modes(p.terms)
    if modes < need:
        raise ResolutionError(
            f"modes={modes} under-resolves a {p.terms}-term profile; need modes >= {need}",
            need,
        )
    m = np.arange(-modes, modes + 1)
    half = 0.5 * scale * p.amplitudes
    diag_shift = 1j * scale * p.mean
    real = diag_shift == 0
    blocks = []
    for r in range(3):
        idx = np.nonzero(m % 3 == r)[0]
        mb = m[idx].astype(float)
        n = len(idx)
        diags = [mb**2 + diag_shift if not real else mb**2]
        offsets = [0]
        for j, a in enumerate(half):
            step = 3**j  # 3**(n-1) in block coordinates
            if step >= n:
                break
            # i*u_hat(m - m') = +a/2 for m - m' = 3**n, -a/2 for the reverse
            diags += [np.full(n - step, a), np.full(n - step, -a)]
            offsets += [-step, step]
        dtype = float if real else complex
        blk = sp.diags(diags, offsets, shape=(n, n), format="csr", dtype=dtype)
        blocks.append((idx, blk))
    return OperatorDisc(modes, p, float(scale), tuple(blocks), 2 * modes + 1)


# --------------------------------------------------------------------------
# singular values


def _shifted(block, lam):
    n = block.shape[0]
    if sp.issparse(block):
        return (block - 1j * lam * sp.identity(n, format="csr")).tocsc()
    return block - 1j * lam * np.eye(n)


def _sigma_dense(block, lam):
    a = _shifted(block, lam)
    if sp.issparse(a):
        a = a.toarray()
    return float(scipy.linalg.svdvals(a, check_finite=False)[-1])


def _sigma_sparse(block, lam):
    a = _shifted(block, lam)
    if not sp.issparse(a):
        a = sp.csc_matrix(a)
    n = a.shape[0]
    try:
        lu = spla.splu(a)
    except RuntimeError:  # exactly singular
        return 0.0

    def mv(x):
        return lu.solve(lu.solve(np.asarray(x, dtype=complex).ravel(), trans="H"))

    op = spla.LinearOperator((n, n), matvec=mv, dtype=complex)
    rng = np.random.default_rng(n)
    v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    mu = spla.eigsh(op, k=1, which="LA", tol=1e-13, v0=v0, return_eigenvectors=False)
    mu = float(np.real(mu[0]))
    if not np.isfinite(mu) or mu <= 0:
        return 0.0
    return 1.0 / math.sqrt(mu)


def sigma_min(d: OperatorDisc, lam: float, method: str = "auto") -> float:
    """Smallest singular value of ``matrix - i*lam*I``.

    Parameters
    ----------
    method : {"auto", "dense", "sparse"}
        ``dense`` uses a full SVD per block; ``sparse`` runs Lanczos on
        ``(A^H A)^-1`` through a sparse LU. ``auto`` picks by block size.
    """
    if method not in ("auto", "dense", "sparse"):
        raise ValueError(f"unknown method {method!r}")
    best = math.inf
    for _, b in d.blocks:
        use_dense = method == "dense" or (method == "auto" and b.shape[0] <= DENSE_MAX)
        s = _sigma_dense(b, lam) if use_dense else _sigma_sparse(b, lam)
        best = min(best, s)
        if best == 0.0:
            break
    return best


def resolvent_norm(d: OperatorDisc, lam: float, method: str = "auto") -> float:
    """``||(H - i lam)^-1||``; infinite when ``H - i lam`` is singular."""
    s = sigma_min(d, lam, method)
    return math.inf if s == 0.0 else 1.0 / s


def psi0_direct(d: OperatorDisc, method: str = "auto") -> float:
    return sigma_min(d, 0.0, method)


def eigenvalues(d: OperatorDisc) -> np.ndarray:
    """All eigenvalues of the discretised operator (dense; small ``M`` only)."""
    out = []
    for _, b in d.blocks:
        a = b.toarray() if sp.issparse(b) else b
        out.append(scipy.linalg.eigvals(a))
    return np.concatenate(out)


@dataclass(frozen=True)
class SpectralResult:
    """Direct values of ``Psi_0`` and ``Psi_1``.

    ``psi1`` is the smallest evaluated ``sigma_min``; ``lower`` is a certified
    lower bound for the infimum over all real ``lambda``.
    """

    psi0: float
    lambda_star: float
    psi1: float
    modes_used: int | None
    converged: bool
    lower: float
    evaluations: int
    refined_psi1: float | None = None

    def to_dict(self) -> dict:
        return {
            "psi0": self.psi0,
            "psi1": self.psi1,
            "lambda_star": self.lambda_star,
            "modes_used": self.modes_used,
            "converged": self.converged,
        }


def _lambda_bound(xa, fa, xb, fb):
    """Lower bound for ``sigma_min`` on ``[xa, xb]`` from its end values.

    Combines the 1-Lipschitz bound with concavity of
    ``sigma(c + mu)**2 - mu**2`` (a minimum of affine functions of ``mu``).
    """
    w = xb - xa
    lip = 0.5 * (fa + fb - w)
    m = min(fa, fb)
    conc = math.sqrt(max(0.0, m * m - 0.25 * w * w))
    return max(lip, conc)


def _search_lambda(f, lo, hi, centre, spacing, rtol, symmetric):
    """Certified minimisation with ``centre`` guaranteed to be a grid node."""
    tol = lambda b: rtol * (1.0 + b)  # noqa: E731
    right = certified_minimize(f, centre, hi, spacing, tol, _lambda_bound)
    if symmetric:
        return right.x, right.fx, right.lower, right.evaluations
    left = certified_minimize(f, lo, centre, spacing, tol, _lambda_bound)
    best = min(left, right, key=lambda r: (r.fx, abs(r.x - centre)))
    lower = min(left.lower, right.lower)
    return best.x, best.fx, lower, left.evaluations + right.evaluations


def psi1_direct(
    d: OperatorDisc,
    method: str = "auto",
    rtol: float = 1e-6,
    grid: int = 256,
    check: bool = True,
    check_rtol: float = 1e-4,
) -> SpectralResult:
    """``Psi_1 = inf_lambda sigma_min(H - i lambda)`` by certified search.

    Outside ``[lo - s, hi + s]``, where ``[lo, hi]`` bounds the numerical range
    of the skew part and ``s = sigma_min`` at its centre, the singular value
    exceeds ``s`` (``||(H - i lam) f|| >= dist(lam, [lo, hi])``), so the search
    is confined to that interval. The grid spacing is ``(hi - lo)/grid``.
    For a sine-series profile ``sigma_min`` is even about the mean (the
    antiunitary map ``f(y) -> conj(f(-y))`` commutes with ``H`` and flips
    ``lambda`` around it), so only the upper half is searched.

    With ``check`` the search is repeated near ``lambda_star`` at ``2M``
    modes; ``converged`` is true when the value moves by less than
    ``check_rtol`` (relative).
    """
    lo, hi = d.imaginary_range()
    centre = 0.5 * (lo + hi)

    def f(lam):
        return sigma_min(d, lam, method)

    s0 = f(centre)
    span = hi - lo
    a, b = lo - s0, hi + s0
    if b > a:
        spacing = span / grid if span > 0 else (b - a) / grid
        spacing = max(spacing, (b - a) / (4 * grid))
        x, fx, lower, evals = _search_lambda(
            f, a, b, centre, spacing, rtol, symmetric=d.profile is not None
        )
        evals += 1
    else:
        x, fx, lower, evals, spacing = centre, s0, s0, 1, 1.0
    if s0 <= fx:
        x, fx = centre, s0
    psi0 = sigma_min(d, 0.0, method)
    if psi0 < fx:
        x, fx = 0.0, psi0
    converged = True
    refined = None
    if check and d.profile is not None:
        converged, refined = _doubling_check(d, x, fx, spacing, method, rtol, check_rtol)
    return SpectralResult(psi0, x, fx, d.modes, converged, min(lower, fx), evals, refined)


def _doubling_check(d, lam, value, spacing, method, rtol, check_rtol):
    m2 = 2 * d.modes
    d2 = assemble(d.profile, m2, d.scale)

    def f(x):
        return sigma_min(d2, x, method)

    r = certified_minimize(
        f, lam - 2 * spacing, lam + 2 * spacing, spacing / 4, lambda b: rtol * (1 + b), _lambda_bound
    )
    v2 = min(r.fx, f(lam))
    scale = max(abs(value), abs(v2), 1e-300)
    return bool(abs(v2 - value) <= check_rtol * scale), v2
