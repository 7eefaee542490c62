"""Independent reference computations used only by the test-suite."""

import math

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from dissipator.profile import eval_psi

_GL = {}


def gauss_legendre(n):
    if n not in _GL:
        _GL[n] = np.polynomial.legendre.leggauss(n)
    return _GL[n]


def window_energy_quadrature(p, delta, order, x, nodes=2048):
    """Least-squares residual of psi on [x-delta, x+delta] by quadrature."""
    t, w = gauss_legendre(nodes)
    s = delta * t
    vals = eval_psi(p, x + s)
    cols = [np.ones_like(s)] + ([s] if order == 1 else [])
    basis = np.stack(cols, axis=1)
    sw = np.sqrt(w * delta)
    coef, *_ = np.linalg.lstsq(basis * sw[:, None], vals * sw, rcond=None)
    r = vals - basis @ coef
    return float(np.sum(w * delta * r * r))


def omega_brute(p, delta, order, grid=10_000, nodes=2048, refine=3):
    """x on a uniform grid over one period, then bounded refinement."""
    period = 2 * math.pi / 3
    xs = np.arange(grid) * (period / grid)
    vals = np.array([window_energy_quadrature(p, delta, order, x, nodes) for x in xs])
    h = period / grid
    best = math.inf
    for i in np.argsort(vals)[:refine]:
        res = minimize_scalar(
            lambda x: window_energy_quadrature(p, delta, order, x, nodes),
            bounds=(xs[i] - h, xs[i] + h),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = min(best, res.fun, vals[i])
    return best


def sigma_min_dense(matrix, lam):
    a = matrix - 1j * lam * np.eye(matrix.shape[0])
    return float(np.linalg.svd(a, compute_uv=False)[-1])


def propagator_norm_eig(generator, t):
    """``||exp(-tG)||_2`` through an eigendecomposition of ``G``."""
    lam, v = scipy.linalg.eig(generator)
    e = (v * np.exp(-t * lam)) @ np.linalg.inv(v)
    return float(np.linalg.norm(e, 2)), float(np.linalg.cond(v))


def propagator_norm_dense(generator, t):
    """``||exp(-tG)||_2`` from the dense exponential of the full matrix."""
    return float(np.linalg.norm(scipy.linalg.expm(-t * np.asarray(generator)), 2))


def bisect_root(f, a, b, tol=1e-15):
    fa = f(a)
    for _ in range(300):
        m = 0.5 * (a + b)
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
        if b - a < tol:
            break
    return 0.5 * (a + b)
