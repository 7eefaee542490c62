import math
import os
import subprocess
import sys

import numpy as np
import pytest

from dissipator import geometry as g
from dissipator import kernels
from dissipator.profile import ShearProfile, make_weierstrass_power

needs_c = pytest.mark.skipif(kernels.window_energy_c is None, reason="compiled core not built")


def objective(seed, order=1):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    p = ShearProfile(tuple(rng.uniform(-1, 1, n)))
    delta = float(np.exp(rng.uniform(math.log(1e-3), math.log(1.0))))
    return g._WindowObjective(p, delta, order), rng


def bound_args(obj, x, r, fl, fr):
    a = obj.terms_w * r
    smooth = a <= g._SMOOTH
    order = np.argsort(~smooth, kind="stable")
    n_low = int(np.sum(smooth))
    c, w, a = obj.terms_c[order], obj.terms_w[order], a[order]
    curv = float(np.sum(np.abs(c[:n_low]) * w[:n_low] ** 2))
    return (x, r, fl, fr, obj.kappa, obj.terms_i[order], obj.terms_j[order],
            obj.terms_sum[order], c, n_low, np.cos(a), np.sin(a),
            np.cos(np.minimum(a, math.pi)), curv)


@needs_c
@pytest.mark.parametrize("seed", range(8))
def test_window_energy_backends_agree(seed):
    obj, rng = objective(seed, order=seed % 2)
    x = rng.uniform(0, 2 * math.pi, 300)
    a = kernels.window_energy_c(x, obj.kappa, obj.b, obj.even, obj.odd)
    b = kernels.window_energy_py(x, obj.kappa, obj.b, obj.even, obj.odd)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15 * np.max(np.abs(b)))


@needs_c
@pytest.mark.parametrize("seed", range(8))
def test_interval_lower_backends_agree(seed):
    obj, rng = objective(seed)
    for r in (1e-3, 1e-2 / obj.kappa[-1], 0.5 / obj.kappa[-1], 5.0 / obj.kappa[-1]):
        x = rng.uniform(0, math.pi / 6, 200)
        fl, fr = obj(x - r), obj(x + r)
        args = bound_args(obj, x, r, fl, fr)
        a = kernels.interval_lower_c(*args)
        b = kernels.interval_lower_py(*args)
        scale = float(np.sum(np.abs(obj.terms_c))) + abs(float(np.max(fl)))
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12 * scale)


@pytest.mark.parametrize("seed", range(8))
def test_interval_lower_is_a_lower_bound(seed):
    obj, rng = objective(seed)
    for r in (1e-2 / obj.kappa[-1], 0.5 / obj.kappa[-1], 3.0 / obj.kappa[-1]):
        x = rng.uniform(0, math.pi / 6, 40)
        lb = obj.lower_bounds(x, r, obj(x - r), obj(x + r))
        s = np.linspace(-1, 1, 401)
        for xi, li in zip(x, lb):
            true_min = float(np.min(obj(xi + r * s)))
            assert li <= true_min + 1e-11 * (1 + abs(true_min))


def test_pure_python_fallback_selected_by_env():
    code = "from dissipator import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, DISSIPATOR_PURE_PYTHON="1")
    res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert res.stdout.strip() == "python"


def test_fallback_gives_same_omega():
    code = (
        "from dissipator.profile import make_weierstrass_power;"
        "from dissipator.geometry import omega;"
        "print(repr(omega(make_weierstrass_power(0.5, 5), 0.07, 1).value))"
    )
    env = dict(os.environ, DISSIPATOR_PURE_PYTHON="1")
    py = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    native = g.omega(make_weierstrass_power(0.5, 5), 0.07, 1).value
    assert float(py.stdout) == pytest.approx(native, rel=1e-10)
