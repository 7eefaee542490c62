"""Compare the compiled and pure-NumPy kernel backends.

Times both kernels on identical inputs taken from a window objective, checks
that they agree, then times a full ``omega`` evaluation with each backend in a
fresh interpreter (the backend is chosen at import).

Usage::

    python benchmarks/bench_kernels.py [--terms N] [--points P] [--repeat R]
"""

import argparse
import math
import os
import subprocess
import sys
import timeit

import numpy as np

from dissipator import geometry as g
from dissipator import kernels
from dissipator.profile import make_weierstrass_power


def kernel_inputs(terms, points, seed=0):
    obj = g._WindowObjective(make_weierstrass_power(0.5, terms), 3.0 ** (2 - terms), 1)
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, math.pi / 6, points)
    r = 0.5 / obj.kappa[-1]
    fl, fr = obj(x - r), obj(x + r)
    a = obj.terms_w * r
    smooth = a <= g._SMOOTH
    order = np.argsort(~smooth, kind="stable")
    n_low = int(np.sum(smooth))
    c, w, a = obj.terms_c[order], obj.terms_w[order], a[order]
    curv = float(np.sum(np.abs(c[:n_low]) * w[:n_low] ** 2))
    lower = (x, r, fl, fr, obj.kappa, obj.terms_i[order], obj.terms_j[order],
             obj.terms_sum[order], c, n_low, np.cos(a), np.sin(a),
             np.cos(np.minimum(a, math.pi)), curv)
    energy = (x, obj.kappa, obj.b, obj.even, obj.odd)
    return energy, lower


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def omega_time(terms, pure):
    code = (
        "import time, warnings;"
        "from dissipator.geometry import omega;"
        "from dissipator.profile import make_weierstrass_power;"
        f"p = make_weierstrass_power(0.5, {terms});"
        "warnings.simplefilter('ignore');"
        "t = time.perf_counter();"
        f"omega(p, 3.0 ** ({2 - terms}), 1);"
        "print(time.perf_counter() - t)"
    )
    env = dict(os.environ)
    env.pop("DISSIPATOR_PURE_PYTHON", None)
    if pure:
        env["DISSIPATOR_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--terms", type=int, default=13, help="lacunary terms N (default 13)")
    ap.add_argument("--points", type=int, default=20000, help="evaluation points per call (default 20000)")
    ap.add_argument("--repeat", type=int, default=5, help="timing repeats, best is reported (default 5)")
    args = ap.parse_args(argv)

    if kernels.window_energy_c is None:
        print("compiled core not built; only the NumPy backend is available")
        return 1
    energy, lower = kernel_inputs(args.terms, args.points)
    rows = []
    for name, fc, fp, inp in (
        ("window_energy", kernels.window_energy_c, kernels.window_energy_py, energy),
        ("interval_lower", kernels.interval_lower_c, kernels.interval_lower_py, lower),
    ):
        a, b = fc(*inp), fp(*inp)
        err = float(np.max(np.abs(a - b)) / max(1e-300, float(np.max(np.abs(b)))))
        tc = best_of(lambda: fc(*inp), args.repeat)
        tp = best_of(lambda: fp(*inp), args.repeat)
        rows.append((name, tc, tp, err))
    tc = omega_time(args.terms, pure=False)
    tp = omega_time(args.terms, pure=True)
    rows.append((f"omega (N={args.terms})", tc, tp, math.nan))

    print(f"{'kernel':<22}{'cython [s]':>12}{'numpy [s]':>12}{'speed-up':>10}{'max rel diff':>14}")
    for name, tc, tp, err in rows:
        diff = "" if math.isnan(err) else f"{err:.1e}"
        print(f"{name:<22}{tc:>12.4f}{tp:>12.4f}{tp / tc:>10.1f}{diff:>14}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
