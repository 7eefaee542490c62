"""One-dimensional minimisation helpers."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, a, b, xtol=1e-10, maxiter=200):
    """Golden-section search for a minimum of ``f`` on ``[a, b]``.

    Returns the best point seen (including the end points) and its value.
    """
    fa, fb = f(a), f(b)
    best = min((fa, a), (fb, b))
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if abs(b - a) <= xtol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
    best = min(best, (fc, c), (fd, d))
    return best[1], best[0]


@dataclass
class LipschitzResult:
    x: float
    fx: float
    lower: float  # certified lower bound on the global minimum
    evaluations: int


def certified_minimize(f, a, b, spacing, tol, lower_bound):
    """Branch-and-bound global minimisation on ``[a, b]``.

    ``lower_bound(xa, fa, xb, fb)`` must return a valid lower bound for ``f``
    on ``[xa, xb]`` given the end values. Starts from a uniform grid of the
    given spacing and splits the interval with the smallest bound until it
    is within ``tol(best)`` of the incumbent.
    """
    if b <= a:
        fa = f(a)
        return LipschitzResult(a, fa, fa, 1)
    n = max(1, int(math.ceil((b - a) / spacing)))
    xs = [a + (b - a) * i / n for i in range(n + 1)]
    fs = [f(x) for x in xs]
    evals = len(xs)
    i_best = min(range(len(fs)), key=fs.__getitem__)
    best_x, best_f = xs[i_best], fs[i_best]
    heap = []
    for xa, fa, xb, fb in zip(xs[:-1], fs[:-1], xs[1:], fs[1:]):
        heapq.heappush(heap, (lower_bound(xa, fa, xb, fb), xa, fa, xb, fb))
    lower = best_f
    while heap:
        lb, xa, fa, xb, fb = heapq.heappop(heap)
        if lb >= best_f - tol(best_f) or xb - xa <= 1e-15 * max(1.0, abs(xa)):
            lower = min(lb, best_f)
            break
        xm = 0.5 * (xa + xb)
        fm = f(xm)
        evals += 1
        if fm < best_f:
            best_x, best_f = xm, fm
        heapq.heappush(heap, (lower_bound(xa, fa, xm, fm), xa, fa, xm, fm))
        heapq.heappush(heap, (lower_bound(xm, fm, xb, fb), xm, fm, xb, fb))
    else:
        lower = best_f
    return LipschitzResult(best_x, best_f, lower, evals)
