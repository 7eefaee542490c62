"""Pure-NumPy fallback for the window-energy kernel."""

import numpy as np

_CHUNK = 8192


def window_energy(x, kappa, b, even, odd, offset=0.0):
    """Residual energy ``A^T E A + B^T O B + offset`` at each centre ``x``.

    ``A_n = -b_n cos(kappa_n x)`` and ``B_n = b_n sin(kappa_n x)`` are the
    even/odd amplitudes of ``psi(x + s)`` about the centre.
    """
    x = np.ascontiguousarray(x, dtype=float).ravel()
    kappa = np.asarray(kappa, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.empty(x.size)
    for start in range(0, x.size, _CHUNK):
        stop = min(start + _CHUNK, x.size)
        phase = np.multiply.outer(x[start:stop], kappa)
        a = -np.cos(phase) * b
        s = np.sin(phase) * b
        out[start:stop] = (
            np.einsum("ij,jk,ik->i", a, even, a)
            + np.einsum("ij,jk,ik->i", s, odd, s)
            + offset
        )
    return out


def interval_lower(x, r, fl, fr, kappa, ti, tj, tsum, tc, n_low, ca, sa, cut, curv):
    """Lower bound of ``F`` on ``[x - r, x + r]`` from its endpoint values.

    ``F`` is written as ``const + sum_t c_t cos(w_t y)`` where term ``t`` has
    frequency ``kappa[j] - kappa[i]`` (``tsum = 0``) or ``kappa[i] + kappa[j]``.
    The first ``n_low`` terms, together with the constant, form a smooth part
    with ``|F''| <= curv``; it is bounded below by the interpolating parabola
    through its endpoint values. Each remaining term is bounded by its exact
    extremum over the arc. ``ca``, ``sa`` hold ``cos``/``sin`` of ``w_t r`` and
    ``cut`` holds ``cos(min(w_t r, pi))``.
    """
    x = np.ascontiguousarray(x, dtype=float).ravel()
    fl = np.ascontiguousarray(fl, dtype=float).ravel()
    fr = np.ascontiguousarray(fr, dtype=float).ravel()
    kappa = np.asarray(kappa, dtype=float)
    rest = slice(n_low, len(tc))
    ti, tj = np.asarray(ti)[rest], np.asarray(tj)[rest]
    tsum = np.asarray(tsum)[rest].astype(bool)
    c = np.asarray(tc, dtype=float)[rest]
    ca, sa = np.asarray(ca, dtype=float)[rest], np.asarray(sa, dtype=float)[rest]
    cut = np.asarray(cut, dtype=float)[rest]
    out = np.empty(x.size)
    for start in range(0, x.size, _CHUNK):
        stop = min(start + _CHUNK, x.size)
        phase = np.multiply.outer(x[start:stop], kappa)
        cs, sn = np.cos(phase), np.sin(phase)
        ci, cj, si, sj = cs[:, ti], cs[:, tj], sn[:, ti], sn[:, tj]
        ct = np.where(tsum, ci * cj - si * sj, cj * ci + sj * si)
        st = np.where(tsum, si * cj + ci * sj, sj * ci - cj * si)
        cm = ct * ca + st * sa
        cp = ct * ca - st * sa
        ext = np.where(
            c > 0,
            np.where(ct <= -cut, -1.0, np.minimum(cm, cp)),
            np.where(ct >= cut, 1.0, np.maximum(cm, cp)),
        )
        acc = (c * ext).sum(axis=1)
        gl = fl[start:stop] - (c * cm).sum(axis=1)
        gr = fr[start:stop] - (c * cp).sum(axis=1)
        m = 0.5 * (gl + gr)
        g = 0.5 * (gr - gl) / r
        low = np.minimum(gl, gr)
        if curv > 0:
            inner = np.abs(g) < curv * r
            para = m - 0.5 * g * g / curv - 0.5 * curv * r * r
            low = np.where(inner, para, low)
        out[start:stop] = acc + low
    return out
