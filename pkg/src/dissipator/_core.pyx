# cython: language_level=3
"""Compiled window-energy kernel (see ``_core_py`` for the reference)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs

cnp.import_array()


def window_energy(x, kappa, b, even, odd, double offset=0.0):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[::1] kv = np.ascontiguousarray(kappa, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef const double[:, ::1] ev = np.ascontiguousarray(even, dtype=np.float64)
    cdef const double[:, ::1] ov = np.ascontiguousarray(odd, dtype=np.float64)
    cdef Py_ssize_t nx = xv.shape[0], nm = kv.shape[0]
    cdef Py_ssize_t i, n, m
    cdef double ph, acc, an, sn, rowa, rows
    out = np.empty(nx, dtype=np.float64)
    cdef double[::1] ov_out = out
    cdef double[::1] a = np.empty(nm, dtype=np.float64)
    cdef double[::1] s = np.empty(nm, dtype=np.float64)
    for i in range(nx):
        for n in range(nm):
            ph = kv[n] * xv[i]
            a[n] = -bv[n] * cos(ph)
            s[n] = bv[n] * sin(ph)
        acc = 0.0
        for n in range(nm):
            an = a[n]
            sn = s[n]
            rowa = 0.5 * ev[n, n] * an
            rows = 0.5 * ov[n, n] * sn
            for m in range(n + 1, nm):
                rowa = rowa + ev[n, m] * a[m]
                rows = rows + ov[n, m] * s[m]
            acc = acc + 2.0 * (an * rowa + sn * rows)
        ov_out[i] = acc + offset
    return out


def interval_lower(x, double r, fl, fr, kappa, ti, tj, tsum, tc,
                   Py_ssize_t n_low, ca, sa, cut, double curv):
    """Lower bound of ``F`` on ``[x - r, x + r]`` from its endpoint values.

    ``F`` is written as ``const + sum_t c_t cos(w_t y)`` where term ``t`` has
    frequency ``kappa[j] - kappa[i]`` (``tsum = 0``) or ``kappa[i] + kappa[j]``.
    The first ``n_low`` terms, together with the constant, form a smooth part
    with ``|F''| <= curv``; it is bounded below by the interpolating parabola
    through its endpoint values. Each remaining term is bounded by its exact
    extremum over the arc. ``ca``, ``sa`` hold ``cos``/``sin`` of ``w_t r`` and
    ``cut`` holds ``cos(min(w_t r, pi))``.
    """
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef const double[::1] flv = np.ascontiguousarray(fl, dtype=np.float64).ravel()
    cdef const double[::1] frv = np.ascontiguousarray(fr, dtype=np.float64).ravel()
    cdef const double[::1] kv = np.ascontiguousarray(kappa, dtype=np.float64)
    cdef const long[::1] iv = np.ascontiguousarray(ti, dtype=np.int64)
    cdef const long[::1] jv = np.ascontiguousarray(tj, dtype=np.int64)
    cdef const long[::1] sumv = np.ascontiguousarray(tsum, dtype=np.int64)
    cdef const double[::1] cv = np.ascontiguousarray(tc, dtype=np.float64)
    cdef const double[::1] cav = np.ascontiguousarray(ca, dtype=np.float64)
    cdef const double[::1] sav = np.ascontiguousarray(sa, dtype=np.float64)
    cdef const double[::1] cutv = np.ascontiguousarray(cut, dtype=np.float64)
    cdef Py_ssize_t nx = xv.shape[0], nm = kv.shape[0], nt = cv.shape[0]
    cdef Py_ssize_t k, n, t, i, j
    cdef double ph, cth, sth, c, ext, cm, cp, acc, rl, rr, gl, gr, m, g
    out = np.empty(nx, dtype=np.float64)
    cdef double[::1] outv = out
    cdef double[::1] cs = np.empty(nm, dtype=np.float64)
    cdef double[::1] sn = np.empty(nm, dtype=np.float64)
    for k in range(nx):
        for n in range(nm):
            ph = kv[n] * xv[k]
            cs[n] = cos(ph)
            sn[n] = sin(ph)
        acc = 0.0
        rl = 0.0
        rr = 0.0
        for t in range(n_low, nt):
            i = iv[t]
            j = jv[t]
            if sumv[t]:
                cth = cs[i] * cs[j] - sn[i] * sn[j]
                sth = sn[i] * cs[j] + cs[i] * sn[j]
            else:
                cth = cs[j] * cs[i] + sn[j] * sn[i]
                sth = sn[j] * cs[i] - cs[j] * sn[i]
            c = cv[t]
            cm = cth * cav[t] + sth * sav[t]
            cp = cth * cav[t] - sth * sav[t]
            rl += c * cm
            rr += c * cp
            if c > 0:
                ext = -1.0 if cth <= -cutv[t] else (cm if cm < cp else cp)
            else:
                ext = 1.0 if cth >= cutv[t] else (cm if cm > cp else cp)
            acc += c * ext
        gl = flv[k] - rl
        gr = frv[k] - rr
        m = 0.5 * (gl + gr)
        g = 0.5 * (gr - gl) / r
        if curv > 0 and fabs(g) < curv * r:
            outv[k] = acc + m - 0.5 * g * g / curv - 0.5 * curv * r * r
        else:
            outv[k] = acc + (gl if gl < gr else gr)
    return out
