# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled crossbar kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np
from libc.math cimport exp, floor, log, sqrt
from libc.stdlib cimport free, malloc


cdef inline double _clip(double v, double lo, double hi) noexcept nogil:
    if v < lo:
        v = lo
    if v > hi:
        v = hi
    return v


cdef inline long _steps(double w, double g_min, double g_max, long n_steps,
                        bint compensate) noexcept nogil:
    cdef double frac, target, n
    if compensate:
        frac = w
    else:
        target = _clip(w * g_max, g_min, g_max)
        frac = (target - g_min) / (g_max - g_min)
    n = floor(frac * n_steps + 0.5)
    n = _clip(n, 0.0, <double>n_steps)
    return <long>n


cdef inline double _cell(long n, double draw, const double[::1] levels, double g_min,
                         double g_max, long n_steps, double noise_scale,
                         bint per_pulse) noexcept nogil:
    cdef double g = levels[n]
    cdef double scale
    if noise_scale != 0.0:
        if per_pulse:
            scale = noise_scale * sqrt(n / <double>n_steps)
        else:
            scale = noise_scale
        g = _clip(g + draw * scale, g_min, g_max)
    return g


cdef void _program(const double[:, :, ::1] A, const double[:, :, :, ::1] noise,
                   const double[::1] levels, double g_min, double g_max,
                   double noise_scale, bint per_pulse, bint compensate,
                   double[:, :, ::1] g_plus, double[:, :, ::1] g_minus,
                   long[:, :, ::1] n_plus, long[:, :, ::1] n_minus) noexcept nogil:
    cdef Py_ssize_t t, j, i
    cdef long n_steps = levels.shape[0] - 1
    cdef long np_, nm
    cdef double w
    for t in range(A.shape[0]):
        for j in range(A.shape[1]):
            for i in range(A.shape[2]):
                w = A[t, j, i]
                np_ = _steps(w if w > 0.0 else 0.0, g_min, g_max, n_steps, compensate)
                nm = _steps(-w if w < 0.0 else 0.0, g_min, g_max, n_steps, compensate)
                n_plus[t, j, i] = np_
                n_minus[t, j, i] = nm
                g_plus[t, j, i] = _cell(np_, noise[t, 0, j, i], levels, g_min, g_max,
                                        n_steps, noise_scale, per_pulse)
                g_minus[t, j, i] = _cell(nm, noise[t, 1, j, i], levels, g_min, g_max,
                                         n_steps, noise_scale, per_pulse)


def program(A, noise, levels, double g_min, double g_max, double noise_scale,
            bint per_pulse, bint compensate):
    A = np.ascontiguousarray(A, dtype=np.float64)
    noise = np.ascontiguousarray(noise, dtype=np.float64)
    levels = np.ascontiguousarray(levels, dtype=np.float64)
    g_plus = np.empty_like(A)
    g_minus = np.empty_like(A)
    n_plus = np.empty(A.shape, dtype=np.int64)
    n_minus = np.empty(A.shape, dtype=np.int64)
    cdef double[:, :, ::1] gp = g_plus
    cdef double[:, :, ::1] gm = g_minus
    cdef long[:, :, ::1] npl = n_plus
    cdef long[:, :, ::1] nmi = n_minus
    cdef const double[:, :, ::1] a = A
    cdef const double[:, :, :, ::1] z = noise
    cdef const double[::1] lv = levels
    with nogil:
        _program(a, z, lv, g_min, g_max, noise_scale, per_pulse, compensate,
                 gp, gm, npl, nmi)
    return g_plus, g_minus, n_plus, n_minus


def simulate(A, x, noise, levels, double g_min, double g_max, double noise_scale,
             bint per_pulse, bint compensate):
    A = np.ascontiguousarray(A, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    noise = np.ascontiguousarray(noise, dtype=np.float64)
    levels = np.ascontiguousarray(levels, dtype=np.float64)
    out = np.zeros(A.shape[:2], dtype=np.float64)
    cdef const double[:, :, ::1] a = A
    cdef const double[:, ::1] xv = x
    cdef const double[:, :, :, ::1] z = noise
    cdef const double[::1] lv = levels
    cdef double[:, ::1] y = out
    cdef Py_ssize_t t, j, i
    cdef long n_steps = levels.shape[0] - 1
    cdef long np_, nm
    cdef double w, gp, gm, acc
    cdef double norm = (g_max - g_min) if compensate else g_max
    with nogil:
        for t in range(a.shape[0]):
            for j in range(a.shape[1]):
                acc = 0.0
                for i in range(a.shape[2]):
                    w = a[t, j, i]
                    np_ = _steps(w if w > 0.0 else 0.0, g_min, g_max, n_steps, compensate)
                    nm = _steps(-w if w < 0.0 else 0.0, g_min, g_max, n_steps, compensate)
                    gp = _cell(np_, z[t, 0, j, i], lv, g_min, g_max, n_steps,
                               noise_scale, per_pulse)
                    gm = _cell(nm, z[t, 1, j, i], lv, g_min, g_max, n_steps,
                               noise_scale, per_pulse)
                    acc = acc + xv[t, i] * (gp - gm)
                y[t, j] = acc / norm
    return out


cdef double _LOG_SQRT_2PI = 0.9189385332046727


def em_step(x, w, m, s):
    """Single pass: moments are accumulated about the incoming means."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] xv = x
    cdef Py_ssize_t n = xv.shape[0]
    cdef Py_ssize_t k = len(w)
    cdef Py_ssize_t i, c
    cdef double[::1] mv = np.ascontiguousarray(m, dtype=np.float64)
    cdef double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    nk_a = np.zeros(k)
    s1_a = np.zeros(k)
    s2_a = np.zeros(k)
    cdef double[::1] nk = nk_a
    cdef double[::1] s1 = s1_a
    cdef double[::1] s2 = s2_a
    cdef double *buf = <double *> malloc(3 * k * sizeof(double))
    cdef double *base = buf
    cdef double *inv = buf + k
    cdef double *lr = buf + 2 * k
    cdef double ll = 0.0, mx, tot, z, r, d
    if buf == NULL:
        raise MemoryError
    try:
        for c in range(k):
            base[c] = log(wv[c]) - log(sv[c]) - _LOG_SQRT_2PI
            inv[c] = 1.0 / sv[c]
        with nogil:
            for i in range(n):
                mx = -1e308
                for c in range(k):
                    z = (xv[i] - mv[c]) * inv[c]
                    lr[c] = base[c] - 0.5 * z * z
                    if lr[c] > mx:
                        mx = lr[c]
                tot = 0.0
                for c in range(k):
                    lr[c] = exp(lr[c] - mx)
                    tot = tot + lr[c]
                ll = ll + mx + log(tot)
                for c in range(k):
                    r = lr[c] / tot
                    d = xv[i] - mv[c]
                    nk[c] = nk[c] + r
                    s1[c] = s1[c] + r * d
                    s2[c] = s2[c] + r * d * d
    finally:
        free(buf)
    shift = s1_a / nk_a
    mu_a = np.asarray(mv) + shift
    var_a = s2_a / nk_a - shift * shift
    return ll, nk_a, mu_a, var_a
