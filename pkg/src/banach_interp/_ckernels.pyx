# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_pykernels``.

Same names, signatures and return conventions; see the numpy versions for
the mathematical description.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow, fabs, exp, log, cos, sin, isinf, M_PI, INFINITY

cnp.import_array()


cdef inline double _conj_exp(double p) nogil:
    if p == 1.0:
        return INFINITY
    if isinf(p):
        return 1.0
    return p / (p - 1.0)


cdef inline double _abs2(double complex z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline double _pow_half(double r2, double p) noexcept nogil:
    # r2 ** (p / 2) with fast paths for the common exponents
    if p == 4.0:
        return r2 * r2
    if p == 2.0:
        return r2
    return pow(r2, 0.5 * p)


cdef void _norming_row(double complex[:] y, double p, double complex[:] xi, double* val) noexcept nogil:
    cdef Py_ssize_t i, n = y.shape[0], k = 0
    cdef double a2, m2 = 0.0, s = 0.0, t, c, a
    if isinf(p):
        for i in range(n):
            a2 = _abs2(y[i])
            xi[i] = 0.0
            if a2 > m2:
                m2 = a2
                k = i
        a = sqrt(m2)
        if a > 0:
            xi[k] = y[k].conjugate() / a
        else:
            xi[k] = 1.0
        val[0] = a
        return
    if p == 1.0:
        for i in range(n):
            a = sqrt(_abs2(y[i]))
            s += a
            if a > 0:
                xi[i] = y[i].conjugate() / a
            else:
                xi[i] = 1.0
        val[0] = s
        return
    for i in range(n):
        a2 = _abs2(y[i])
        if a2 > m2:
            m2 = a2
    if m2 == 0:
        for i in range(n):
            xi[i] = 0.0
        xi[0] = 1.0
        val[0] = 0.0
        return
    # with r2 = |y_i|^2 / max|y|^2 and t = r2^(p/2):
    # ||y|| = max|y| s^(1/p) and xi_i = conj(y_i) t / r2 * s^((1-p)/p) / max|y|
    for i in range(n):
        t = _pow_half(_abs2(y[i]) / m2, p)
        s += t
        xi[i] = t
    a = sqrt(m2)
    val[0] = a * (sqrt(s) if p == 2.0 else pow(s, 1.0 / p))
    c = pow(s, (1.0 - p) / p) / a
    for i in range(n):
        a2 = _abs2(y[i]) / m2
        if a2 > 0:
            xi[i] = y[i].conjugate() * (xi[i].real / a2 * c)
        else:
            xi[i] = 0.0


cdef double _lp_value(double complex[:] y, double p) noexcept nogil:
    cdef Py_ssize_t i, n = y.shape[0]
    cdef double a2, m2 = 0.0, s = 0.0
    if isinf(p):
        for i in range(n):
            a2 = _abs2(y[i])
            if a2 > m2:
                m2 = a2
        return sqrt(m2)
    if p == 1.0:
        for i in range(n):
            s += sqrt(_abs2(y[i]))
        return s
    if p == 2.0:
        for i in range(n):
            s += _abs2(y[i])
        return sqrt(s)
    if p == 4.0:
        for i in range(n):
            a2 = _abs2(y[i])
            s += a2 * a2
        return sqrt(sqrt(s))
    for i in range(n):
        a2 = _abs2(y[i])
        if a2 > m2:
            m2 = a2
    if m2 == 0:
        return 0.0
    for i in range(n):
        s += _pow_half(_abs2(y[i]) / m2, p)
    return sqrt(m2) * pow(s, 1.0 / p)


def lp_norming(double complex[:, ::1] Y, double p):
    cdef Py_ssize_t b, B = Y.shape[0], D = Y.shape[1]
    vals = np.empty(B)
    xi = np.empty((B, D), dtype=np.complex128)
    cdef double[::1] v = vals
    cdef double complex[:, ::1] X = xi
    with nogil:
        for b in range(B):
            _norming_row(Y[b], p, X[b], &v[b])
    return vals, xi


def lp_smooth(double complex[:, ::1] Y, double p, double beta):
    if not isinf(p) or beta <= 0:
        return lp_norming(Y, p)
    cdef Py_ssize_t b, i, B = Y.shape[0], D = Y.shape[1]
    vals = np.empty(B)
    xi = np.empty((B, D), dtype=np.complex128)
    cdef double[::1] v = vals
    cdef double complex[:, ::1] X = xi
    cdef double m, s, a, e
    with nogil:
        for b in range(B):
            m = 0.0
            for i in range(D):
                a = sqrt(_abs2(Y[b, i]))
                if a > m:
                    m = a
            s = 0.0
            for i in range(D):
                s += exp(beta * (sqrt(_abs2(Y[b, i])) - m))
            v[b] = m + log(s) / beta
            for i in range(D):
                a = sqrt(_abs2(Y[b, i]))
                e = exp(beta * (a - m)) / s
                if a > 0:
                    X[b, i] = Y[b, i].conjugate() * (e / a)
                else:
                    X[b, i] = e
    return vals, xi


def lp_opnorm_batch(double complex[:, :, ::1] T, double p, double q, double complex[:, :, ::1] X0,
                    int iters=200, double tol=1e-13):
    cdef Py_ssize_t B = T.shape[0], n = T.shape[1], m = T.shape[2], R = X0.shape[1]
    cdef Py_ssize_t b, r, i, j, it
    cdef double pd = _conj_exp(p)
    cdef double val, prev, nv, best
    vals = np.full(B, -1.0)
    xs = np.zeros((B, m), dtype=np.complex128)
    etas = np.zeros((B, n), dtype=np.complex128)
    cdef double[::1] V = vals
    cdef double complex[:, ::1] XS = xs
    cdef double complex[:, ::1] ES = etas
    x_arr = np.empty(m, dtype=np.complex128)
    y_arr = np.empty(n, dtype=np.complex128)
    e_arr = np.empty(n, dtype=np.complex128)
    w_arr = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] x = x_arr
    cdef double complex[::1] y = y_arr
    cdef double complex[::1] eta = e_arr
    cdef double complex[::1] w = w_arr
    cdef double complex acc
    with nogil:
        for b in range(B):
            for r in range(R):
                for j in range(m):
                    x[j] = X0[b, r, j]
                nv = _lp_value(x, p)
                if nv == 0:
                    x[0] = 1.0
                    nv = 1.0
                for j in range(m):
                    x[j] = x[j] / nv
                prev = -1.0
                for it in range(iters + 1):
                    for i in range(n):
                        acc = 0
                        for j in range(m):
                            acc = acc + T[b, i, j] * x[j]
                        y[i] = acc
                    _norming_row(y, q, eta, &val)
                    if fabs(val - prev) <= tol * (val if val > 1e-300 else 1e-300) or it == iters:
                        break
                    prev = val
                    for j in range(m):
                        acc = 0
                        for i in range(n):
                            acc = acc + T[b, i, j] * eta[i]
                        w[j] = acc
                    _norming_row(w, pd, x, &nv)
                if val > V[b]:
                    V[b] = val
                    for j in range(m):
                        XS[b, j] = x[j]
                    for i in range(n):
                        ES[b, i] = eta[i]
    return vals, xs, etas


def sphere_grid_max2(double complex[:, ::1] T, double p, double q, int ns, int na):
    cdef Py_ssize_t n = T.shape[0], i, j, k
    cdef double s, a, c, sn, nv, best = -1.0, bs = 0.0, ba = 0.0, v
    cdef double hs = 0.5 * M_PI / ns, ha = 2.0 * M_PI / na
    y_arr = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] y = y_arr
    ph = np.exp(1j * (np.arange(na) + 0.5) * ha)
    cdef double complex[::1] E = ph
    # T[:, 1] rotated by every grid phase, computed once
    rot_arr = np.asarray(T)[:, 1][None, :] * ph[:, None]
    cdef double complex[:, ::1] R = np.ascontiguousarray(rot_arr)
    with nogil:
        for i in range(ns):
            s = (i + 0.5) * hs
            c = cos(s)
            sn = sin(s)
            if isinf(p):
                nv = c if c > sn else sn
            else:
                nv = pow(pow(c, p) + pow(sn, p), 1.0 / p)
            c = c / nv
            sn = sn / nv
            for j in range(na):
                for k in range(n):
                    y[k] = c * T[k, 0] + sn * R[j, k]
                v = _lp_value(y, q)
                if v > best:
                    best = v
                    bs = s
                    ba = (j + 0.5) * ha
    return best, bs, ba


def gaussian_sq_norms(double complex[:, ::1] U, double[:, ::1] G, double p):
    cdef Py_ssize_t d = U.shape[0], K = U.shape[1], N = G.shape[0], t, i, k
    out = np.empty(N)
    cdef double[::1] o = out
    y_arr = np.empty(d, dtype=np.complex128)
    cdef double complex[::1] y = y_arr
    cdef double complex acc
    cdef double v
    with nogil:
        for t in range(N):
            for i in range(d):
                acc = 0
                for k in range(K):
                    acc = acc + G[t, k] * U[i, k]
                y[i] = acc
            v = _lp_value(y, p)
            o[t] = v * v
    return out
