"""Pure numpy implementations of the hot kernels.

Every function here has a twin of the same name and signature in the
compiled ``_ckernels`` module; ``kernels`` picks one at import time.  All
arrays are complex128 / float64 and C-contiguous.
"""
from __future__ import annotations

import math

import numpy as np


def lp_norming(Y, p):
    """Row-wise l_p norms and norming functionals of a 2-d array.

    Returns ``(vals, xi)`` with ``sum(xi * y) = ||y||_p`` and ``xi`` of unit
    norm in the conjugate space.  ``p = inf`` ties go to the first maximal
    coordinate.
    """
    a = np.abs(Y)
    ph = np.where(a > 0, np.conj(Y) / np.where(a > 0, a, 1.0), 1.0)
    if math.isinf(p):
        k = np.argmax(a, axis=-1)
        vals = np.take_along_axis(a, k[:, None], axis=-1)[:, 0]
        xi = np.zeros_like(Y)
        rows = np.arange(Y.shape[0])
        xi[rows, k] = ph[rows, k]
        return vals, xi
    if p == 1.0:
        return a.sum(axis=-1), ph
    if p == 2.0:
        vals = np.sqrt((a * a).sum(axis=-1))
        xi = np.conj(Y) / np.where(vals > 0, vals, 1.0)[:, None]
        zero = vals == 0
    else:
        m = a.max(axis=-1)
        safe = np.where(m > 0, m, 1.0)
        r = a / safe[:, None]
        s = (r ** p).sum(axis=-1)
        vals = m * s ** (1.0 / p)
        nr = r / (np.where(m > 0, s, 1.0) ** (1.0 / p))[:, None]
        xi = nr ** (p - 1.0) * ph
        zero = m == 0
    if zero.any():
        xi[zero] = 0.0
        xi[zero, 0] = 1.0
    return vals, xi


def lp_smooth(Y, p, beta):
    """Row-wise l_p norms with a log-sum-exp surrogate for ``p = inf``.

    For finite ``p`` this is :func:`lp_norming`.  For ``p = inf`` the value is
    ``max|y| + log(sum exp(beta (|y_i| - max|y|))) / beta`` (an upper bound on
    the max norm) and the gradient is the matching softmax combination.
    """
    if not math.isinf(p) or beta <= 0:
        return lp_norming(Y, p)
    a = np.abs(Y)
    ph = np.where(a > 0, np.conj(Y) / np.where(a > 0, a, 1.0), 1.0)
    m = a.max(axis=-1, keepdims=True)
    e = np.exp(beta * (a - m))
    s = e.sum(axis=-1, keepdims=True)
    return (m + np.log(s) / beta)[:, 0], (e / s) * ph


def lp_opnorm_batch(T, p, q, X0, iters=200, tol=1e-13):
    """Batched power iteration for ``||T : l_p^m -> l_q^n||``.

    Parameters
    ----------
    T : (B, n, m) complex array
    p, q : float
        Domain and target exponents.
    X0 : (B, R, m) complex array
        Starting points; ``R`` restarts per matrix.
    iters : int
        Iteration cap per start.
    tol : float
        Relative stopping tolerance on the value.

    Returns
    -------
    vals : (B,) float
        Best value found (a lower bound on the operator norm).
    x : (B, m) complex
        Maximising unit vector of the domain.
    eta : (B, n) complex
        Norming functional of ``T x`` in the target.
    """
    B, n, m = T.shape
    R = X0.shape[1]
    pd = _conj(p)
    TT = np.repeat(T, R, axis=0)
    X = X0.reshape(B * R, m).astype(complex)
    _, X = _unit(X, p)
    prev = np.full(B * R, -1.0)
    for _ in range(iters):
        Y = np.einsum("bij,bj->bi", TT, X)
        vals, eta = lp_norming(Y, q)
        if np.all(np.abs(vals - prev) <= tol * np.maximum(vals, 1e-300)):
            break
        prev = vals
        W = np.einsum("bij,bi->bj", TT, eta)
        _, X = lp_norming(W, pd)
    Y = np.einsum("bij,bj->bi", TT, X)
    vals, eta = lp_norming(Y, q)
    vals = vals.reshape(B, R)
    k = np.argmax(vals, axis=1)
    rows = np.arange(B)
    return (
        vals[rows, k],
        X.reshape(B, R, m)[rows, k],
        eta.reshape(B, R, n)[rows, k],
    )


def sphere_grid_max2(T, p, q, ns, na):
    """Exhaustive maximum of ``||T x||_q`` over a grid of the unit sphere of l_p^2.

    The sphere is parametrised modulo a global phase by
    ``v(s, a) = (cos s, sin s e^{ia})`` with cell-centred nodes
    ``s = (i + 1/2) (pi/2) / ns``, ``a = (j + 1/2) 2 pi / na`` and
    ``x = v / ||v||_p``.

    Returns
    -------
    best : float
    s, a : float
        Parameters of the best node.
    """
    s = (np.arange(ns) + 0.5) * (0.5 * np.pi / ns)
    a = (np.arange(na) + 0.5) * (2 * np.pi / na)
    c, sn = np.cos(s), np.sin(s)
    if math.isinf(p):
        nv = np.maximum(c, sn)
    else:
        nv = (c ** p + sn ** p) ** (1.0 / p)
    c = c / nv
    sn = sn / nv
    ea = np.exp(1j * a)
    best, bs, ba = -1.0, 0.0, 0.0
    col0 = T[:, 0]
    col1 = T[:, 1]
    for i in range(ns):
        Y = c[i] * col0[None, :] + sn[i] * ea[:, None] * col1[None, :]
        v = _lp_rows(Y, q)
        j = int(np.argmax(v))
        if v[j] > best:
            best, bs, ba = float(v[j]), float(s[i]), float(a[j])
    return best, bs, ba


def gaussian_sq_norms(U, G, p):
    """``||sum_k G[t, k] U[:, k]||_p^2`` for every Gaussian draw ``t``."""
    Y = G @ U.T
    return _lp_rows(Y, p) ** 2


def _lp_rows(Y, p):
    a = np.abs(Y)
    if math.isinf(p):
        return a.max(axis=-1)
    if p == 1.0:
        return a.sum(axis=-1)
    if p == 2.0:
        return np.sqrt((a * a).sum(axis=-1))
    return (a ** p).sum(axis=-1) ** (1.0 / p)


def _conj(p):
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _unit(X, p):
    v = _lp_rows(X, p)
    v = np.where(v > 0, v, 1.0)
    return v, X / v[:, None]
