"""Evaluable norms on fixed coordinate spaces.

A :class:`NormHandle` wraps a norm on complex vectors or ``n x m`` matrices.
Besides values it provides (bilinear) subgradients, which is all the
interpolation solver needs: a functional ``G`` such that
``Re sum(G * dY)`` is the first-order change of the norm at ``Y``.

Handles also advertise two structural facts used to enlarge the class of
analytic certificates:

``phase_generators``
    a real ``(g, size)`` matrix ``P`` such that multiplying coordinates by
    ``exp(1j * P.T @ a)`` is an isometry for every ``a`` in ``R^g``
    (coordinate phases for lattices, row and column phases for lattice
    operator norms and Schatten norms).
``frame(x)``
    optional unitaries ``(L, R)`` with ``||L Y R|| = ||Y||`` in which the
    target becomes diagonal (unitarily invariant matrix norms).
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import kernels
from .spaces import Family, SpaceDescriptor, _parse_exponent, conjugate_exponent, dual_space, norms

__all__ = [
    "NormHandle",
    "SpaceNorm",
    "OperatorNorm",
    "MatrixSchattenNorm",
    "ScaledNorm",
    "CallableNorm",
    "Pi2Norm",
    "as_handle",
    "frobenius",
    "check_norm_axioms",
]


class NormHandle:
    """Base class for evaluable norms.

    Subclasses implement :meth:`value_grad`; everything else has defaults.
    """

    shape: tuple = ()
    is_2_convex_claimed: bool = False
    exact: bool = True

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def value_grad(self, Y, beta: float = 0.0, state=None):
        """Values and bilinear subgradients for a batch ``Y`` of shape ``(B, *shape)``.

        ``beta > 0`` requests a smooth upper surrogate where one is
        implemented (max-type norms); ``state`` is an opaque warm start
        returned by the previous call on a batch of the same size.
        """
        raise NotImplementedError

    def values(self, Y, state=None, robust: bool = False) -> np.ndarray:
        vals, _, _ = self.value_grad(np.asarray(Y, dtype=complex), 0.0, state)
        return vals

    def __call__(self, y) -> float:
        y = np.asarray(y, dtype=complex)
        return float(self.values(y[None], robust=True)[0])

    @property
    def phase_generators(self):
        return None

    def dual(self):
        return None

    def frame(self, x):
        return None

    def describe(self) -> str:
        return type(self).__name__


def _side_generators(X: SpaceDescriptor) -> np.ndarray:
    if X.family is Family.SCHATTEN:
        k = X.dim
        rows = np.kron(np.eye(k), np.ones((1, k)))
        cols = np.kron(np.ones((1, k)), np.eye(k))
        return np.vstack([rows, cols])
    return np.eye(X.dim)


def _matrix_generators(row_gens: np.ndarray, col_gens: np.ndarray) -> np.ndarray:
    n = row_gens.shape[1]
    m = col_gens.shape[1]
    R = np.repeat(row_gens, m, axis=1)
    C = np.tile(col_gens, (1, n))
    return np.vstack([R, C])


class SpaceNorm(NormHandle):
    """Norm of a :class:`~banach_interp.spaces.SpaceDescriptor`."""

    def __init__(self, X: SpaceDescriptor):
        self.X = X
        self.shape = X.shape

    def value_grad(self, Y, beta=0.0, state=None):
        Y = np.asarray(Y, dtype=complex)
        B = Y.shape[0]
        X = self.X
        if X.family is Family.LP:
            vals, xi = kernels.lp_smooth(np.ascontiguousarray(Y.reshape(B, -1)), X.p, beta)
            return vals, xi.reshape(Y.shape), None
        if X.family is Family.WEIGHTED_L2:
            w = X.weight_array
            vals = np.sqrt((w * np.abs(Y) ** 2).sum(axis=-1))
            safe = np.where(vals > 0, vals, 1.0)
            return vals, w * np.conj(Y) / safe[:, None], None
        return _schatten_value_grad(Y, X.p, beta)

    def values(self, Y, state=None, robust=False):
        return norms(self.X, np.asarray(Y))

    @property
    def phase_generators(self):
        return _side_generators(self.X)

    def dual(self):
        return SpaceNorm(dual_space(self.X))

    def frame(self, x):
        if self.X.family is not Family.SCHATTEN:
            return None
        U, _, Vh = np.linalg.svd(np.asarray(x, dtype=complex))
        return U, Vh

    def describe(self):
        return str(self.X)


def _schatten_value_grad(Y, p, beta=0.0):
    U, s, Vh = np.linalg.svd(Y, full_matrices=False)
    if math.isinf(p):
        if beta > 0:
            m = s[:, :1]
            e = np.exp(beta * (s - m))
            tot = e.sum(axis=1, keepdims=True)
            vals = (m + np.log(tot) / beta)[:, 0]
            d = e / tot
        else:
            vals = s[:, 0]
            d = np.zeros_like(s)
            d[:, 0] = 1.0
    elif p == 1.0:
        vals = s.sum(axis=1)
        d = np.ones_like(s)
    else:
        vals = (s ** p).sum(axis=1) ** (1.0 / p)
        safe = np.where(vals > 0, vals, 1.0)
        d = (s / safe[:, None]) ** (p - 1.0)
    G = np.conj(U) @ (d[:, :, None] * np.conj(Vh))
    return vals, G, None


class MatrixSchattenNorm(NormHandle):
    """``||diag(left) X diag(right)||_{S_p}`` on rectangular matrices.

    ``p = inf`` gives the weighted spectral norm, ``p = 2`` the weighted
    Frobenius norm, ``p = 1`` the weighted trace norm.
    """

    def __init__(self, shape, p, left=None, right=None):
        self.shape = tuple(shape)
        self.p = _parse_exponent(p)
        self.left = None if left is None else np.asarray(left, dtype=float)
        self.right = None if right is None else np.asarray(right, dtype=float)
        self.is_2_convex_claimed = self.p >= 2.0

    def _scale(self, Y):
        if self.left is not None:
            Y = self.left[:, None] * Y
        if self.right is not None:
            Y = Y * self.right[None, :]
        return Y

    def value_grad(self, Y, beta=0.0, state=None):
        Y = np.asarray(Y, dtype=complex)
        vals, G, _ = _schatten_value_grad(self._scale(Y), self.p, beta)
        return vals, self._scale(G), None

    @property
    def phase_generators(self):
        n, m = self.shape
        return _matrix_generators(np.eye(n), np.eye(m))

    def dual(self):
        inv = lambda v: None if v is None else 1.0 / v
        return MatrixSchattenNorm(self.shape, conjugate_exponent(self.p), inv(self.left), inv(self.right))

    def frame(self, x):
        if self.left is not None or self.right is not None:
            return None
        U, _, Vh = np.linalg.svd(np.asarray(x, dtype=complex))
        return U, Vh

    def describe(self):
        ps = "inf" if math.isinf(self.p) else f"{self.p:g}"
        return f"S_{ps}{self.shape}"


def frobenius(shape) -> MatrixSchattenNorm:
    """Frobenius (Hilbert-Schmidt) norm on matrices of the given shape."""
    return MatrixSchattenNorm(shape, 2.0)


class OperatorNorm(NormHandle):
    """``||T : E -> G||`` on ``G.dim x E.dim`` matrices.

    Exact for Hilbert-to-Hilbert, ``l_1`` domains, ``l_inf`` targets and
    ``l_inf^2`` into a Hilbert space;
    otherwise a restarted power iteration (a lower estimate, flagged by
    ``exact = False``) warm-started from the previous batch.

    Parameters
    ----------
    E, G : SpaceDescriptor
        Domain and target; ``G`` plays the role of ``F*`` in tensor language.
    restarts : int
        Random restarts added to the warm start in the inexact case.
    seed : int
        Seed of the restart generator (evaluation is deterministic).
    """

    def __init__(self, E: SpaceDescriptor, G: SpaceDescriptor, restarts: int = 3, seed: int = 0):
        self.E = E
        self.G = G
        self.shape = (G.size, E.size)
        self.restarts = int(restarts)
        self.seed = seed
        self.is_2_convex_claimed = G.is_hilbert
        both_lattice = E.is_lattice and G.is_lattice
        self._mode = "power"
        if E.is_hilbert and G.is_hilbert:
            # S_2 is l_2 of the entries, so Schatten-2 spaces qualify too
            self._mode = "svd"
        elif both_lattice and E.family is Family.LP and E.p == 1.0:
            self._mode = "columns"
        elif both_lattice and G.family is Family.LP and math.isinf(G.p):
            self._mode = "rows"
        elif both_lattice and G.is_hilbert and E.family is Family.LP and math.isinf(E.p) and E.size == 2:
            # sup of a quadratic form over the bidisc: M11 + M22 + 2|M12|
            self._mode = "bidisc"
        self.exact = self._mode != "power" or min(self.shape) == 1
        # weighted spaces become l_2 after diagonal scaling
        self._ls = np.sqrt(G.weight_array) if G.family is Family.WEIGHTED_L2 else None
        self._rs = 1.0 / np.sqrt(E.weight_array) if E.family is Family.WEIGHTED_L2 else None
        self._pe = E.p
        self._pg = G.p

    def _scaled(self, Y):
        if self._ls is not None:
            Y = self._ls[:, None] * Y
        if self._rs is not None:
            Y = Y * self._rs[None, :]
        return Y

    def value_grad(self, Y, beta=0.0, state=None, restarts=None):
        Y = np.asarray(Y, dtype=complex)
        if self._mode == "power" and not (self.E.is_lattice and self.G.is_lattice):
            warm = restarts is None and state is not None and state.shape == (Y.shape[0], self.E.size)
            R = (min(self.restarts, 1) if warm else self.restarts) if restarts is None else restarts
            # warm-started calls inside an optimisation loop need few steps
            vals, G, state = _generic_opnorm(Y, self.E, self.G, state if warm else None, R, self.seed, iters=40 if warm else 200)
            return vals, G, state
        Ys = np.ascontiguousarray(self._scaled(Y))
        B, n, m = Ys.shape
        if self._mode == "svd":
            U, s, Vh = np.linalg.svd(Ys)
            vals = s[:, 0]
            G = np.conj(U[:, :, 0])[:, :, None] * np.conj(Vh[:, 0, :])[:, None, :]
        elif self._mode == "columns":
            cn = np.empty((B, m))
            for j in range(m):
                cn[:, j], _ = kernels.lp_norming(np.ascontiguousarray(Ys[:, :, j]), self._pg)
            k = np.argmax(cn, axis=1)
            rows = np.arange(B)
            vals, eta = kernels.lp_norming(np.ascontiguousarray(Ys[rows, :, k]), self._pg)
            G = np.zeros_like(Ys)
            G[rows, :, k] = eta
        elif self._mode == "rows":
            pd = conjugate_exponent(self._pe)
            rn = np.empty((B, n))
            for i in range(n):
                rn[:, i], _ = kernels.lp_norming(np.ascontiguousarray(Ys[:, i, :]), pd)
            k = np.argmax(rn, axis=1)
            rows = np.arange(B)
            vals, x = kernels.lp_norming(np.ascontiguousarray(Ys[rows, k, :]), pd)
            G = np.zeros_like(Ys)
            G[rows, k, :] = x
        elif self._mode == "bidisc":
            M12 = np.sum(np.conj(Ys[:, :, 0]) * Ys[:, :, 1], axis=1)
            a = np.abs(M12)
            ph = np.where(a > 0, np.conj(M12) / np.where(a > 0, a, 1.0), 1.0)
            x = np.stack([np.ones(B, dtype=complex), ph], axis=1)
            y = np.einsum("bij,bj->bi", Ys, x)
            vals = np.linalg.norm(y, axis=1)
            eta = np.conj(y) / np.where(vals > 0, vals, 1.0)[:, None]
            G = eta[:, :, None] * x[:, None, :]
        else:
            R = self.restarts if restarts is None else restarts
            if restarts is None and state is not None and state.shape == (B, m):
                # warm-started evaluations inside an optimisation loop
                R = min(R, 1)
            rng = np.random.default_rng(self.seed)
            starts = rng.standard_normal((B, R + 1, m)) + 1j * rng.standard_normal((B, R + 1, m))
            starts[:, 0, :] = 1.0
            if state is not None and state.shape == (B, m):
                starts = np.concatenate([state[:, None, :], starts], axis=1)
            vals, x, eta = kernels.lp_opnorm_batch(Ys, self._pe, self._pg, np.ascontiguousarray(starts), 200, 1e-13)
            G = eta[:, :, None] * x[:, None, :]
            state = x
        return vals, self._scaled(G), state

    def values(self, Y, state=None, robust=False):
        vals, _, _ = self.value_grad(Y, 0.0, state, restarts=12 if robust else None)
        return vals

    @property
    def phase_generators(self):
        return _matrix_generators(_side_generators(self.G), _side_generators(self.E))

    def dual(self):
        if self._mode == "svd":
            left = np.ones(self.G.size) if self._ls is None else self._ls
            right = np.ones(self.E.size) if self._rs is None else self._rs
            return MatrixSchattenNorm(self.shape, 1.0, 1.0 / left, 1.0 / right)
        return None

    def describe(self):
        return f"||.: {self.E} -> {self.G}||"


def _norming_batch(X: SpaceDescriptor, Y):
    """Norms and unit norming functionals of a batch ``Y`` of shape ``(N, X.size)``."""
    from .spaces import norming_functional

    N = Y.shape[0]
    if X.family is not Family.SCHATTEN:
        vals = norms(X, Y.reshape((N,) + X.shape))
        xi = np.stack([norming_functional(X, y.reshape(X.shape)).ravel() for y in Y])
        return vals, xi
    k = X.dim
    if k == 2:
        return _schatten2_norming(Y.reshape(N, 2, 2), X.p)
    U, s, Vh = np.linalg.svd(Y.reshape(N, k, k))
    p = X.p
    if math.isinf(p):
        vals = s[:, 0]
        d = (s >= s[:, :1] * (1 - 1e-12)).astype(float)
        d /= d.sum(axis=1, keepdims=True)
    elif p == 1.0:
        vals = s.sum(axis=1)
        d = np.ones_like(s)
    else:
        vals = (s ** p).sum(axis=1) ** (1.0 / p)
        d = (s / np.where(vals > 0, vals, 1.0)[:, None]) ** (p - 1.0)
    # xi = conj(U diag(d) V^*) so that sum(xi * y) = sum(d s)
    xi = np.conj(np.einsum("nij,nj,njk->nik", U, d, Vh))
    zero = vals == 0
    if np.any(zero):
        xi[zero] = 0.0
        xi[zero, 0, 0] = 1.0
    return vals, xi.reshape(N, -1)


def _schatten_weights(s1, s2, p):
    """Norm of ``(s1, s2)`` in ``l_p`` and the norming weights ``d1, d2``."""
    if math.isinf(p):
        vals = s1.copy()
        tie = s1 - s2 <= 1e-12 * s1
        d1 = np.where(tie, 0.5, 1.0)
        d2 = np.where(tie, 0.5, 0.0)
    elif p == 1.0:
        vals = s1 + s2
        d1 = d2 = np.ones_like(s1)
    else:
        vals = (s1 ** p + s2 ** p) ** (1.0 / p)
        safe = np.where(vals > 0, vals, 1.0)
        d1 = (s1 / safe) ** (p - 1.0)
        d2 = (s2 / safe) ** (p - 1.0)
    return vals, d1, d2


def _schatten2_norming(Y, p):
    """Closed-form Schatten norming on ``2 x 2`` matrices (no LAPACK calls).

    With ``W`` the unitary polar factor, ``sum_i d_i u_i v_i^* = alpha W + beta Y``
    where ``alpha + beta s_i = d_i``.
    """
    a, b, c, d = Y[:, 0, 0], Y[:, 0, 1], Y[:, 1, 0], Y[:, 1, 1]
    fro2 = (np.abs(Y) ** 2).sum(axis=(1, 2))
    det = a * d - b * c
    adet = np.abs(det)
    # eigenvalue gap of Y^* Y without cancellation
    h11 = np.abs(a) ** 2 + np.abs(c) ** 2
    h22 = np.abs(b) ** 2 + np.abs(d) ** 2
    h12 = np.conj(a) * b + np.conj(c) * d
    ssum = np.sqrt(fro2 + 2.0 * adet)
    safe = np.where(ssum > 0, ssum, 1.0)
    sdiff = np.sqrt((h11 - h22) ** 2 + 4.0 * np.abs(h12) ** 2) / safe
    s1 = 0.5 * (ssum + sdiff)
    s2 = np.maximum(0.5 * (ssum - sdiff), 0.0)
    vals, d1, d2 = _schatten_weights(s1, s2, p)
    ph = np.where(adet > 0, det / np.where(adet > 0, adet, 1.0), 0.0)
    adjh = np.empty_like(Y)
    adjh[:, 0, 0] = np.conj(d)
    adjh[:, 0, 1] = -np.conj(c)
    adjh[:, 1, 0] = -np.conj(b)
    adjh[:, 1, 1] = np.conj(a)
    W = (Y + ph[:, None, None] * adjh) / safe[:, None, None]
    gap = s1 - s2
    split = gap > 1e-8 * np.where(s1 > 0, s1, 1.0)
    beta = np.where(split, (d1 - d2) / np.where(split, gap, 1.0), 0.0)
    alpha = np.where(split, d1 - beta * s1, 0.5 * (d1 + d2))
    xi = np.conj(alpha[:, None, None] * W + beta[:, None, None] * Y)
    zero = ssum == 0
    if np.any(zero):
        xi[zero] = 0.0
        xi[zero, 0, 0] = 1.0
    return vals, xi.reshape(Y.shape[0], 4)


def _generic_opnorm(Y, E, G, state, restarts, seed, iters=200, tol=1e-12):
    """Power iteration with SVD-based norming maps (Schatten spaces).

    All restarts of all batch members iterate together; each keeps its own
    stopping test.
    """
    B = Y.shape[0]
    m = E.size
    Ed = dual_space(E)
    rng = np.random.default_rng(seed)
    S = restarts + 1
    starts = rng.standard_normal((S, m)) + 1j * rng.standard_normal((S, m))
    X = np.broadcast_to(starts, (B, S, m)).copy()
    if state is not None:
        X = np.concatenate([state[:, None, :], X], axis=1)
        S += 1
    T = np.repeat(Y, S, axis=0)  # (B*S, n, m)
    X = X.reshape(B * S, m)
    nx, _ = _norming_batch(E, X)
    X = X / nx[:, None]
    prev = np.full(B * S, -1.0)
    active = np.ones(B * S, dtype=bool)
    vals = np.zeros(B * S)
    eta = np.zeros((B * S, T.shape[1]), dtype=complex)
    for _ in range(iters):
        idx = np.flatnonzero(active)
        y = np.einsum("bij,bj->bi", T[idx], X[idx])
        v, e = _norming_batch(G, y)
        vals[idx], eta[idx] = v, e
        done = np.abs(v - prev[idx]) <= tol * np.maximum(v, 1e-300)
        prev[idx] = v
        active[idx[done]] = False
        idx = idx[~done]
        if idx.size == 0:
            break
        w = np.einsum("bji,bj->bi", T[idx], eta[idx])
        _, X[idx] = _norming_batch(Ed, w)
    vals = vals.reshape(B, S)
    k = np.argmax(vals, axis=1)
    rows = np.arange(B)
    best_x = X.reshape(B, S, m)[rows, k]
    best_eta = eta.reshape(B, S, -1)[rows, k]
    return vals[rows, k], best_eta[:, :, None] * best_x[:, None, :], best_x


class ScaledNorm(NormHandle):
    """``c * base`` for a positive constant ``c``."""

    def __init__(self, base: NormHandle, c: float):
        if not c > 0:
            raise ValueError("scale must be positive")
        self.base = base
        self.c = float(c)
        self.shape = base.shape
        self.exact = base.exact
        self.is_2_convex_claimed = base.is_2_convex_claimed

    def value_grad(self, Y, beta=0.0, state=None):
        vals, G, state = self.base.value_grad(Y, beta * self.c, state)
        return self.c * vals, self.c * G, state

    def values(self, Y, state=None, robust=False):
        return self.c * self.base.values(Y, state, robust)

    @property
    def phase_generators(self):
        return self.base.phase_generators

    def dual(self):
        d = self.base.dual()
        return None if d is None else ScaledNorm(d, 1.0 / self.c)

    def frame(self, x):
        return self.base.frame(x)

    def describe(self):
        return f"{self.c:g}*{self.base.describe()}"


class CallableNorm(NormHandle):
    """Norm given by a Python callable; subgradients by central differences."""

    def __init__(self, fn: Callable, shape, grad: Callable | None = None, two_convex: bool = False, h: float = 1e-7):
        self.fn = fn
        self.shape = tuple(shape)
        self.grad = grad
        self.h = h
        self.is_2_convex_claimed = two_convex

    def value_grad(self, Y, beta=0.0, state=None):
        Y = np.asarray(Y, dtype=complex)
        B = Y.shape[0]
        vals = np.array([float(self.fn(Y[b])) for b in range(B)])
        if self.grad is not None:
            G = np.stack([np.asarray(self.grad(Y[b]), dtype=complex) for b in range(B)])
            return vals, G, None
        G = np.zeros_like(Y)
        for b in range(B):
            flat = Y[b].ravel()
            g = np.zeros(flat.size, dtype=complex)
            for i in range(flat.size):
                for unit in (1.0, 1j):
                    e = np.zeros_like(flat)
                    e[i] = unit * self.h
                    d = (self.fn((flat + e).reshape(self.shape)) - self.fn((flat - e).reshape(self.shape))) / (2 * self.h)
                    g[i] += d if unit == 1.0 else -1j * d
            G[b] = g.reshape(self.shape)
        return vals, G, None

    def values(self, Y, state=None, robust=False):
        Y = np.asarray(Y, dtype=complex)
        return np.array([float(self.fn(y)) for y in Y])


class Pi2Norm(NormHandle):
    """2-summing norm of ``u : X -> target`` with a Hilbert target.

    ``target`` is ``None`` (plain ``l_2`` of the rows) or a ``WeightedL2``
    descriptor.  Exact on Hilbert domains and on two-dimensional ``l_1`` /
    ``l_inf`` domains; otherwise a semidefinite Pietsch bound.
    """

    is_2_convex_claimed = True

    def __init__(self, X: SpaceDescriptor, rows: int, target: SpaceDescriptor | None = None):
        self.X = X
        self.target = target
        self.shape = (rows, X.size)
        self._ls = None
        if target is not None:
            if not target.is_hilbert or not target.is_lattice:
                raise ValueError("Pi2Norm handles need a Hilbert target")
            if target.dim != rows:
                raise ValueError("target dimension must equal the number of rows")
            self._ls = np.sqrt(target.weight_array)
        from .factorization import _pi2_hilbert_is_fast

        self.exact = True
        self._fast = _pi2_hilbert_is_fast(X)

    def value_grad(self, Y, beta=0.0, state=None):
        from .factorization import _pi2_hilbert

        Y = np.asarray(Y, dtype=complex)
        if self._ls is not None:
            Y = self._ls[:, None] * Y
        B = Y.shape[0]
        vals = np.empty(B)
        G = np.empty_like(Y)
        for b in range(B):
            u = Y[b]
            val, Sigma = _pi2_hilbert(u, self.X)
            vals[b] = val
            if val > 0:
                G[b] = (Sigma @ u.conj().T).T / val
            else:
                G[b] = 0.0
        if self._ls is not None:
            G = self._ls[:, None] * G
        return vals, G, None

    @property
    def phase_generators(self):
        if not self.X.is_lattice:
            return None
        return _matrix_generators(np.eye(self.shape[0]), np.eye(self.X.dim))

    def describe(self):
        return f"pi2(.: {self.X} -> l2)"


def as_handle(obj) -> NormHandle:
    """Coerce a descriptor or handle to a :class:`NormHandle`."""
    if isinstance(obj, NormHandle):
        return obj
    if isinstance(obj, SpaceDescriptor):
        return SpaceNorm(obj)
    raise TypeError(f"cannot make a norm handle from {type(obj).__name__}")


def check_norm_axioms(h: NormHandle, trials: int = 50, seed=0, tol: float = 1e-9) -> dict:
    """Spot-check homogeneity and subadditivity on random samples."""
    rng = np.random.default_rng(seed)
    worst_h = 0.0
    worst_t = 0.0
    for _ in range(trials):
        x = rng.standard_normal(h.shape) + 1j * rng.standard_normal(h.shape)
        y = rng.standard_normal(h.shape) + 1j * rng.standard_normal(h.shape)
        c = complex(rng.standard_normal(), rng.standard_normal())
        nx, ny = h(x), h(y)
        worst_h = max(worst_h, abs(h(c * x) - abs(c) * nx) / max(abs(c) * nx, 1e-300))
        worst_t = max(worst_t, (h(x + y) - nx - ny) / max(nx + ny, 1e-300))
    return {
        "homogeneity_error": worst_h,
        "triangle_excess": max(worst_t, 0.0),
        "ok": worst_h <= tol and worst_t <= tol,
    }
