"""Analytic matrix functions on the unit disc.

Contents
--------
* :class:`MatrixPolynomial`: Taylor polynomials with matrix coefficients.
* :func:`outer_spectral_factorize`: Wilson's Newton iteration for
  ``A*(t) A(t) = Phi(t)`` with ``A`` analytic and outer.
* :func:`outerness_check`: winding number of ``det A`` along the circle.
* :func:`gamma_family_norm`: the factorization norm
  ``gamma(T) = inf alpha(A) beta(B)`` over ``T = B^T A``.
* :func:`theorem23_factorize`: analytic factorization ``F(z) = B(z)^T A(z)``
  with a Poisson-integral bound on ``alpha(A(z)) beta(B(z))``.
* :func:`two_convexity_check` and :func:`subharmonicity_check`: randomized
  property testers.

All boundary grids are the ``N``-th roots of unity ``exp(2 pi i k / N)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from ._solver import circle_grid
from .estimates import NormEstimate, complex_from_json, to_jsonable
from .handles import MatrixSchattenNorm, NormHandle, OperatorNorm, SpaceNorm, check_norm_axioms
from .interp import InterpolationPair, closed_form_interpolant, harmonic_measure_upper, poisson_integral_log
from .spaces import Family, SpaceDescriptor

__all__ = [
    "MatrixPolynomial",
    "SpectralFactorizationError",
    "outer_spectral_factorize",
    "winding_number",
    "outerness_check",
    "BoundaryNormFamily",
    "gamma_family_norm",
    "FactorizationResult",
    "theorem23_factorize",
    "two_convexity_margin",
    "two_convexity_check",
    "subharmonicity_check",
]


class MatrixPolynomial:
    """``F(z) = sum_k z**k C_k`` with ``n x m`` complex coefficients.

    Parameters
    ----------
    coeffs : array_like
        Shape ``(d + 1, n, m)``; a list of matrices, or a 1-D array of scalar
        coefficients (treated as ``1 x 1``).
    """

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=complex)
        if c.ndim == 1:
            c = c[:, None, None]
        if c.ndim == 2:
            c = c[None]
        if c.ndim != 3 or c.shape[0] == 0:
            raise ValueError("coefficients must have shape (d + 1, n, m)")
        self.coeffs = c

    @classmethod
    def constant(cls, M) -> "MatrixPolynomial":
        return cls(np.asarray(M, dtype=complex)[None])

    @classmethod
    def identity(cls, m: int) -> "MatrixPolynomial":
        return cls.constant(np.eye(m))

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def shape(self) -> tuple:
        return self.coeffs.shape[1:]

    def evaluate(self, z) -> np.ndarray:
        """Values at ``z`` (scalar or array); shape ``z.shape + (n, m)``."""
        z = np.asarray(z, dtype=complex)
        out = np.broadcast_to(self.coeffs[-1], z.shape + self.shape).copy()
        for C in self.coeffs[-2::-1]:
            out = out * z[..., None, None] + C
        return out

    __call__ = evaluate

    def boundary(self, N: int, offset: float = 0.0) -> np.ndarray:
        """Samples at ``exp(2 pi i (k + offset) / N)``, shape ``(N, n, m)``."""
        return self.evaluate(circle_grid(N, offset))

    def transpose(self) -> "MatrixPolynomial":
        return MatrixPolynomial(np.swapaxes(self.coeffs, 1, 2))

    def trim(self, tol: float = 0.0) -> "MatrixPolynomial":
        """Drop trailing coefficients with max modulus ``<= tol``."""
        mags = np.abs(self.coeffs).reshape(self.coeffs.shape[0], -1).max(axis=1)
        keep = np.nonzero(mags > tol)[0]
        d = int(keep[-1]) if keep.size else 0
        return MatrixPolynomial(self.coeffs[: d + 1])

    def to_json(self) -> dict:
        return {"shape": list(self.shape), "degree": self.degree, "coeffs": to_jsonable(self.coeffs)}

    @classmethod
    def from_json(cls, obj) -> "MatrixPolynomial":
        if isinstance(obj, dict) and "coeffs" in obj:
            c = complex_from_json(obj["coeffs"])
            if "shape" in obj:
                n, m = obj["shape"]
                c = c.reshape(-1, n, m)
            return cls(c)
        return cls(complex_from_json(obj))

    def __repr__(self):
        return f"MatrixPolynomial(shape={self.shape}, degree={self.degree})"


class SpectralFactorizationError(ValueError):
    """Raised when the Newton iteration misses its target.

    ``residual`` and ``iterations`` record the final state.
    """

    def __init__(self, msg, residual=math.nan, iterations=0):
        super().__init__(msg)
        self.residual = residual
        self.iterations = iterations


def _causal(G, half_zero=True):
    """Fourier coefficients of the causal part of grid samples.

    With ``half_zero`` the self-conjugate frequencies (zero and, for even
    ``N``, the Nyquist frequency) are halved, so that ``X + X*`` recovers a
    Hermitian ``G``; otherwise frequencies ``>= N / 2`` are dropped.
    """
    N = G.shape[0]
    c = np.fft.fft(G, axis=0) / N
    if half_zero:
        c[0] *= 0.5
        if N % 2 == 0:
            c[N // 2] *= 0.5
        c[N // 2 + 1 :] = 0.0
    else:
        c[(N + 1) // 2 :] = 0.0
    return c


def _to_samples(c):
    N = c.shape[0]
    return np.fft.ifft(c, axis=0) * N


def _upsample(Phi, M):
    """Trigonometric interpolation of ``N`` grid samples onto ``M >= N`` points.

    Falls back to the original samples when the interpolant is not
    positive definite.
    """
    N = Phi.shape[0]
    if M <= N:
        return Phi
    c = np.fft.fft(Phi, axis=0) / N
    f = np.zeros((M,) + Phi.shape[1:], dtype=complex)
    h = N // 2
    f[:h] = c[:h]
    f[M - (N - h - 1) :] = c[h + 1 :] if N - h - 1 > 0 else f[M:]
    if N % 2 == 0:
        f[h] = 0.5 * c[h]
        f[M - h] = 0.5 * c[h]
    else:
        f[h] = c[h]
    out = np.fft.ifft(f, axis=0) * M
    out = 0.5 * (out + np.conj(np.swapaxes(out, 1, 2)))
    if np.min(np.linalg.eigvalsh(out)) <= 0:
        return Phi
    return out


def _residual(A, Phi):
    R = np.conj(np.swapaxes(A, 1, 2)) @ A - Phi
    return float(np.max(np.linalg.norm(R, axis=(1, 2))))


def outer_spectral_factorize(
    phi_samples,
    max_degree: int | None = None,
    tol: float = 1e-8,
    max_iter: int = 50,
    fine_grid: int = 1024,
) -> MatrixPolynomial:
    """Outer ``A`` with ``A*(t) A(t) = Phi(t)`` on the grid.

    Parameters
    ----------
    phi_samples : array_like
        ``(N, m, m)`` Hermitian positive definite samples at the ``N``-th
        roots of unity (``N >= 16``); a 1-D array is a scalar density.
    max_degree : int, optional
        Degree of the returned polynomial; defaults to ``N // 2 - 1``.
    tol : float
        Target for ``max_t ||A*A - Phi||_F``, relative to ``max(1, max ||Phi||_F)``.
    max_iter : int
        Newton iteration cap.
    fine_grid : int
        The iteration runs on the trigonometric interpolant of the samples
        on this many points, which suppresses aliasing when ``det A`` has
        zeros close to the circle.  The residual is reported on the input
        grid.

    Returns
    -------
    MatrixPolynomial
        ``A``, with ``info`` attribute ``{"iterations", "residual"}``.

    Raises
    ------
    ValueError
        A sample is not Hermitian positive definite.
    SpectralFactorizationError
        No convergence within ``max_iter`` (or after truncation to
        ``max_degree``).

    Notes
    -----
    Newton step: with ``G = A^{-*} Phi A^{-1} - I`` and ``[.]_+`` the
    causal part (zero lag halved), ``A <- (I + [G]_+) A``.  The iteration
    starts from the Cholesky factor of the mean of ``Phi`` and converges
    quadratically.

    Examples
    --------
    >>> t = np.exp(2j * np.pi * np.arange(32) / 32)
    >>> A = outer_spectral_factorize(1.25 + t.real, max_degree=1)
    >>> np.round(np.abs(A.coeffs[:, 0, 0]), 8)
    array([1. , 0.5])
    """
    Phi = np.asarray(phi_samples, dtype=complex)
    if Phi.ndim == 1:
        Phi = Phi[:, None, None]
    N, m, m2 = Phi.shape
    if m != m2:
        raise ValueError("samples must be square")
    if N < 16:
        raise ValueError("need at least 16 grid samples")
    scale = max(1.0, float(np.max(np.linalg.norm(Phi, axis=(1, 2)))))
    herm = np.max(np.abs(Phi - np.conj(np.swapaxes(Phi, 1, 2))))
    if herm > 1e-10 * scale:
        raise ValueError("samples must be Hermitian")
    Phi = 0.5 * (Phi + np.conj(np.swapaxes(Phi, 1, 2)))
    if np.min(np.linalg.eigvalsh(Phi)) <= 0:
        raise ValueError("samples must be positive definite")
    if max_degree is None:
        max_degree = (N + 1) // 2 - 1
    if max_degree < 0:
        raise ValueError("max_degree must be nonnegative")

    Pf = _upsample(Phi, max(fine_grid, N))
    L = np.linalg.cholesky(Pf.mean(axis=0))
    A = np.broadcast_to(np.conj(L.T), Pf.shape).copy()
    I = np.eye(m)
    res = _residual(A, Pf)
    it = 0
    while res > 1e-3 * tol * scale and it < max_iter:
        Ainv = np.linalg.inv(A)
        G = np.conj(np.swapaxes(Ainv, 1, 2)) @ Pf @ Ainv - I
        A_new = (I + _to_samples(_causal(G))) @ A
        res_new = _residual(A_new, Pf)
        it += 1
        if not np.isfinite(res_new):
            break
        stalled = res_new > 0.5 * res
        A, res = A_new, res_new
        if res <= tol * scale and stalled:
            break
    coeffs = _causal(A, half_zero=False)[: max_degree + 1]
    P = MatrixPolynomial(coeffs).trim(1e-15 * float(np.abs(coeffs).max()))
    final = _residual(P.boundary(N), Phi)
    P.info = {"iterations": it, "residual": final, "grid": N}
    if final > tol * scale:
        raise SpectralFactorizationError(
            f"spectral factorization residual {final:.3e} after {it} iterations", final, it
        )
    return P


def winding_number(A: MatrixPolynomial, N: int = 256) -> int:
    """Winding number of ``t -> det A(t)`` around ``0``.

    The grid is refined until consecutive phase increments are small.

    Raises
    ------
    ValueError
        ``|det A(t)| < 1e-12`` somewhere on the grid.
    """
    n, m = A.shape
    if n != m:
        raise ValueError("winding number needs square values")
    N = max(int(N), 16, 8 * (m * A.degree + 1))
    while True:
        d = np.linalg.det(A.boundary(N))
        if np.min(np.abs(d)) < 1e-12:
            raise ValueError("det A vanishes (within 1e-12) on the boundary grid")
        steps = np.angle(np.roll(d, -1) / d)
        if np.max(np.abs(steps)) < 0.5 or N >= 1 << 16:
            return int(round(np.sum(steps) / (2 * np.pi)))
        N *= 2


def outerness_check(A: MatrixPolynomial, N: int = 256) -> bool:
    """``True`` iff ``det A`` has no zeros in the open disc.

    For a polynomial with nonvanishing boundary determinant this is the
    vanishing of :func:`winding_number`.

    Examples
    --------
    >>> outerness_check(MatrixPolynomial([1.0, 0.5]))
    True
    >>> outerness_check(MatrixPolynomial([0.0, 1.0]))
    False
    """
    return winding_number(A, N) == 0


# ---------------------------------------------------------------------------
# Norm families on the circle


class BoundaryNormFamily:
    """Norms ``delta_t`` indexed by a grid of ``N`` points on the circle.

    Between grid points the nearest grid handle is used.  An optional
    ``interior`` callable ``z -> NormHandle`` supplies the family inside
    the disc (constant families supply it automatically).

    Parameters
    ----------
    handles : sequence of NormHandle
        One handle per grid point ``exp(2 pi i k / N)``, ``N >= 16``.
    interior : callable, optional
        Interior rule.
    check : bool
        Spot-check homogeneity and subadditivity of the distinct handles.
    """

    def __init__(self, handles: Sequence[NormHandle], interior: Callable | None = None, check: bool = True):
        handles = list(handles)
        if len(handles) < 16:
            raise ValueError("a boundary family needs at least 16 grid points")
        shape = handles[0].shape
        if any(h.shape != shape for h in handles):
            raise ValueError("all handles must act on the same shape")
        self.handles = handles
        self.shape = tuple(shape)
        self._interior = interior
        if check:
            distinct = list({id(h): h for h in handles}.values())
            picks = distinct if len(distinct) <= 2 else [distinct[0], distinct[len(distinct) // 2]]
            for i, h in enumerate(picks):
                rep = check_norm_axioms(h, trials=5, seed=i, tol=1e-6)
                if not rep["ok"]:
                    raise ValueError(f"handle {h.describe()} failed the norm spot-check: {rep}")

    @classmethod
    def constant(cls, h: NormHandle, N: int = 128) -> "BoundaryNormFamily":
        return cls([h] * N)

    @classmethod
    def two_arc(cls, X0: SpaceDescriptor, X1: SpaceDescriptor, N: int = 128) -> "BoundaryNormFamily":
        """``X0`` on the lower half circle, ``X1`` on the upper (``Im t > 0``).

        The interior rule is the closed-form interpolated space at the
        harmonic measure of the upper arc.
        """
        if closed_form_interpolant(InterpolationPair(X0, X1, 0.5)) is None:
            raise ValueError("two-arc families need a closed-form interpolation pair")
        h0, h1 = SpaceNorm(X0), SpaceNorm(X1)
        t = circle_grid(N, 0.0)
        handles = [h1 if tk.imag > 1e-12 else h0 for tk in t]

        def interior(z):
            th = harmonic_measure_upper(z)
            return SpaceNorm(closed_form_interpolant(InterpolationPair(X0, X1, th)))

        return cls(handles, interior=interior)

    @property
    def N(self) -> int:
        return len(self.handles)

    @property
    def points(self) -> np.ndarray:
        return circle_grid(self.N, 0.0)

    @property
    def is_constant(self) -> bool:
        return all(h is self.handles[0] for h in self.handles)

    @property
    def has_interior(self) -> bool:
        return self._interior is not None or self.is_constant

    def nearest(self, t) -> NormHandle:
        k = int(round(np.angle(complex(t)) / (2 * np.pi) * self.N)) % self.N
        return self.handles[k]

    def at(self, z) -> NormHandle:
        """Handle at ``z``: nearest grid point on the circle, interior rule inside."""
        z = complex(z)
        if abs(z) >= 1.0 - 1e-12:
            return self.nearest(z)
        if self._interior is not None:
            return self._interior(z)
        if self.is_constant:
            return self.handles[0]
        raise ValueError("no interior rule for this family")


# ---------------------------------------------------------------------------
# The factorization norm gamma(T) = inf alpha(A) beta(B), T = B^T A


def _plain_hilbert_scale(G: SpaceDescriptor):
    """``c`` with ``||.||_G = c ||.||_2`` or ``None``."""
    if not (G.is_lattice and G.is_hilbert):
        return None
    w = G.weight_array
    if np.allclose(w, w[0], rtol=1e-14, atol=0):
        return float(np.sqrt(w[0]))
    return None


def _hilbert_valued(h: NormHandle):
    """``(E, c)`` when ``h = c ||.: E -> l_2||``, else ``None``."""
    if isinstance(h, OperatorNorm):
        c = _plain_hilbert_scale(h.G)
        if c is not None:
            return h.E, c
    if isinstance(h, MatrixSchattenNorm) and math.isinf(h.p) and h.left is None and h.right is None:
        from .spaces import lp

        return lp(h.shape[1], 2), 1.0
    return None


def _schatten_pair(alpha: NormHandle, beta: NormHandle):
    if not (isinstance(alpha, MatrixSchattenNorm) and isinstance(beta, MatrixSchattenNorm)):
        return None
    if any(v is not None for v in (alpha.left, alpha.right, beta.left, beta.right)):
        return None
    inv_r = 1.0 / alpha.p + 1.0 / beta.p
    if inv_r > 1.0 + 1e-15:
        return None
    return alpha.p, beta.p, (math.inf if inv_r == 0 else 1.0 / inv_r)


def _schatten_factors(T, m, p, q, r):
    """Hölder-optimal ``(A, B)``: singular values ``s**(r/p)`` and ``s**(r/q)``."""
    n = T.shape[0]
    U, s, Vh = np.linalg.svd(T)
    k = s.size
    on = s > 0
    if math.isinf(r):
        a, b = on.astype(float), s
    else:
        ex = lambda e: np.where(on, s ** e, 0.0)
        a, b = ex(r / p if math.isfinite(p) else 0.0), ex(r / q if math.isfinite(q) else 0.0)
    A = np.zeros((m, m), dtype=complex)
    A[:k] = a[:, None] * Vh[:k]
    Bt = np.zeros((n, m), dtype=complex)
    Bt[:, :k] = U[:, :k] * b[None, :]
    return A, Bt.T


def _schatten_value(T, r):
    s = np.linalg.svd(T, compute_uv=False)
    if math.isinf(r):
        return float(s.max(initial=0.0))
    return float(np.sum(s ** r) ** (1.0 / r))


def _pad_rows(M, rows):
    out = np.zeros((rows, M.shape[1]), dtype=complex)
    out[: M.shape[0]] = M
    return out


def _altmin(alpha, beta, T, A0_list, maxiter=300):
    """Minimise ``log alpha(A) + log beta((T A^{-1})^T)`` over invertible ``A``."""
    m = alpha.shape[0]

    def unpack(v):
        return (v[: m * m] + 1j * v[m * m :]).reshape(m, m)

    def f(v):
        A = unpack(v)
        try:
            Ainv = np.linalg.inv(A)
        except np.linalg.LinAlgError:
            return 1e300, np.zeros_like(v)
        B = (T @ Ainv).T
        va, Ga, _ = alpha.value_grad(A[None])
        vb, Gb, _ = beta.value_grad(B[None])
        va, vb = float(va[0]), float(vb[0])
        if not (va > 0 and vb > 0) or not np.isfinite(va * vb):
            return 1e300, np.zeros_like(v)
        g = Ga[0] / va - (B @ Gb[0].T @ Ainv.T) / vb
        return math.log(va) + math.log(vb), np.concatenate([g.real.ravel(), -g.imag.ravel()])

    best = None
    for A0 in A0_list:
        v0 = np.concatenate([A0.real.ravel(), A0.imag.ravel()])
        res = minimize(f, v0, jac=True, method="L-BFGS-B", options={"maxiter": maxiter, "gtol": 1e-10, "ftol": 1e-14})
        A = unpack(res.x)
        try:
            B = (T @ np.linalg.inv(A)).T
        except np.linalg.LinAlgError:
            continue
        val = alpha(A) * beta(B)
        if best is None or val < best[0]:
            best = (val, A, B)
    return best


def _balance(alpha, beta, A, B):
    a, b = alpha(A), beta(B)
    if a > 0 and b > 0:
        c = math.sqrt(b / a)
        A, B = A * c, B / c
    return A, B


def gamma_family_norm(alpha: NormHandle, beta: NormHandle, T, warm=None, seed=0) -> NormEstimate:
    """``gamma(T) = inf {alpha(A) beta(B) : T = B^T A}``.

    Parameters
    ----------
    alpha : NormHandle
        Norm on ``m x m`` matrices.
    beta : NormHandle
        Norm on ``m x n`` matrices.
    T : array_like
        ``n x m`` matrix.
    warm : ndarray, optional
        Starting ``A`` for the local search.

    Returns
    -------
    NormEstimate
        ``upper_witness`` is ``(A, B)`` balanced so that
        ``alpha(A) = beta(B)``.  Exact for unweighted Schatten pairs (Hölder)
        and certified for operator norms into a Hilbert space, where
        ``gamma`` is the Hilbert-space factorization norm; otherwise the
        upper bound comes from local minimisation and no lower bound is
        certified (``lower = 0``, status ``"heuristic"``).

    Examples
    --------
    >>> from banach_interp.handles import MatrixSchattenNorm
    >>> op = MatrixSchattenNorm((2, 2), "inf")
    >>> round(gamma_family_norm(op, op, np.eye(2)).upper, 12)
    1.0
    """
    T = np.asarray(T, dtype=complex)
    if alpha.shape[0] != alpha.shape[1]:
        raise ValueError("alpha must act on square matrices")
    m = alpha.shape[0]
    n = T.shape[0]
    if T.shape != (n, m) or beta.shape != (m, n):
        raise ValueError(f"shape mismatch: T {T.shape}, alpha {alpha.shape}, beta {beta.shape}")
    if not np.any(T):
        Z = np.zeros((m, m), dtype=complex), np.zeros((m, n), dtype=complex)
        return NormEstimate(0.0, 0.0, None, Z, status="exact", info={"method": "zero"})

    sp = _schatten_pair(alpha, beta)
    if sp is not None:
        p, q, r = sp
        A, B = _schatten_factors(T, m, p, q, r)
        val = _schatten_value(T, r)
        A, B = _balance(alpha, beta, A, B)
        return NormEstimate(val, val, {"schatten_exponent": r}, (A, B), status="exact", info={"method": "holder"})

    ha, hb = _hilbert_valued(alpha), _hilbert_valued(beta)
    if ha is not None and hb is not None:
        from .factorization import gamma2_norm

        (E, ca), (F, cb) = ha, hb
        est = gamma2_norm(T, E, F, seed=seed)
        fac = est.upper_witness
        A = _pad_rows(np.asarray(fac.A), m)
        B = _pad_rows(np.asarray(fac.B), m)
        up = alpha(A) * beta(B)
        A, B = _balance(alpha, beta, A, B)
        return NormEstimate(
            ca * cb * est.lower,
            max(up, ca * cb * est.lower),
            est.lower_witness,
            (A, B),
            status="certified" if est.status != "heuristic" else "heuristic",
            info={"method": "hilbert_factorization", **est.info},
        )

    starts = []
    if warm is not None:
        starts.append(np.asarray(warm, dtype=complex))
    U, s, Vh = np.linalg.svd(T)
    d = np.zeros(m)
    d[: s.size] = np.sqrt(s)
    floor = max(d.max(), 1.0) * 1e-3
    d = np.where(d > floor, d, floor)
    starts.append(d[:, None] * Vh)
    starts.append(np.eye(m, dtype=complex) * math.sqrt(max(s.max(), 1e-300)))
    best = _altmin(alpha, beta, T, starts)
    if best is None:
        raise ValueError("alternating minimisation failed to find an invertible factor")
    val, A, B = best
    A, B = _balance(alpha, beta, A, B)
    return NormEstimate(0.0, val, None, (A, B), status="heuristic", info={"method": "local_minimisation"})


# ---------------------------------------------------------------------------
# Analytic factorization


@dataclass
class FactorizationResult:
    """Analytic factorization ``F(z) = B(z)^T A(z)`` on the disc.

    Attributes
    ----------
    A : MatrixPolynomial
        Outer ``m x m`` factor.
    B_boundary : ndarray
        ``(N, m, n)`` samples of ``B`` on the grid.
    bound_certificate : float
        ``(1 + epsilon)`` times the geometric mean of the boundary ``gamma``
        values, i.e. the bound at ``z = 0``.
    gamma_samples : ndarray
        Boundary values ``gamma_t(F(t))`` used in the bound.
    residual : float
        ``max_t ||B(t)^T A(t) - F(t)||_F``.
    checks : list of dict
        Interior checks ``{"z", "lhs", "certificate", "margin", "ok"}``.
    """

    A: MatrixPolynomial
    B_boundary: np.ndarray
    bound_certificate: float
    gamma_samples: np.ndarray
    epsilon: float
    s: float
    residual: float
    F: MatrixPolynomial
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.B_boundary.shape[0]

    def certificate(self, z) -> float:
        """``(1 + epsilon) exp(Poisson average of log gamma_t at z)``."""
        return (1.0 + self.epsilon) * poisson_integral_log(self.gamma_samples, z, offset=0.0)

    def B(self, z) -> np.ndarray:
        """``B(z) = (A(z)^T)^{-1} F(z)^T``; Cauchy reconstruction when ``A(z)`` is ill-conditioned."""
        z = complex(z)
        Az = self.A.evaluate(z)
        if np.linalg.cond(Az) <= 1e8:
            return np.linalg.solve(Az.T, self.F.evaluate(z).T)
        t = circle_grid(self.N, 0.0)
        w = t / (t - z) * (1.0 - z ** self.N) / self.N
        return np.tensordot(w, self.B_boundary, axes=(0, 0))

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.checks)

    def to_json(self) -> dict:
        return {
            "A": self.A.to_json(),
            "B_boundary": to_jsonable(self.B_boundary),
            "bound_certificate": self.bound_certificate,
            "gamma_samples": to_jsonable(self.gamma_samples),
            "epsilon": self.epsilon,
            "s": self.s,
            "residual": self.residual,
            "checks": to_jsonable(self.checks),
            "info": to_jsonable(self.info),
        }


def _default_interior_points(k=10):
    r = np.linspace(0.0, 0.85, k)
    ang = 2.399963229728653 * np.arange(k)
    return list(r * np.exp(1j * ang))


def theorem23_factorize(
    F: MatrixPolynomial,
    alpha_family: BoundaryNormFamily,
    beta_family: BoundaryNormFamily,
    epsilon: float,
    interior_points=None,
    tol: float = 1e-6,
) -> FactorizationResult:
    """Factor ``F(z) = B(z)^T A(z)`` with ``A`` outer and a Poisson bound.

    Parameters
    ----------
    F : MatrixPolynomial
        ``n x m`` analytic matrix function, not identically zero on the grid.
    alpha_family, beta_family : BoundaryNormFamily
        2-convex families on ``m x m`` and ``m x n`` matrices over the same grid.
    epsilon : float
        Slack, ``> 0``.
    interior_points : sequence of complex, optional
        Where ``alpha_z(A(z)) beta_z(B(z)) <= (1 + epsilon) exp P[log gamma](z)``
        is checked (within ``tol``).  Defaults to 10 points in ``|z| <= 0.85``.
        Checks run only when both families can be evaluated inside.

    Returns
    -------
    FactorizationResult

    Raises
    ------
    ValueError
        Bad shapes, ``epsilon <= 0``, ``F`` vanishing on the grid, or a
        reconstruction residual above ``1e-7``.
    SpectralFactorizationError
        The spectral factorization did not converge.

    Notes
    -----
    Steps: at each grid point ``t`` a factorization ``F(t) = W^T V`` with
    ``alpha_t(V) = 1`` and ``beta_t(W) = gamma_t(F(t))`` (up to the
    accuracy of :func:`gamma_family_norm`); ``A`` is the outer spectral
    factor of ``V* V + (epsilon^2 / 4 s^2) I`` with ``s = max_t alpha_t(I)``;
    ``B = (A^T)^{-1} F^T``.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    N = alpha_family.N
    if beta_family.N != N:
        raise ValueError("families must share the boundary grid")
    n, m = F.shape
    if alpha_family.shape != (m, m) or beta_family.shape != (m, n):
        raise ValueError("family shapes do not match F")
    t = circle_grid(N, 0.0)
    Ft = F.evaluate(t)

    gammas = np.empty(N)
    Vs = np.empty((N, m, m), dtype=complex)
    statuses = set()
    warm = None
    for k in range(N):
        a, b = alpha_family.handles[k], beta_family.handles[k]
        est = gamma_family_norm(a, b, Ft[k], warm=warm)
        if est.upper <= 0:
            raise ValueError("F vanishes on the boundary grid")
        A_k, _ = est.upper_witness
        A_k = A_k / a(A_k)
        Vs[k] = A_k
        gammas[k] = est.upper
        warm = A_k
        statuses.add(est.status)

    s = max(a(np.eye(m)) for a in {id(h): h for h in alpha_family.handles}.values())
    Phi = np.conj(np.swapaxes(Vs, 1, 2)) @ Vs + (epsilon ** 2 / (4 * s ** 2)) * np.eye(m)
    Phi = 0.5 * (Phi + np.conj(np.swapaxes(Phi, 1, 2)))
    A = outer_spectral_factorize(Phi, tol=1e-8)
    At = A.boundary(N)
    Bt = np.linalg.solve(np.swapaxes(At, 1, 2), np.swapaxes(Ft, 1, 2))
    residual = float(np.max(np.linalg.norm(np.swapaxes(Bt, 1, 2) @ At - Ft, axis=(1, 2))))
    if residual > 1e-7:
        raise ValueError(f"reconstruction residual {residual:.3e} exceeds 1e-7")

    result = FactorizationResult(
        A=A,
        B_boundary=Bt,
        bound_certificate=(1.0 + epsilon) * float(np.exp(np.mean(np.log(gammas)))),
        gamma_samples=gammas,
        epsilon=float(epsilon),
        s=float(s),
        residual=residual,
        F=F,
        info={
            "grid": N,
            "spectral_iterations": A.info["iterations"],
            "spectral_residual": A.info["residual"],
            "outer": outerness_check(A),
            "gamma_status": sorted(statuses),
            "alpha_boundary_max": float(max(alpha_family.handles[k](At[k]) for k in range(N))),
        },
    )
    if alpha_family.has_interior and beta_family.has_interior:
        pts = _default_interior_points() if interior_points is None else list(interior_points)
        for z in pts:
            z = complex(z)
            lhs = alpha_family.at(z)(A.evaluate(z)) * beta_family.at(z)(result.B(z))
            cert = result.certificate(z)
            result.checks.append(
                {"z": z, "lhs": float(lhs), "certificate": cert, "margin": cert - lhs, "ok": bool(lhs <= cert + tol)}
            )
    return result


# ---------------------------------------------------------------------------
# Property testers


def two_convexity_margin(delta: NormHandle, A, B, S) -> float:
    """``delta(A)^2 + delta(B)^2 - delta(C)^2`` for ``C = S (A*A + B*B)^{1/2}``."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    M = np.conj(A.T) @ A + np.conj(B.T) @ B
    w, Q = np.linalg.eigh(0.5 * (M + np.conj(M.T)))
    R = (Q * np.sqrt(np.clip(w, 0.0, None))) @ np.conj(Q.T)
    C = np.asarray(S, dtype=complex) @ R
    return delta(A) ** 2 + delta(B) ** 2 - delta(C) ** 2


def _random_contraction(rng, n, m):
    S = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    U, _, Vh = np.linalg.svd(S, full_matrices=False)
    if rng.random() < 0.5:
        return U @ Vh
    return S / np.linalg.norm(S, 2) * rng.uniform(0.5, 1.0)


def two_convexity_check(delta: NormHandle, trials: int = 1000, seed=0, tol: float = 1e-9) -> dict:
    """Randomized test of ``C*C <= A*A + B*B  =>  delta(C)^2 <= delta(A)^2 + delta(B)^2``.

    Half of the contractions are partial isometries (the tight case).

    Returns
    -------
    dict
        ``trials``, ``violations`` (list of ``{"trial", "excess"}``),
        ``max_excess`` (largest ``delta(C)^2 - delta(A)^2 - delta(B)^2``)
        and ``ok``.
    """
    rng = np.random.default_rng(seed)
    n, m = delta.shape
    viol = []
    worst = -math.inf
    for k in range(trials):
        scale = np.exp(rng.uniform(-2, 2, size=2))
        A = scale[0] * (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m)))
        B = scale[1] * (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m)))
        S = _random_contraction(rng, n, m)
        excess = -two_convexity_margin(delta, A, B, S)
        worst = max(worst, excess)
        if excess > tol:
            viol.append({"trial": k, "excess": float(excess)})
    return {"trials": trials, "violations": viol, "max_excess": float(worst), "ok": not viol}


def subharmonicity_check(
    family: BoundaryNormFamily,
    F: MatrixPolynomial,
    circles=None,
    tol: float = 1e-3,
    probes: int = 100,
    n_circle: int = 64,
    seed=0,
) -> dict:
    """Discrete sub-mean-value test of ``z -> log delta_z(F(z))``.

    Parameters
    ----------
    family : BoundaryNormFamily
        Must have an interior rule.
    F : MatrixPolynomial
        Values are reshaped to ``family.shape``.
    circles : sequence of (complex, float), optional
        Centres and radii; by default ``probes`` random circles inside
        ``|z| <= 0.95``.
    tol : float
        Allowed excess of ``log delta_z(F(z))`` over the circle mean.
    """
    if not family.has_interior:
        raise ValueError("the family needs an interior rule")
    rng = np.random.default_rng(seed)
    if circles is None:
        circles = []
        for _ in range(probes):
            c = 0.7 * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
            r = rng.uniform(0.05, 0.95 - abs(c))
            circles.append((complex(c), float(r)))
    phis = np.exp(2j * np.pi * (np.arange(n_circle) + 0.5) / n_circle)

    def logval(z):
        v = family.at(z)(F.evaluate(z).reshape(family.shape))
        return math.log(v) if v > 0 else -math.inf

    viol = []
    worst = -math.inf
    for c, r in circles:
        lhs = logval(c)
        mean = float(np.mean([logval(c + r * ph) for ph in phis]))
        excess = lhs - mean
        if np.isfinite(excess):
            worst = max(worst, excess)
        if excess > tol:
            viol.append({"z": complex(c), "r": r, "lhs": lhs, "mean": mean, "excess": excess})
    return {"probes": len(circles), "violations": viol, "max_excess": worst, "ok": not viol}
