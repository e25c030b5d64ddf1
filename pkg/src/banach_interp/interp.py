"""Complex interpolation of pairs of norms.

The interpolation domain is the unit disc.  Endpoint 0 lives on the lower
half of the circle and endpoint 1 on the upper half; the space ``X_theta`` is
read off at the point ``z_theta`` on the imaginary axis where the upper arc
has harmonic measure ``theta``.  Upper bounds come from explicit analytic
competitors (:class:`AnalyticCertificate`), lower bounds from duality: for
any ``xi``, ``|<xi, x>| <= ||xi||_{[X0*, X1*]_theta} ||x||_{[X0, X1]_theta}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from ._solver import AnalyticCertificate, circle_grid, harmonic_h, solve_two_arc, z_theta
from .estimates import NormEstimate, to_jsonable
from .handles import NormHandle, OperatorNorm, as_handle
from .spaces import Family, SpaceDescriptor, dual_space, lp, norm, schatten, weighted_l2

__all__ = [
    "InterpolationPair",
    "DualWitness",
    "AnalyticCertificate",
    "poisson_kernel",
    "poisson_integral_log",
    "harmonic_measure_upper",
    "z_theta",
    "closed_form_interpolant",
    "interpolated_exponent",
    "interp_norm_upper",
    "interp_norm_lower",
    "interp_norm",
    "interp_matrix_norm",
]

Endpoint = Union[SpaceDescriptor, NormHandle]


def poisson_kernel(z, t) -> float:
    """``(1 - |z|^2) / |t - z|^2`` for ``|z| < 1`` and ``|t| = 1``.

    Examples
    --------
    >>> poisson_kernel(0.5, 1.0)
    3.0
    """
    z = complex(z)
    t = complex(t)
    if abs(z) >= 1.0:
        raise ValueError("z must lie in the open unit disc")
    if abs(abs(t) - 1.0) > 1e-12:
        raise ValueError("t must be unimodular")
    return (1.0 - abs(z) ** 2) / abs(t - z) ** 2


def poisson_integral_log(samples, z, offset: float = 0.0) -> float:
    """``exp`` of the Poisson average of ``log(samples)`` at ``z``.

    Parameters
    ----------
    samples : array_like
        Positive values at ``exp(2 pi i (k + offset) / N)``, ``N >= 16``.
    z : complex
        Interior point.
    offset : float
        Grid offset in units of the spacing.

    Notes
    -----
    The quadrature weights ``P^z(t_k)`` are renormalised to sum to one, so
    constant samples are reproduced exactly for every ``z``.
    """
    s = np.asarray(samples, dtype=float).ravel()
    if s.size < 16:
        raise ValueError("need at least 16 grid samples")
    if np.any(~(s > 0)):
        raise ValueError("samples must be positive")
    z = complex(z)
    if abs(z) >= 1.0:
        raise ValueError("z must lie in the open unit disc")
    t = circle_grid(s.size, offset)
    w = (1.0 - abs(z) ** 2) / np.abs(t - z) ** 2
    w /= w.sum()
    return float(np.exp(np.dot(w, np.log(s))))


def harmonic_measure_upper(z) -> float:
    """Harmonic measure of the upper half circle seen from ``z``."""
    return float(np.real(harmonic_h(z)))


def interpolated_exponent(p0: float, p1: float, theta: float) -> float:
    """``p_theta`` with ``1/p_theta = (1 - theta)/p0 + theta/p1``."""
    inv = (1.0 - theta) / p0 + theta / p1
    if inv == 0.0:
        return math.inf
    # snap values that are integers up to rounding (e.g. 4.000000000000001)
    p = 1.0 / inv
    r = round(p)
    return float(r) if abs(p - r) < 1e-12 * max(1.0, p) else p


@dataclass(frozen=True)
class InterpolationPair:
    """Two norms on the same coordinate space and a parameter ``theta``."""

    X0: Endpoint
    X1: Endpoint
    theta: float

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")
        h0, h1 = as_handle(self.X0), as_handle(self.X1)
        if tuple(h0.shape) != tuple(h1.shape):
            raise ValueError("endpoints live on different coordinate spaces")

    @property
    def handles(self):
        return as_handle(self.X0), as_handle(self.X1)

    @property
    def shape(self):
        return tuple(as_handle(self.X0).shape)

    def dual(self) -> "InterpolationPair":
        d0, d1 = (h.dual() for h in self.handles)
        if d0 is None or d1 is None:
            raise ValueError("endpoint norms without a computable dual")
        return InterpolationPair(d0, d1, self.theta)


@dataclass
class DualWitness:
    """Functional ``xi`` and a certificate bounding its dual interpolation norm.

    ``bound = |<xi, x>| / dual_upper`` is a lower bound for the interpolation
    norm of ``x``.
    """

    functional: np.ndarray
    pairing: complex
    dual_upper: float
    bound: float
    certificate: object = None

    def to_json(self) -> dict:
        return {
            "functional": to_jsonable(self.functional),
            "pairing": to_jsonable(self.pairing),
            "dual_upper": self.dual_upper,
            "bound": self.bound,
            "certificate": to_jsonable(self.certificate),
        }


def closed_form_interpolant(pair: InterpolationPair):
    """Closed-form ``[X0, X1]_theta`` for same-family descriptor pairs.

    Returns ``None`` for mixed families or handle endpoints.

    Examples
    --------
    >>> closed_form_interpolant(InterpolationPair(lp(2, 2), lp(2, math.inf), 0.5)).p
    4.0
    """
    X0, X1, th = pair.X0, pair.X1, pair.theta
    if not (isinstance(X0, SpaceDescriptor) and isinstance(X1, SpaceDescriptor)):
        return None
    if X0.dim != X1.dim:
        raise ValueError("dimension mismatch")
    if X0 == X1:
        return X0
    if X0.family is not X1.family:
        if {X0.family, X1.family} <= {Family.LP, Family.WEIGHTED_L2} and X0.is_hilbert and X1.is_hilbert:
            w = X0.weight_array ** (1 - th) * X1.weight_array ** th
            return weighted_l2(w)
        return None
    if X0.family is Family.WEIGHTED_L2:
        return weighted_l2(X0.weight_array ** (1 - th) * X1.weight_array ** th)
    p = interpolated_exponent(X0.p, X1.p, th)
    if X0.family is Family.LP:
        return lp(X0.dim, p)
    return schatten(X0.dim, p)


def interp_norm_upper(
    pair: InterpolationPair,
    x,
    degree: int = 4,
    grid: int = 64,
    verification_grid: int = 2048,
    warm: AnalyticCertificate | None = None,
    **solver_options,
) -> NormEstimate:
    """Certified upper bound for ``||x||_{[X0, X1]_theta}``.

    Parameters
    ----------
    pair : InterpolationPair
    x : array_like
        Nonzero element of the common coordinate space.
    degree, grid : int
        Polynomial degree and optimisation grid of the certificate.
    verification_grid : int
        Grid on which the bound is certified (plus a Lipschitz slack).
    warm : AnalyticCertificate, optional
        Earlier certificate for the same ``x``; the result is never worse.

    Returns
    -------
    NormEstimate
        ``upper`` is the certified bound and ``upper_witness`` the
        certificate; ``lower`` is 0.  The dual candidate found by the solver is
        stored in ``info["dual_candidate"]``.
    """
    h0, h1 = pair.handles
    cert, eta = solve_two_arc(
        h0, h1, x, pair.theta, degree=degree, grid=grid, verification_grid=verification_grid, warm=warm, **solver_options
    )
    status = "certified" if cert.exact_norms else "heuristic"
    if not cert.converged:
        status += "-capped"
    return NormEstimate(
        lower=0.0,
        upper=cert.attained_bound,
        upper_witness=cert,
        status=status,
        theta=pair.theta,
        degree=degree,
        grid=grid,
        info={"dual_candidate": eta, "iterations": cert.iterations},
    )


def _dual_upper(pair: InterpolationPair, xi, degree, grid, verification_grid):
    dual_pair = pair.dual()
    est = interp_norm_upper(dual_pair, xi, degree, grid, verification_grid)
    return est.upper, est.upper_witness


def _candidates(pair, x, primal_eta, dual_candidates, seed):
    cands = []
    if primal_eta is not None:
        eta = np.array(primal_eta, dtype=complex)
        if all(isinstance(X, SpaceDescriptor) and X.is_lattice for X in (pair.X0, pair.X1)):
            # interpolated lattice norms are monotone, so zeroing the functional
            # off the support of x keeps the pairing and cannot raise the dual norm
            eta[np.asarray(x) == 0] = 0.0
        cands.append(eta)
    for h in pair.handles:
        _, g, _ = h.value_grad(np.asarray(x, dtype=complex)[None], 0.0, None)
        cands.append(g[0])
    rng = np.random.default_rng(seed)
    base = cands[0]
    scale = np.linalg.norm(base)
    while len(cands) < dual_candidates:
        noise = rng.standard_normal(base.shape) + 1j * rng.standard_normal(base.shape)
        cands.append(base + 0.05 * scale * noise / np.linalg.norm(noise))
    return cands[: max(1, dual_candidates)]


def interp_norm_lower(
    pair: InterpolationPair,
    x,
    dual_candidates: int = 1,
    degree: int = 4,
    grid: int = 64,
    verification_grid: int = 2048,
    seed=0,
    primal: NormEstimate | None = None,
) -> NormEstimate:
    """Duality lower bound for ``||x||_{[X0, X1]_theta}``.

    For each candidate functional ``xi`` the dual pair is solved for a
    certified upper bound ``U(xi)`` and ``|<xi, x>| / U(xi)`` is a valid
    lower bound.  The first candidate is the multiplier of the constraint
    ``F(z_theta) = x`` from the primal solve, then the endpoint norming
    functionals, then seeded perturbations.
    """
    x = np.asarray(x, dtype=complex)
    if primal is None:
        primal = interp_norm_upper(pair, x, degree, grid, verification_grid)
    eta = primal.info.get("dual_candidate")
    best = None
    for xi in _candidates(pair, x, eta, dual_candidates, seed):
        if not np.any(xi):
            continue
        U, cert = _dual_upper(pair, xi, degree, grid, verification_grid)
        pr = complex(np.sum(xi * x))
        b = abs(pr) / U
        if best is None or b > best.bound:
            best = DualWitness(functional=xi, pairing=pr, dual_upper=U, bound=b, certificate=cert)
    lower = 0.0 if best is None else best.bound
    return NormEstimate(
        lower=lower,
        upper=math.inf,
        lower_witness=best,
        status=primal.status,
        theta=pair.theta,
        degree=degree,
        grid=grid,
    )


def interp_norm(pair: InterpolationPair, x, degree: int = 4, grid: int = 64, dual_candidates: int = 1, **kw) -> NormEstimate:
    """Both bounds for ``||x||_{[X0, X1]_theta}``."""
    up = interp_norm_upper(pair, x, degree, grid, **kw)
    lo = interp_norm_lower(pair, x, dual_candidates, degree, grid, primal=up, **kw)
    return NormEstimate(
        lower=min(lo.lower, up.upper),
        upper=up.upper,
        lower_witness=lo.lower_witness,
        upper_witness=up.upper_witness,
        status=up.status,
        theta=pair.theta,
        degree=degree,
        grid=grid,
    )


def _vector_upper(X0, X1, theta, v, degree, grid, verification_grid):
    if not np.any(v):
        return 0.0
    pair = InterpolationPair(X0, X1, theta)
    closed = closed_form_interpolant(pair)
    if closed is not None:
        return float(norm(closed, np.asarray(v).reshape(closed.shape)))
    return interp_norm_upper(pair, v, degree, grid, verification_grid).upper


def _product_lower(nu0: OperatorNorm, nu1: OperatorNorm, theta, T, eta, degree, grid, verification_grid):
    """Lower bound through rank-one analytic certificates of the dual element.

    The dual of ``||.: E -> F*||`` under the trace pairing is the projective
    norm of ``E (x) F``.  Writing ``eta = sum_k y_k x_k^T`` and interpolating
    each ``x_k`` in ``(E0, E1)`` and each ``y_k`` in ``(F0, F1)`` gives an
    analytic competitor for ``eta`` whose boundary projective norms are at
    most ``sum_k U_E(x_k) U_F(y_k)``.
    """
    from .tensor import projective_norm

    E0, E1 = nu0.E, nu1.E
    F0, F1 = dual_space(nu0.G), dual_space(nu1.G)
    Eth = closed_form_interpolant(InterpolationPair(E0, E1, theta))
    Fth = closed_form_interpolant(InterpolationPair(F0, F1, theta))
    decomps = []
    if Eth is not None and Fth is not None:
        pe = projective_norm(eta, Eth, Fth)
        decomps.append(pe.upper_witness.terms)
    U, s, Vh = np.linalg.svd(eta)
    decomps.append([(s[k] * Vh[k], U[:, k]) for k in range(len(s)) if s[k] > 1e-14 * s[0]])
    best = (0.0, None)
    for terms in decomps:
        cost = 0.0
        for xk, yk in terms:
            cost += _vector_upper(E0, E1, theta, xk, degree, grid, verification_grid) * _vector_upper(
                F0, F1, theta, yk, degree, grid, verification_grid
            )
        if cost > 0:
            b = abs(np.sum(eta * T)) / cost
            if b > best[0]:
                best = (b, DualWitness(functional=eta, pairing=complex(np.sum(eta * T)), dual_upper=cost, bound=b, certificate={"terms": len(terms)}))
    return best


def interp_matrix_norm(
    nu0: NormHandle,
    nu1: NormHandle,
    theta: float,
    T,
    degree: int = 4,
    grid: int = 64,
    bounds: str = "both",
    verification_grid: int = 2048,
    dual_candidates: int = 1,
) -> NormEstimate:
    """Bounds for ``||T||_{[nu0, nu1]_theta}`` for matrix norm handles.

    Lower bounds use the dual handles when both exist, the rank-one
    certificate construction for lattice operator norms, and are 0 otherwise
    (``info["lower_method"]`` says which).
    """
    if bounds not in ("both", "upper", "lower"):
        raise ValueError("bounds must be 'both', 'upper' or 'lower'")
    T = np.asarray(T, dtype=complex)
    pair = InterpolationPair(nu0, nu1, theta)
    up = interp_norm_upper(pair, T, degree, grid, verification_grid)
    upper = up.upper if bounds in ("both", "upper") else math.inf
    lower, lw, method = 0.0, None, "none"
    if bounds in ("both", "lower"):
        eta = up.info["dual_candidate"]
        if nu0.dual() is not None and nu1.dual() is not None:
            lo = interp_norm_lower(pair, T, dual_candidates, degree, grid, verification_grid, primal=up)
            lower, lw, method = lo.lower, lo.lower_witness, "dual-handles"
        elif (
            isinstance(nu0, OperatorNorm)
            and isinstance(nu1, OperatorNorm)
            and all(S.is_lattice for S in (nu0.E, nu0.G, nu1.E, nu1.G))
        ):
            lower, lw = _product_lower(nu0, nu1, theta, T, eta, degree, grid, verification_grid)
            method = "rank-one-certificates"
    return NormEstimate(
        lower=lower,
        upper=upper,
        lower_witness=lw,
        upper_witness=up.upper_witness,
        status=up.status,
        theta=theta,
        degree=degree,
        grid=grid,
        info={"lower_method": method},
    )
