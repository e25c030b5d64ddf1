"""Minimax solver for two-arc interpolation certificates.

We look for an analytic ``F`` on the unit disc with ``F(z_theta) = x`` and
small ``max_t N_t(F(t))``, where ``N_t`` is the endpoint-0 norm on the lower
half of the circle and the endpoint-1 norm on the upper half.  The competitor
class is

    F(z) = exp(rho * (H(z) - H(z_theta))) * P(z),
    P(z) = x + sum_{l=1}^{d} c_l (z^l - z_theta^l),

with ``rho = gens.T @ r`` acting coordinatewise and ``Re H`` the harmonic
measure of the upper arc.  On the boundary ``|exp(rho (H - H(z_theta)))|`` is
``exp(rho (omega - theta))``; its phase is an isometry of both endpoint norms
by the choice of ``gens``, so boundary norms only see the modulus.

The max over the optimisation grid is smoothed by log-sum-exp and minimised by
L-BFGS under a continuation in the smoothing parameter.  The best certificate
is then certified on a finer verification grid with a Lipschitz slack that
covers the whole circle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

__all__ = ["z_theta", "harmonic_h", "circle_grid", "AnalyticCertificate", "solve_two_arc"]


def z_theta(theta: float) -> complex:
    """Point on the imaginary axis where the upper arc has harmonic measure ``theta``."""
    return 1j * math.tan(math.pi * (theta - 0.5) / 2.0)


def harmonic_h(z):
    """Analytic ``H`` with ``Re H`` the harmonic measure of the upper half circle."""
    z = np.asarray(z, dtype=complex)
    return 0.5 - (1j / np.pi) * np.log((1.0 + z) / (1.0 - z))


def circle_grid(n: int, offset: float = 0.5) -> np.ndarray:
    """``exp(2 pi i (k + offset) / n)`` for ``k = 0..n-1``."""
    return np.exp(2j * np.pi * (np.arange(n) + offset) / n)


@dataclass
class AnalyticCertificate:
    """Analytic competitor ``F`` with ``F(z0) = target``.

    Attributes
    ----------
    coefficients : ndarray, shape (degree + 1, *shape)
        Taylor coefficients of the polynomial part (in the working frame).
    exponents : ndarray
        Per-coordinate exponents ``rho`` of the outer singular factors.
    z0 : complex
        Interior evaluation point.
    theta : float
        Harmonic measure of the endpoint-1 arc at ``z0``.
    boundary_grid_size : int
        Optimisation grid.
    verification_grid_size : int
        Grid on which ``attained_bound`` is certified.
    grid_max : float
        Max of the boundary norms over the verification grid.
    lipschitz_slack : float
        Added to ``grid_max`` so that ``attained_bound`` bounds the boundary
        norms on the whole circle.
    attained_bound : float
        Certified upper bound ``sup_t N_t(F(t))``.
    frame : tuple of ndarray or None
        Unitaries ``(L, R)``: the certificate for the original problem is
        ``L F(z) R``.
    exact_norms : bool
        Whether the endpoint norms were evaluated exactly.
    """

    coefficients: np.ndarray
    exponents: np.ndarray
    z0: complex
    theta: float
    boundary_grid_size: int
    verification_grid_size: int
    grid_max: float
    lipschitz_slack: float
    attained_bound: float
    frame: tuple | None = None
    exact_norms: bool = True
    iterations: int = 0
    converged: bool = True
    info: dict = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return self.coefficients.shape[0] - 1

    @property
    def shape(self) -> tuple:
        return self.coefficients.shape[1:]

    def evaluate(self, z) -> np.ndarray:
        """``F(z)`` in the original coordinates (``|z| <= 1``, ``z != +-1``)."""
        z = complex(z)
        P = np.tensordot(z ** np.arange(self.degree + 1), self.coefficients, axes=1)
        lam = np.exp(self.exponents * (harmonic_h(z) - harmonic_h(self.z0))).reshape(self.shape)
        Y = lam * P
        if self.frame is not None:
            L, R = self.frame
            Y = L @ Y @ R
        return Y

    def boundary_values(self, n: int, offset: float = 0.5):
        """Boundary samples (modulus part only) in the working frame, with arc labels."""
        t = circle_grid(n, offset)
        arc = (t.imag > 0).astype(float)
        tp = t[:, None] ** np.arange(self.degree + 1)[None, :]
        P = tp @ self.coefficients.reshape(self.degree + 1, -1)
        lam = np.exp(np.outer(arc - self.theta, self.exponents))
        return (lam * P).reshape((n,) + self.shape), arc.astype(bool)

    def verify(self, h0, h1) -> float:
        """Recompute the certified bound from scratch."""
        bound, _, _ = _certify(self.coefficients, self.exponents, self.theta, h0, h1, self.verification_grid_size)
        return bound

    def to_json(self) -> dict:
        c = self.coefficients
        out = {
            "coefficients": {"re": c.real.tolist(), "im": c.imag.tolist()},
            "exponents": self.exponents.tolist(),
            "z0": [self.z0.real, self.z0.imag],
            "theta": self.theta,
            "boundary_grid_size": self.boundary_grid_size,
            "verification_grid_size": self.verification_grid_size,
            "grid_max": self.grid_max,
            "lipschitz_slack": self.lipschitz_slack,
            "attained_bound": self.attained_bound,
            "exact_norms": self.exact_norms,
            "converged": self.converged,
        }
        if self.frame is not None:
            L, R = self.frame
            out["frame"] = {
                "L": {"re": L.real.tolist(), "im": L.imag.tolist()},
                "R": {"re": R.real.tolist(), "im": R.imag.tolist()},
            }
        return out


def _eval_arcs(h0, h1, Y, arc, beta, states, shape, exact=False):
    """Evaluate endpoint norms on both arcs of a boundary batch ``Y`` (N x D)."""
    N = Y.shape[0]
    vals = np.empty(N)
    grads = np.empty_like(Y)
    new_states = [None, None]
    for j, h in ((0, h0), (1, h1)):
        m = arc == j
        if not m.any():
            continue
        Yj = Y[m].reshape((-1,) + shape)
        if exact:
            vals[m] = h.values(Yj, states[j])
            continue
        v, g, st = h.value_grad(Yj, beta, states[j])
        vals[m] = v
        grads[m] = g.reshape(Yj.shape[0], -1)
        new_states[j] = st
    return vals, grads, new_states


def _certify(coefs, rho, theta, h0, h1, n_ver):
    """Certified sup of the boundary norms: grid max plus Lipschitz slack."""
    d = coefs.shape[0] - 1
    shape = coefs.shape[1:]
    t = circle_grid(n_ver)
    arc = (t.imag > 0).astype(int)
    tp = t[:, None] ** np.arange(d + 1)[None, :]
    P = tp @ coefs.reshape(d + 1, -1)
    lam = np.exp(np.outer(arc - theta, rho))
    Y = lam * P
    bound = -np.inf
    gmax = -np.inf
    slack_used = 0.0
    for j, h in ((0, h0), (1, h1)):
        m = arc == j
        vals = h.values(Y[m].reshape((-1,) + shape), robust=True)
        lam_j = np.exp(rho * (j - theta))
        if d > 0:
            cn = h.values((lam_j[None, :] * coefs[1:].reshape(d, -1)).reshape((d,) + shape), robust=True)
            slack = (math.pi / n_ver) * float(np.dot(np.arange(1, d + 1), cn))
        else:
            slack = 0.0
        gm = float(vals.max())
        if gm + slack > bound:
            bound, gmax, slack_used = gm + slack, gm, slack
    return bound, gmax, slack_used


def _common_generators(h0, h1, D):
    g0 = h0.phase_generators
    g1 = h1.phase_generators
    if g0 is None or g1 is None:
        return None
    g0 = np.asarray(g0, dtype=float)
    g1 = np.asarray(g1, dtype=float)
    if g0.shape != g1.shape or g0.shape[1] != D or not np.array_equal(g0, g1):
        return None
    return g0


def _common_frame(h0, h1, x):
    f0 = h0.frame(x)
    f1 = h1.frame(x)
    if f0 is None or f1 is None:
        return None
    return f0


def solve_two_arc(
    h0,
    h1,
    x,
    theta: float,
    degree: int = 4,
    grid: int = 64,
    verification_grid: int = 2048,
    betas=(30.0, 300.0, 3000.0),
    maxiter: int = 300,
    singular_factors: bool = True,
    warm: AnalyticCertificate | None = None,
    want_dual: bool = True,
):
    """Minimise the max boundary norm of certificates through ``x``.

    Parameters
    ----------
    h0, h1 : NormHandle
        Endpoint norms (lower and upper arc).
    x : ndarray
        Target element, of shape ``h0.shape``.
    theta : float
        Interpolation parameter in ``(0, 1)``.
    degree, grid : int
        Polynomial degree and optimisation grid size.
    verification_grid : int
        Grid for the certified bound (even).
    betas : sequence of float
        Log-sum-exp continuation schedule (values are normalised to ~1).
    maxiter : int
        L-BFGS iteration cap per stage.
    singular_factors : bool
        Allow the diagonal outer factors when both norms admit them.
    warm : AnalyticCertificate, optional
        Previous certificate (lower degree allowed) used as a start and as a
        fallback, which makes upper bounds monotone under refinement.
    want_dual : bool
        Also return the dual candidate (gradient of the optimal value in
        ``x``).

    Returns
    -------
    cert : AnalyticCertificate
    eta : ndarray or None
        Functional with ``Re <eta, x>`` close to the optimal value.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    if degree < 0 or grid < 2:
        raise ValueError("degree must be >= 0 and grid >= 2")
    x = np.asarray(x, dtype=complex)
    shape = tuple(h0.shape)
    if x.shape != shape or tuple(h1.shape) != shape:
        raise ValueError(f"target shape {x.shape} does not match handles {shape}")
    frame = _common_frame(h0, h1, x) if x.ndim == 2 else None
    if frame is not None:
        L, R = frame
        xw = L.conj().T @ x @ R.conj().T
    else:
        xw = x
    D = x.size
    gens = _common_generators(h0, h1, D) if singular_factors else None
    g = 0 if gens is None else gens.shape[0]

    scale = max(float(h0(xw)), float(h1(xw)))
    if scale == 0.0:
        raise ValueError("target must be nonzero")
    xh = xw.ravel() / scale

    # the harmonic measure at z0 concentrates on an arc of length ~min(theta, 1 - theta);
    # the optimisation grid must resolve it or the optimiser exploits the gaps
    grid = max(grid, 2 * math.ceil(4.0 / min(theta, 1.0 - theta)))
    z0 = z_theta(theta)
    t = circle_grid(grid)
    arc = (t.imag > 0).astype(int)
    omega = arc.astype(float)
    ls = np.arange(1, degree + 1)
    tau = t[:, None] ** ls[None, :] - z0 ** ls[None, :]
    nc = degree * D
    states = [None, None]

    def unpack(v):
        c = (v[:nc] + 1j * v[nc : 2 * nc]).reshape(degree, D)
        rho = gens.T @ v[2 * nc :] if g else np.zeros(D)
        return c, rho

    def boundary(v):
        c, rho = unpack(v)
        P = xh[None, :] + tau @ c
        lam = np.exp(np.outer(omega - theta, rho))
        return P, lam, lam * P

    def objective(v, beta):
        P, lam, Y = boundary(v)
        vals, xi, st = _eval_arcs(h0, h1, Y, arc, 4.0 * beta, states, shape)
        states[0], states[1] = st
        mx = vals.max()
        w = np.exp(beta * (vals - mx))
        S = w.sum()
        w /= S
        F = mx + math.log(S) / beta
        gY = w[:, None] * xi
        gP = gY * lam
        Gc = tau.T @ gP
        parts = [Gc.real.ravel(), -Gc.imag.ravel()]
        if g:
            grho = ((gY * Y).real * (omega - theta)[:, None]).sum(axis=0)
            parts.append(gens @ grho)
        return F, np.concatenate(parts)

    def exact_max(v):
        _, _, Y = boundary(v)
        vals, _, _ = _eval_arcs(h0, h1, Y, arc, 0.0, states, shape, exact=True)
        return float(vals.max())

    nv = 2 * nc + g
    v = np.zeros(nv)
    starts = [v]
    if warm is not None and warm.shape == shape and (warm.frame is None) == (frame is None):
        wv = _warm_vector(warm, scale, degree, D, g, gens, z0)
        if wv is not None:
            starts.append(wv)
    best_val, best_v = np.inf, v
    for s in starts:
        e = exact_max(s)
        if e < best_val:
            best_val, best_v = e, s
    v = best_v
    iters = 0
    converged = True
    last_beta = betas[-1] if len(betas) else 0.0
    if nv > 0:
        for beta in betas:
            res = minimize(
                objective,
                v,
                args=(beta,),
                jac=True,
                method="L-BFGS-B",
                options={"maxiter": maxiter, "gtol": 1e-8, "ftol": 1e-11, "maxcor": 20},
            )
            iters += int(res.nit)
            v = res.x
            if res.status == 1:
                converged = False
            e = exact_max(v)
            if e < best_val:
                best_val, best_v = e, v
    c, rho = unpack(best_v)
    coefs = np.empty((degree + 1, D), dtype=complex)
    coefs[0] = xh - (z0 ** ls) @ c if degree else xh
    coefs[1:] = c
    coefs *= scale
    coefs = coefs.reshape((degree + 1,) + shape)
    bound, gmax, slack = _certify(coefs, rho, theta, h0, h1, verification_grid)
    cert = AnalyticCertificate(
        coefficients=coefs,
        exponents=rho,
        z0=z0,
        theta=theta,
        boundary_grid_size=grid,
        verification_grid_size=verification_grid,
        grid_max=gmax,
        lipschitz_slack=slack,
        attained_bound=bound,
        frame=frame,
        exact_norms=bool(h0.exact and h1.exact),
        iterations=iters,
        converged=converged,
        info={"grid_bound": best_val * scale},
    )
    if warm is not None and warm.shape == shape and _same_target(warm, x):
        # keep the better of the two certified bounds (monotone refinement)
        if warm.verification_grid_size != verification_grid:
            wb, wg, ws = _certify(warm.coefficients, warm.exponents, theta, h0, h1, verification_grid)
            warm = replace(warm, attained_bound=wb, grid_max=wg, lipschitz_slack=ws, verification_grid_size=verification_grid)
        if warm.attained_bound < cert.attained_bound:
            cert = warm
    eta = None
    if want_dual:
        eta = _dual_candidate(objective, best_v, unpack, tau, omega, theta, xh, last_beta, h0, h1, arc, states, shape, D)
        eta = eta.reshape(shape)
        if frame is not None:
            L, R = frame
            eta = np.conj(L) @ eta @ np.conj(R)
    return cert, eta


def _same_target(cert, x):
    return np.allclose(cert.evaluate(cert.z0), x, rtol=1e-9, atol=1e-12)


def _warm_vector(warm, scale, degree, D, g, gens, z0):
    """Parameter vector reproducing a previous certificate (degree may grow)."""
    d0 = warm.degree
    if d0 > degree:
        return None
    c = np.zeros((degree, D), dtype=complex)
    if d0:
        c[:d0] = warm.coefficients[1:].reshape(d0, D) / scale
    parts = [c.real.ravel(), c.imag.ravel()]
    if g:
        r, *_ = np.linalg.lstsq(gens.T, warm.exponents, rcond=None)
        if not np.allclose(gens.T @ r, warm.exponents, atol=1e-12):
            return None
        parts.append(r)
    elif np.any(warm.exponents != 0):
        return None
    return np.concatenate(parts)


def _dual_candidate(objective, v, unpack, tau, omega, theta, xh, beta, h0, h1, arc, states, shape, D):
    """Derivative of the smoothed optimal value with respect to the target."""
    c, rho = unpack(v)
    P = xh[None, :] + tau @ c
    lam = np.exp(np.outer(omega - theta, rho))
    Y = lam * P
    b = beta if beta > 0 else 3000.0
    vals, xi, _ = _eval_arcs(h0, h1, Y, arc, 4.0 * b, states, shape)
    w = np.exp(b * (vals - vals.max()))
    w /= w.sum()
    return ((w[:, None] * xi) * lam).sum(axis=0)
