import math

import numpy as np
import pytest

from banach_interp.analytic import (
    BoundaryNormFamily,
    MatrixPolynomial,
    SpectralFactorizationError,
    gamma_family_norm,
    outer_spectral_factorize,
    outerness_check,
    subharmonicity_check,
    theorem23_factorize,
    two_convexity_check,
    two_convexity_margin,
    winding_number,
)
from banach_interp.factorization import gamma2_norm
from banach_interp.handles import MatrixSchattenNorm, OperatorNorm, frobenius
from banach_interp.spaces import lp, weighted_l2

from conftest import INF, cplx


def circle(N):
    return np.exp(2j * np.pi * np.arange(N) / N)


# ---------------------------------------------------------------------------
# matrix polynomials


def test_matrix_polynomial_evaluation(rng):
    C = [cplx(rng, 2, 3) for _ in range(3)]
    F = MatrixPolynomial(C)
    z = 0.3 - 0.2j
    np.testing.assert_allclose(F.evaluate(z), C[0] + z * C[1] + z**2 * C[2], atol=1e-14)
    t = circle(8)
    np.testing.assert_allclose(F.boundary(8), F.evaluate(t), atol=1e-13)
    assert F.degree == 2 and F.shape == (2, 3)
    G = MatrixPolynomial.from_json(F.to_json())
    np.testing.assert_array_equal(G.evaluate(z), F.evaluate(z))
    np.testing.assert_allclose(F.transpose().evaluate(z), F.evaluate(z).T)


# ---------------------------------------------------------------------------
# spectral factorization


def test_constant_weight():
    Phi = np.broadcast_to(4.0 * np.eye(2), (32, 2, 2)).copy()
    A = outer_spectral_factorize(Phi)
    np.testing.assert_allclose(A.evaluate(0.5), 2.0 * np.eye(2), atol=1e-10)
    assert A.degree == 0 or np.allclose(A.evaluate(0.7), A.evaluate(0.0))


def test_scalar_weight_recovers_outer_polynomial():
    t = circle(64)
    Phi = (5 / 4 + np.cos(np.angle(t)))[:, None, None] + 0j
    A = outer_spectral_factorize(Phi)
    assert A.info["residual"] <= 1e-8
    ref = np.array([1.0, 0.5])
    a = np.array([A.evaluate(0.0)[0, 0], (A.evaluate(0.1)[0, 0] - A.evaluate(0.0)[0, 0]) / 0.1])
    # unique up to a unimodular constant
    u = a[0] / abs(a[0])
    np.testing.assert_allclose(a / u, ref, atol=1e-8)
    assert outerness_check(A)


def test_block_diagonal_weight():
    t = circle(64)
    p1 = 5 / 4 + np.cos(np.angle(t))
    p2 = 2 + np.sin(np.angle(t))
    Phi = np.zeros((64, 2, 2), complex)
    Phi[:, 0, 0], Phi[:, 1, 1] = p1, p2
    A = outer_spectral_factorize(Phi)
    A1 = outer_spectral_factorize(p1[:, None, None] + 0j)
    A2 = outer_spectral_factorize(p2[:, None, None] + 0j)
    for z in (0.0, 0.4j, -0.6):
        Az = A.evaluate(z)
        assert abs(Az[0, 1]) < 1e-8 and abs(Az[1, 0]) < 1e-8
        assert abs(Az[0, 0]) == pytest.approx(abs(A1.evaluate(z)[0, 0]), abs=1e-8)
        assert abs(Az[1, 1]) == pytest.approx(abs(A2.evaluate(z)[0, 0]), abs=1e-8)


@pytest.mark.parametrize("m", [2, 3])
def test_random_trig_weight(m):
    rng = np.random.default_rng(m)
    t = circle(64)
    C0, C1 = cplx(rng, m, m), cplx(rng, m, m)
    G = C0[None] + t[:, None, None] * C1[None]
    Phi = np.conj(np.swapaxes(G, 1, 2)) @ G + 0.5 * np.eye(m)
    A = outer_spectral_factorize(Phi)
    At = A.boundary(64)
    R = np.conj(np.swapaxes(At, 1, 2)) @ At - Phi
    assert np.max(np.linalg.norm(R, axis=(1, 2))) <= 1e-8
    assert A.info["iterations"] <= 50
    assert outerness_check(A)


def test_non_positive_weight_is_rejected():
    Phi = np.broadcast_to(np.diag([1.0, -1.0]), (32, 2, 2)).astype(complex)
    with pytest.raises(ValueError):
        outer_spectral_factorize(Phi)


def test_iteration_cap_is_reported():
    t = circle(64)
    Phi = (1.0 + 1e-9 + np.cos(np.angle(t)))[:, None, None] + 0j
    with pytest.raises(SpectralFactorizationError) as info:
        outer_spectral_factorize(Phi, max_iter=2, tol=1e-14)
    assert info.value.iterations == 2
    assert info.value.residual > 0


def test_outerness_examples():
    assert outerness_check(MatrixPolynomial([np.eye(2)]))
    assert not outerness_check(MatrixPolynomial([np.zeros((1, 1)), np.ones((1, 1))]))
    assert winding_number(MatrixPolynomial([np.zeros((2, 2)), np.eye(2)])) == 2
    assert outerness_check(MatrixPolynomial([np.ones((1, 1)), 0.5 * np.ones((1, 1))]))


def test_outerness_rejects_boundary_zeros():
    with pytest.raises(ValueError):
        outerness_check(MatrixPolynomial([np.ones((1, 1)), np.ones((1, 1))]), N=64)


# ---------------------------------------------------------------------------
# the gamma norm of a pair of factor norms


def test_gamma_family_norm_examples(rng):
    op = OperatorNorm(lp(2, 2), lp(2, 2))
    est = gamma_family_norm(op, op, np.eye(2))
    assert est.upper == pytest.approx(1.0, abs=1e-6)
    assert est.lower <= est.upper + 1e-9
    x, y = np.array([1.0, 2.0]), np.array([0.5j, 1.0])
    a = gamma_family_norm(op, op, np.outer(y, x))
    b = gamma_family_norm(op, op, 3 * np.outer(y, x))
    assert a.upper == pytest.approx(np.linalg.norm(x) * np.linalg.norm(y), rel=1e-6)
    assert b.upper == pytest.approx(3 * a.upper, rel=1e-6)


def test_gamma_family_norm_matches_gamma2(rng):
    E, F = lp(2, 1), lp(2, 4)
    alpha = OperatorNorm(E, lp(2, 2))
    beta = OperatorNorm(F, lp(2, 2))
    T = cplx(rng, 2, 2)
    est = gamma_family_norm(alpha, beta, T)
    ref = gamma2_norm(T, E, F)
    assert est.upper == pytest.approx(ref.upper, rel=0.05)
    # the factors reproduce T = B^T A
    A, B = est.upper_witness
    np.testing.assert_allclose(B.T @ A, T, atol=1e-9)


# ---------------------------------------------------------------------------
# boundary families


def test_boundary_family_validation():
    h = frobenius((2, 2))
    with pytest.raises(ValueError):
        BoundaryNormFamily([h] * 8)
    with pytest.raises(ValueError):
        BoundaryNormFamily([h] * 15 + [frobenius((2, 3))])
    fam = BoundaryNormFamily.constant(h, N=32)
    assert fam.is_constant and fam.has_interior and fam.N == 32
    assert fam.at(0.3j) is h and fam.nearest(1j) is h


def test_two_arc_family_interior_rule():
    fam = BoundaryNormFamily.two_arc(weighted_l2([1, 1]), weighted_l2([1, 16]), N=64)
    h = fam.at(0.0)
    assert h(np.array([0.0, 1.0])) == pytest.approx(2.0, rel=1e-12)
    assert fam.nearest(1j)(np.array([0.0, 1.0])) == pytest.approx(4.0)
    assert fam.nearest(-1j)(np.array([0.0, 1.0])) == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# analytic factorization


def test_constant_identity_case():
    op = OperatorNorm(lp(2, 2), lp(2, 2))
    fam = BoundaryNormFamily.constant(op, N=32)
    res = theorem23_factorize(MatrixPolynomial([np.eye(2)]), fam, fam, 0.1)
    for z in (0.0, 0.5):
        Az = res.A.evaluate(z)
        assert np.allclose(Az, Az[0, 0] * np.eye(2), atol=1e-8)
        assert op(Az) * op(res.B(z)) <= 1.1 * 1.0 + 1e-9
    assert res.ok and res.residual <= 1e-7


@pytest.mark.parametrize(
    "handle",
    [MatrixSchattenNorm((2, 2), INF), frobenius((2, 2)), OperatorNorm(lp(2, 1), lp(2, 2))],
    ids=["operator", "frobenius", "l1-to-l2"],
)
def test_diag_z_factorization(handle):
    F = MatrixPolynomial([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    fam = BoundaryNormFamily.constant(handle, N=128)
    res = theorem23_factorize(F, fam, fam, 0.1)
    assert res.residual <= 1e-7
    assert res.info["outer"]
    assert len(res.checks) == 10 and res.ok
    # B^T A = F at interior points too
    for z in (0.2, -0.5j):
        np.testing.assert_allclose(res.B(z).T @ res.A.evaluate(z), F.evaluate(z), atol=1e-7)


def test_bound_at_zero_is_geometric_mean():
    op = OperatorNorm(lp(2, 2), lp(2, 2))
    fam = BoundaryNormFamily.constant(op, N=64)
    F = MatrixPolynomial([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    res = theorem23_factorize(F, fam, fam, 0.1)
    ref = 1.1 * math.exp(np.mean(np.log(res.gamma_samples)))
    assert res.certificate(0.0) == pytest.approx(ref, rel=1e-12)
    assert res.bound_certificate == pytest.approx(ref, rel=1e-12)


def test_factorization_rejects_bad_input():
    op = OperatorNorm(lp(2, 2), lp(2, 2))
    fam = BoundaryNormFamily.constant(op, N=32)
    F = MatrixPolynomial([np.eye(2)])
    with pytest.raises(ValueError):
        theorem23_factorize(F, fam, fam, 0.0)
    with pytest.raises(ValueError):
        theorem23_factorize(F, fam, BoundaryNormFamily.constant(op, N=64), 0.1)


# ---------------------------------------------------------------------------
# property testers


def test_two_convexity_examples():
    for delta in (OperatorNorm(lp(2, 4), lp(2, 2)), frobenius((2, 2))):
        rep = two_convexity_check(delta, trials=200, seed=1)
        assert rep["ok"] and not rep["violations"]
    h = frobenius((2, 2))
    Z = np.zeros((2, 2))
    assert two_convexity_margin(h, Z, Z, np.eye(2)) == 0


def test_two_convexity_detects_a_non_two_convex_norm():
    # the trace norm is not 2-convex
    rep = two_convexity_check(MatrixSchattenNorm((2, 2), 1.0), trials=200, seed=0)
    assert not rep["ok"]


def test_subharmonicity_examples():
    op = OperatorNorm(lp(2, 2), lp(2, 2))
    fam = BoundaryNormFamily.constant(op, N=32)
    rep = subharmonicity_check(fam, MatrixPolynomial([np.diag([2.0, 1.0])]), probes=10)
    assert rep["ok"] and abs(rep["max_excess"]) < 1e-12
    F = MatrixPolynomial([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    rep = subharmonicity_check(fam, F, circles=[(0.0, 0.5), (0.0, 0.9)])
    assert rep["ok"]
    fam = BoundaryNormFamily.two_arc(weighted_l2([1, 2]), weighted_l2([3, 1]), N=64)
    G = MatrixPolynomial([np.array([[1.0, 0.5]]), np.array([[0.3j, 1.0]])])
    rep = subharmonicity_check(fam, G, probes=100, tol=1e-3)
    assert rep["ok"]
