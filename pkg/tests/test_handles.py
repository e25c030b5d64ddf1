import numpy as np
import pytest

from banach_interp.handles import (
    CallableNorm,
    MatrixSchattenNorm,
    OperatorNorm,
    Pi2Norm,
    ScaledNorm,
    SpaceNorm,
    _schatten2_norming,
    as_handle,
    check_norm_axioms,
    frobenius,
)
from banach_interp.spaces import dual_norm, lp, norm, schatten, weighted_l2
from banach_interp.tensor import operator_norm

from conftest import INF, cplx

HANDLES = [
    SpaceNorm(lp(3, 1.5)),
    SpaceNorm(weighted_l2([1.0, 2.0])),
    MatrixSchattenNorm((2, 3), 3.0),
    frobenius((2, 2)),
    OperatorNorm(lp(2, 1), lp(2, 4)),
    OperatorNorm(lp(2, INF), lp(2, 2)),
    OperatorNorm(lp(2, 3), lp(2, 1.5)),
    ScaledNorm(OperatorNorm(lp(2, 2), lp(2, 2)), 2.5),
    Pi2Norm(lp(2, INF), 2),
]


@pytest.mark.parametrize("h", HANDLES, ids=lambda h: h.describe())
def test_norm_axioms(h):
    rep = check_norm_axioms(h, trials=20, seed=3)
    assert rep["ok"], rep


@pytest.mark.parametrize("h", HANDLES, ids=lambda h: h.describe())
def test_subgradient_reproduces_the_value(h, rng):
    Y = cplx(rng, 4, *h.shape)
    vals, G, _ = h.value_grad(Y, 0.0, None)
    pair = np.real(np.sum(G.reshape(4, -1) * Y.reshape(4, -1), axis=1))
    np.testing.assert_allclose(pair, vals, rtol=1e-6)


def test_space_norm_matches_descriptor(rng):
    X = lp(3, 4)
    h = as_handle(X)
    y = cplx(rng, 3)
    assert h(y) == pytest.approx(norm(X, y), rel=1e-14)
    assert h.dual()(y) == pytest.approx(dual_norm(X, y), rel=1e-14)


def test_operator_handle_matches_operator_norm(rng):
    h = OperatorNorm(lp(2, 4), lp(2, 3))
    T = cplx(rng, 2, 2)
    est = operator_norm(T, lp(2, 4), lp(2, 3))
    assert est.lower - 1e-9 <= h(T) <= est.upper + 1e-9


def test_schatten_handle_matches_singular_values(rng):
    h = MatrixSchattenNorm((3, 2), 4.0)
    Y = cplx(rng, 3, 2)
    s = np.linalg.svd(Y, compute_uv=False)
    assert h(Y) == pytest.approx((s**4).sum() ** 0.25, rel=1e-12)


def test_callable_norm_finite_difference_gradient(rng):
    h = CallableNorm(lambda Y: float(np.linalg.norm(Y)), (2, 2))
    Y = cplx(rng, 2, 2)
    vals, G, _ = h.value_grad(Y[None], 0.0, None)
    assert vals[0] == pytest.approx(np.linalg.norm(Y))
    np.testing.assert_allclose(G[0].reshape(2, 2), np.conj(Y) / np.linalg.norm(Y), atol=1e-5)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, 4.0, INF])
def test_closed_form_two_by_two_schatten_norming(p, rng):
    Y = cplx(rng, 200, 2, 2)
    u, v = cplx(rng, 20, 2, 1), cplx(rng, 20, 1, 2)
    Q = np.linalg.qr(cplx(rng, 20, 2, 2))[0]
    Y = np.concatenate([Y, u @ v, 2 * Q, 3 * Q + 1e-9 * cplx(rng, 20, 2, 2), np.zeros((1, 2, 2))])
    vals, xi = _schatten2_norming(Y, p)
    X = schatten(2, p)
    ref = np.array([norm(X, y) for y in Y])
    np.testing.assert_allclose(vals, ref, atol=1e-13)
    pair = np.einsum("bk,bk->b", xi, Y.reshape(-1, 4))
    np.testing.assert_allclose(pair.real, vals, atol=1e-8)
    dn = np.array([dual_norm(X, x.reshape(2, 2)) for x in xi])
    np.testing.assert_allclose(dn[ref > 0], 1.0, atol=1e-12)
