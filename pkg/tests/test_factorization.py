import math

import numpy as np
import pytest

from banach_interp.factorization import (
    Factorization2,
    ell_gaussian,
    gamma2_dual,
    gamma2_norm,
    kwapien_bound_check,
    m2_convexity_constant,
    pi2_norm,
    type2_constant,
)
from banach_interp.spaces import dual_space, lp, norm, schatten, square_function_norm, weighted_l2
from banach_interp.tensor import operator_norm, trace_pairing

from conftest import INF, cplx


# ---------------------------------------------------------------------------
# pi_2


def test_pi2_identity():
    for n in (2, 3):
        est = pi2_norm(np.eye(n), lp(n, 2))
        assert est.lower == pytest.approx(math.sqrt(n), abs=1e-6)
        assert est.upper == pytest.approx(math.sqrt(n), abs=1e-6)


def test_pi2_rank_one_is_the_operator_norm():
    u = np.outer([1.0, 2.0], [1.0, -1j])
    for X in (lp(2, 4), lp(2, INF), lp(2, 1.5)):
        est = pi2_norm(u, X)
        op = operator_norm(u, X, lp(2, 2))
        assert est.lower <= op.upper + 1e-9
        assert op.lower <= est.upper + 1e-9
        assert est.lower == pytest.approx(op.lower, rel=0.01)


def test_pi2_zero():
    est = pi2_norm(np.zeros((2, 2)), lp(2, 4))
    assert est.lower == 0 and est.upper == 0


def test_pi2_gram_witness(rng):
    u = cplx(rng, 2, 2)
    X = lp(2, INF)
    est = pi2_norm(u, X)
    Sigma = est.lower_witness
    w, Q = np.linalg.eigh(Sigma)
    V = Q * np.sqrt(np.clip(w, 0, None))
    # V is a contraction from l_2 into X, so ||uV||_HS is a lower bound
    assert operator_norm(V, lp(2, 2), X).upper <= 1 + 1e-6
    assert np.linalg.norm(u @ V) == pytest.approx(est.lower, rel=1e-6)


def test_pi2_of_hilbert_domain_is_hilbert_schmidt(rng):
    u = cplx(rng, 3, 2)
    X = weighted_l2([2.0, 0.5])
    est = pi2_norm(u, X)
    ref = np.linalg.norm(u / np.sqrt(X.weight_array)[None, :])
    assert est.lower == pytest.approx(ref, rel=1e-6)
    assert est.upper == pytest.approx(ref, rel=1e-6)


# ---------------------------------------------------------------------------
# Gaussian averages


def test_ell_gaussian_identity():
    for n in (2, 3):
        est = ell_gaussian(np.eye(n), lp(n, 2), seed=3)
        assert abs(est.value_lower - math.sqrt(n)) <= 3 * est.std_error


def test_ell_gaussian_zero_and_scaling(rng):
    assert ell_gaussian(np.zeros((2, 2)), lp(2, 4)).value_lower == 0
    u = cplx(rng, 2, 3)
    a = ell_gaussian(u, lp(2, 4), seed=5)
    b = ell_gaussian((2 - 1j) * u, lp(2, 4), seed=5)
    assert b.value_lower == pytest.approx(abs(2 - 1j) * a.value_lower, rel=1e-12)


def test_ell_gaussian_rejects_few_trials():
    with pytest.raises(ValueError):
        ell_gaussian(np.eye(2), lp(2, 2), trials=50)


# ---------------------------------------------------------------------------
# gamma_2 and its dual


def test_gamma2_examples(rng):
    est = gamma2_norm(np.eye(3), lp(3, 2), lp(3, 2))
    assert est.lower == pytest.approx(1.0, abs=1e-6) and est.upper == pytest.approx(1.0, abs=1e-6)
    # gamma_2(I : l_1^2 -> l_1^2), i.e. F* = l_1
    est = gamma2_norm(np.eye(2), lp(2, 1), lp(2, INF))
    assert est.lower == pytest.approx(math.sqrt(2), rel=0.05)
    assert est.upper == pytest.approx(math.sqrt(2), rel=0.05)


def test_gamma2_factorization_witness(rng):
    T = cplx(rng, 2, 2)
    E, F = lp(2, 4), lp(2, 1)
    est = gamma2_norm(T, E, F)
    fac = est.upper_witness
    assert isinstance(fac, Factorization2)
    assert fac.residual(T) <= 1e-9
    assert fac.A.shape[0] <= min(T.shape)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("p", [1.0, 2.0, 4.0, INF])
def test_banach_mazur_distance_to_euclidean(n, p):
    X = lp(n, p)
    est = gamma2_norm(np.eye(n), X, dual_space(X))
    ref = n ** abs(1 / p - 0.5)
    assert est.lower >= 0.95 * ref and est.upper <= 1.05 * ref
    assert est.lower <= est.upper + 1e-9


@pytest.mark.slow
def test_gamma2_dominates_operator_norm(rng):
    spaces = [(lp(2, 1), lp(2, 1.5)), (lp(2, 4), lp(2, 4)), (lp(2, INF), lp(2, 2)), (lp(2, 3), lp(2, INF))]
    for k in range(100):
        E, F = spaces[k % 4]
        T = cplx(rng, 2, 2)
        g = gamma2_norm(T, E, F)
        op = operator_norm(T, E, dual_space(F))
        assert op.lower <= g.upper + 1e-9
        assert g.lower <= g.upper + 1e-9


def test_gamma2_dual_identity():
    for n in (2, 3):
        est = gamma2_dual(np.eye(n), lp(n, 2), lp(n, 2))
        assert est.lower == pytest.approx(n, rel=0.05) and est.upper == pytest.approx(n, rel=0.05)


def test_gamma2_dual_rank_one_scaling():
    x, y = np.array([1.0, 0.5j]), np.array([2.0, 1.0])
    E, F = lp(2, 4), lp(2, 3)
    a = gamma2_dual(np.outer(y, x), E, F)
    b = gamma2_dual(3 * np.outer(y, x), E, F)
    assert b.upper == pytest.approx(3 * a.upper, rel=1e-4)
    assert b.lower == pytest.approx(3 * a.lower, rel=1e-4)


def test_gamma2_trace_duality(rng):
    E, F = lp(2, 1), lp(2, 4)
    for _ in range(5):
        S, T = cplx(rng, 2, 2), cplx(rng, 2, 2)
        g = gamma2_norm(T, E, F)
        gd = gamma2_dual(S, E, F)
        assert abs(trace_pairing(S, T)) <= g.upper * gd.upper + 1e-6
        assert gd.lower <= gd.upper + 1e-9


# ---------------------------------------------------------------------------
# geometric constants


def test_type2_constant():
    est = type2_constant(lp(3, 2))
    assert est.value_lower == 1.0 and est.is_exact
    assert type2_constant(weighted_l2([1, 3])).is_exact
    est = type2_constant(lp(2, INF), seed=1)
    assert est.value_lower > 1.0 and not est.is_exact
    assert est.method == "monte_carlo"


def test_type2_constant_is_a_running_maximum():
    a = type2_constant(lp(2, INF), trials=50, seed=1)
    b = type2_constant(lp(2, INF), trials=200, seed=1)
    assert b.value_lower >= a.value_lower


def test_m2_constant_examples():
    for p in (2.0, 4.0, INF):
        est = m2_convexity_constant(lp(3, p))
        assert est.value_lower == 1.0 and est.is_exact
    assert m2_convexity_constant(lp(1, 1.0)).value_lower == pytest.approx(1.0)
    for p in (1.0, 1.5):
        assert m2_convexity_constant(lp(2, p), seed=2).value_lower >= 1.0
    with pytest.raises(ValueError):
        m2_convexity_constant(schatten(2, 2))


def test_m2_closed_form_matches_sampling():
    # no sampled family beats the closed-form value 1 for p >= 2
    rng = np.random.default_rng(0)
    for p in (2.0, 4.0, INF):
        X = lp(2, p)
        worst = 0.0
        for _ in range(3000):
            k = int(rng.integers(1, 4))
            xs = cplx(rng, k, 2)
            rhs = math.sqrt(sum(norm(X, x) ** 2 for x in xs))
            worst = max(worst, square_function_norm(X, xs) / rhs)
        assert worst <= 1 + 1e-9


# ---------------------------------------------------------------------------
# Kwapien-Maurey comparison


def test_kwapien_hilbert_case_is_tight(rng):
    T = cplx(rng, 2, 2)
    rep = kwapien_bound_check(T, lp(2, 2), lp(2, 2), 1)
    assert rep["status"] == "pass"
    assert rep["margin"] >= 0
    assert rep["margin"] == pytest.approx(0.0, abs=1e-6)


@pytest.mark.slow
def test_kwapien_l4_case3(rng):
    for k in range(100):
        T = cplx(rng, 2, 2)
        rep = kwapien_bound_check(T, lp(2, 4), lp(2, 4), 3, seed=k)
        assert rep["margin"] >= -1e-6


def test_kwapien_margin_scales(rng):
    T = cplx(rng, 2, 2)
    a = kwapien_bound_check(T, lp(2, 4), lp(2, 2), 2)
    b = kwapien_bound_check(3 * T, lp(2, 4), lp(2, 2), 2)
    assert np.sign(a["margin"]) == np.sign(b["margin"])
    assert b["margin"] == pytest.approx(3 * a["margin"], rel=1e-4, abs=1e-9)


def test_kwapien_rejects_non_lattices(rng):
    with pytest.raises(ValueError):
        kwapien_bound_check(np.eye(4), schatten(2, 2), schatten(2, 2), 3)


# ---------------------------------------------------------------------------
# chains through pi_2


@pytest.mark.parametrize("p", [2.0, 4.0, INF])
def test_gaussian_chain(p, rng):
    for _ in range(5):
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        T = cplx(rng, n, m)
        X = lp(m, p)
        # pi_2(T : X* -> l_2^n) <= l(T^T : l_2^n -> X)
        pi = pi2_norm(T, dual_space(X))
        ell = ell_gaussian(T.T, X, seed=1)
        assert pi.lower <= ell.value_lower + 3 * ell.std_error


@pytest.mark.parametrize("p", [2.0, 4.0, INF])
def test_square_function_chain(p, rng):
    for _ in range(5):
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        T = cplx(rng, n, m)
        X = lp(m, p)
        pi = pi2_norm(T, dual_space(X))
        sq = square_function_norm(X, T)
        assert math.sqrt(math.pi) / 2 * pi.lower <= sq + 1e-9
        assert sq <= pi.upper + 1e-6
