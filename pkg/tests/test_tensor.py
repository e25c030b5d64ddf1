import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from banach_interp.spaces import dual_space, lp, norm, weighted_l2
from banach_interp.tensor import (
    TensorDecomposition,
    d2_norm,
    injective_norm,
    operator_norm,
    projective_norm,
    trace_pairing,
)

from conftest import INF, cplx

LP_GRID = [(lp(2, p), lp(2, q)) for p in (1.0, 2.0, 4.0, INF) for q in (1.0, 4.0, INF)]


def test_trace_pairing_examples(rng):
    I = np.eye(2)
    assert trace_pairing(I, I) == 2
    E11 = np.array([[1.0, 0.0], [0.0, 0.0]])
    E12 = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert trace_pairing(E11, E12) == 0
    B, A1, A2 = cplx(rng, 2, 3), cplx(rng, 2, 3), cplx(rng, 2, 3)
    assert trace_pairing(B, A1 + A2) == pytest.approx(trace_pairing(B, A1) + trace_pairing(B, A2), abs=1e-12)


def test_trace_pairing_shape_mismatch():
    with pytest.raises(ValueError):
        trace_pairing(np.eye(2), np.eye(3))


def test_operator_norm_examples(rng):
    I = np.eye(3)
    est = operator_norm(I, lp(3, 2), lp(3, 2))
    assert est.lower == pytest.approx(1.0) and est.upper == pytest.approx(1.0)
    T = cplx(rng, 3, 3)
    est = operator_norm(T, lp(3, 2), lp(3, 2))
    s = np.linalg.svd(T, compute_uv=False)[0]
    assert abs(est.lower - s) <= 1e-9 and abs(est.upper - s) <= 1e-9
    T = cplx(rng, 2, 3)
    est = operator_norm(T, lp(3, 1), lp(2, 4))
    ref = max(norm(lp(2, 4), T[:, k]) for k in range(3))
    assert est.lower == pytest.approx(ref, abs=1e-12) and est.upper == pytest.approx(ref, abs=1e-12)


def test_operator_norm_witness_reproduces_the_value(rng):
    E, G = lp(2, 3), lp(2, 1.5)
    T = cplx(rng, 2, 2)
    est = operator_norm(T, E, G)
    w = est.lower_witness
    assert norm(E, w["x"]) == pytest.approx(1.0, abs=1e-9)
    assert norm(dual_space(G), w["functional"]) == pytest.approx(1.0, abs=1e-9)
    assert abs(w["functional"] @ T @ w["x"]) == pytest.approx(est.lower, abs=1e-9)


def test_operator_norm_is_certified_in_two_dimensions(rng):
    for E, G in [(lp(2, 4), lp(2, 3)), (lp(2, 1.5), lp(2, INF))]:
        T = cplx(rng, 2, 2)
        est = operator_norm(T, E, G)
        assert est.lower <= est.upper <= 1.01 * est.lower
        # random sampling of the unit sphere never beats the certified upper bound
        X = cplx(rng, 2000, 2)
        X /= np.array([norm(E, x) for x in X])[:, None]
        best = max(norm(G, T @ x) for x in X)
        assert best <= est.upper + 1e-9


def test_injective_norm_examples():
    x, y = np.array([1.0, 2.0]), np.array([3.0, -1j])
    for E, F in [(lp(2, 1), lp(2, 4)), (lp(2, 3), lp(2, INF))]:
        est = injective_norm(np.outer(y, x), E, F)
        ref = norm(E, x) * norm(F, y)
        assert est.lower == pytest.approx(ref, rel=1e-9)
        assert est.lower <= est.upper + 1e-9
    est = injective_norm(np.eye(2), lp(2, 2), lp(2, 2))
    assert est.lower == pytest.approx(1.0) and est.upper == pytest.approx(1.0)


def test_projective_norm_examples(rng):
    x, y = np.array([1.0, 2.0]), np.array([3.0, -1j])
    for E, F in [(lp(2, 1), lp(2, 4)), (lp(2, 3), lp(2, INF))]:
        est = projective_norm(np.outer(y, x), E, F)
        ref = norm(E, x) * norm(F, y)
        assert est.upper == pytest.approx(ref, abs=1e-9)
        assert est.lower <= est.upper + 1e-9
        assert est.lower >= 0.99 * ref
    est = projective_norm(np.eye(2), lp(2, 2), lp(2, 2))
    assert est.lower == pytest.approx(2.0, rel=0.02) and est.upper == pytest.approx(2.0, rel=0.02)
    T = cplx(rng, 2, 2)
    est = projective_norm(T, lp(2, 1), lp(2, 1))
    assert est.upper == pytest.approx(np.abs(T).sum(), abs=1e-9)
    assert est.lower == pytest.approx(np.abs(T).sum(), abs=1e-9)


def test_projective_decomposition_reconstructs(rng):
    T = cplx(rng, 2, 2)
    E, F = lp(2, 4), lp(2, 1.5)
    est = projective_norm(T, E, F)
    dec = est.upper_witness
    assert isinstance(dec, TensorDecomposition)
    assert dec.residual(T) <= 1e-10
    assert dec.cost(E, F) == pytest.approx(est.upper, rel=1e-9)
    assert len(dec.terms) <= 4 * T.size


def test_projective_dual_witness_is_feasible(rng):
    T = cplx(rng, 2, 2)
    E, F = lp(2, 3), lp(2, 1)
    est = projective_norm(T, E, F)
    S = est.lower_witness
    assert operator_norm(S, E, dual_space(F)).upper <= 1 + 1e-6
    assert abs(trace_pairing(S, T)) == pytest.approx(est.lower, rel=1e-6)


def test_projective_duality_gap_on_lp_families(rng):
    for E, F in LP_GRID[::2]:
        T = cplx(rng, 2, 2)
        est = projective_norm(T, E, F)
        assert est.upper - est.lower <= 0.1 * est.upper


def test_injective_below_projective(rng):
    for k in range(100):
        E, F = LP_GRID[k % len(LP_GRID)]
        T = cplx(rng, 2, 2)
        inj = injective_norm(T, E, F, certify=False)
        proj = projective_norm(T, E, F, iters=20)
        assert inj.lower <= proj.upper + 1e-9


def test_pairing_holder_bound(rng):
    for E, F in LP_GRID[:6]:
        S, T = cplx(rng, 2, 2), cplx(rng, 2, 2)
        op = operator_norm(S, E, dual_space(F))
        proj = projective_norm(T, E, F)
        assert abs(trace_pairing(S, T)) <= op.upper * proj.upper + 1e-9


def test_d2_norm_examples():
    est = d2_norm(np.eye(2), lp(2, 2), lp(2, 2))
    assert est.lower == pytest.approx(np.sqrt(2), abs=1e-6)
    assert est.upper == pytest.approx(np.sqrt(2), abs=1e-6)
    x, y = np.array([1.0, 2.0]), np.array([3.0, -1j])
    E, F = lp(2, 3), lp(2, 4)
    est = d2_norm(np.outer(y, x), E, F)
    assert est.lower == pytest.approx(norm(E, x) * norm(F, y), rel=1e-6)
    assert est.lower <= est.upper + 1e-9


def test_d2_norm_homogeneity(rng):
    T = cplx(rng, 2, 2)
    E, F = weighted_l2([1, 2]), weighted_l2([3, 1])
    a = d2_norm(T, E, F)
    b = d2_norm(2.5 * T, E, F)
    assert b.upper == pytest.approx(2.5 * a.upper, rel=1e-6)
    assert b.lower == pytest.approx(2.5 * a.lower, rel=1e-6)


@settings(max_examples=20)
@given(st.sampled_from(LP_GRID), st.integers(0, 2**31 - 1), st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_operator_norm_scales(spaces, seed, c):
    E, G = spaces
    T = cplx(np.random.default_rng(seed), 2, 2)
    a = operator_norm(T, E, G, certify=False)
    b = operator_norm(c * T, E, G, certify=False)
    assert b.lower == pytest.approx(abs(c) * a.lower, rel=1e-6)
