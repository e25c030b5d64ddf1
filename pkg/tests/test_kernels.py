"""The compiled and numpy kernel backends agree."""
import math

import numpy as np
import pytest

from banach_interp import _pykernels, kernels

from conftest import cplx

try:
    from banach_interp import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
EXPONENTS = [1.0, 1.5, 2.0, 3.0, 4.0, math.inf]


def test_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")
    if _ckernels is not None:
        assert kernels.BACKEND == "cython"


@pytest.mark.parametrize("p", EXPONENTS)
def test_lp_norming_reference(p, rng):
    Y = cplx(rng, 50, 3)
    Y[0] = 0.0
    Y[1, 1] = 0.0
    vals, xi = _pykernels.lp_norming(Y, p)
    ref = [np.linalg.norm(y, ord=p) for y in Y]
    np.testing.assert_allclose(vals, ref, rtol=1e-13, atol=1e-15)
    # the functionals norm their vectors
    np.testing.assert_allclose(np.sum(xi[1:] * Y[1:], axis=1).real, vals[1:], rtol=1e-12)


@needs_ext
@pytest.mark.parametrize("p", EXPONENTS)
def test_lp_norming_parity(p, rng):
    Y = cplx(rng, 200, 4)
    Y[0] = 0.0
    vc, xc = _ckernels.lp_norming(Y, p)
    vp, xp = _pykernels.lp_norming(Y, p)
    np.testing.assert_allclose(vc, vp, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(np.sum(xc * Y, axis=1), np.sum(xp * Y, axis=1), rtol=1e-12, atol=1e-14)


@needs_ext
@pytest.mark.parametrize("p", EXPONENTS)
def test_lp_smooth_parity(p, rng):
    Y = cplx(rng, 100, 3)
    vc, xc = _ckernels.lp_smooth(Y, p, 40.0)
    vp, xp = _pykernels.lp_smooth(Y, p, 40.0)
    np.testing.assert_allclose(vc, vp, rtol=1e-12)
    np.testing.assert_allclose(xc, xp, rtol=1e-10, atol=1e-12)


@needs_ext
@pytest.mark.parametrize("pq", [(1.0, 2.0), (4.0, 3.0), (math.inf, 1.5), (2.0, math.inf)])
def test_lp_opnorm_batch_parity(pq, rng):
    p, q = pq
    T = cplx(rng, 30, 2, 3)
    X0 = cplx(rng, 30, 4, 3)
    vc, _, _ = _ckernels.lp_opnorm_batch(T, p, q, X0, 200, 1e-13)
    vp, _, _ = _pykernels.lp_opnorm_batch(T, p, q, X0, 200, 1e-13)
    np.testing.assert_allclose(vc, vp, rtol=1e-9)


@needs_ext
def test_sphere_grid_parity(rng):
    T = cplx(rng, 2, 2)
    c = _ckernels.sphere_grid_max2(T, 4.0, 3.0, 64, 64)
    p = _pykernels.sphere_grid_max2(T, 4.0, 3.0, 64, 64)
    assert c[0] == pytest.approx(p[0], rel=1e-12)


@needs_ext
@pytest.mark.parametrize("p", EXPONENTS)
def test_gaussian_sq_norms_parity(p, rng):
    U = cplx(rng, 3, 2)
    G = rng.standard_normal((500, 2))
    np.testing.assert_allclose(_ckernels.gaussian_sq_norms(U, G, p), _pykernels.gaussian_sq_norms(U, G, p), rtol=1e-12)
