"""Certified numerics for finite-dimensional Banach-space interpolation.

Modules
-------
spaces
    l_p, weighted l_2 and Schatten spaces: norms, duals, square functions.
interp
    Complex interpolation of norm pairs with certified upper and lower bounds.
tensor
    Trace pairing, injective, projective and d_2 tensor norms.
factorization
    2-summing and gamma_2 norms, Gaussian averages, type 2 and 2-convexity
    constants.
analytic
    Matrix polynomials, outer spectral factorization and the analytic
    factorization construction for 2-convex norm families.
harness
    Named verification runs and reports.
"""
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
