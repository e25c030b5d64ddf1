"""Parametric finite-dimensional normed spaces.

Three families are supported: ``l_p^n``, weighted ``l_2^n`` and the Schatten
classes ``S_p`` on ``k x k`` matrices.  All scalars are complex.  The exponent
``p = inf`` is stored as ``math.inf`` and conjugation maps ``1 <-> inf``
exactly.

Duality is always taken with respect to the bilinear pairing
``<xi, x> = sum(xi * x)`` (for matrices this is ``tr(B^T A)``), so the dual of
``WeightedL2(w)`` is ``WeightedL2(1/w)`` and norming functionals carry a
complex conjugate.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "Family",
    "SpaceDescriptor",
    "lp",
    "weighted_l2",
    "schatten",
    "conjugate_exponent",
    "norm",
    "norms",
    "dual_space",
    "dual_norm",
    "pairing",
    "norming_functional",
    "square_function_norm",
    "random_unit_vector",
]


class Family(str, enum.Enum):
    LP = "Lp"
    WEIGHTED_L2 = "WeightedL2"
    SCHATTEN = "Schatten"


def _parse_exponent(p) -> float:
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "∞"):
            return math.inf
        p = float(p)
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    return p


def conjugate_exponent(p: float) -> float:
    """Return ``p'`` with ``1/p + 1/p' = 1``; ``1`` and ``inf`` swap exactly."""
    p = _parse_exponent(p)
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    if p == 2.0:
        return 2.0
    # read p as a short rational when it is one up to rounding, so that
    # e.g. 4/3 <-> 4 and 6/5 <-> 6 map exactly and the bidual is the identity
    r = Fraction(p).limit_denominator(10**4)
    if abs(float(r) - p) <= 1e-14 * p:
        return float(r / (r - 1))
    return p / (p - 1.0)


@dataclass(frozen=True)
class SpaceDescriptor:
    """A finite-dimensional complex normed space.

    Parameters
    ----------
    family : Family
        ``Lp``, ``WeightedL2`` or ``Schatten``.
    dim : int
        ``n`` for the sequence spaces, ``k`` for ``S_p`` on ``k x k``.
    p : float
        Exponent in ``[1, inf]``.  Fixed to 2 for ``WeightedL2``.
    weights : tuple of float, optional
        Strictly positive weights (``WeightedL2`` only);
        ``||x||^2 = sum_i w_i |x_i|^2``.
    """

    family: Family
    dim: int
    p: float = 2.0
    weights: tuple | None = None
    # space this one was dualised from; reciprocal weights do not round-trip
    # exactly in floating point, so the bidual is returned from here
    _predual: "SpaceDescriptor | None" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", _parse_exponent(self.p))
        if self.family is Family.WEIGHTED_L2:
            if self.weights is None:
                raise ValueError("WeightedL2 requires weights")
            w = tuple(float(v) for v in self.weights)
            if len(w) != self.dim:
                raise ValueError("weights must have length dim")
            if not all(v > 0 and math.isfinite(v) for v in w):
                raise ValueError("weights must be strictly positive and finite")
            object.__setattr__(self, "weights", w)
            if self.p != 2.0:
                raise ValueError("WeightedL2 has exponent 2")
        elif self.weights is not None:
            raise ValueError("weights are only allowed for WeightedL2")

    @property
    def shape(self) -> tuple:
        if self.family is Family.SCHATTEN:
            return (self.dim, self.dim)
        return (self.dim,)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def is_lattice(self) -> bool:
        return self.family is not Family.SCHATTEN

    @property
    def is_hilbert(self) -> bool:
        return self.family is Family.WEIGHTED_L2 or self.p == 2.0

    @property
    def weight_array(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(self.dim)
        return np.asarray(self.weights, dtype=float)

    def to_json(self) -> dict:
        out = {
            "family": self.family.value,
            "dim": self.dim,
            "p": "inf" if math.isinf(self.p) else self.p,
        }
        if self.weights is not None:
            out["weights"] = list(self.weights)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SpaceDescriptor":
        w = obj.get("weights")
        return cls(
            family=Family(obj["family"]),
            dim=obj["dim"],
            p=obj.get("p", 2.0),
            weights=None if w is None else tuple(w),
        )

    def __str__(self) -> str:
        ps = "inf" if math.isinf(self.p) else f"{self.p:g}"
        if self.family is Family.WEIGHTED_L2:
            return f"WeightedL2({self.dim}, w={list(self.weights)})"
        return f"{self.family.value}({self.dim}, p={ps})"


def lp(n: int, p) -> SpaceDescriptor:
    """``l_p^n``."""
    return SpaceDescriptor(Family.LP, n, p)


def weighted_l2(weights: Sequence[float]) -> SpaceDescriptor:
    """Weighted ``l_2`` with ``||x||^2 = sum_i w_i |x_i|^2``."""
    weights = tuple(float(w) for w in weights)
    return SpaceDescriptor(Family.WEIGHTED_L2, len(weights), 2.0, weights)


def schatten(k: int, p) -> SpaceDescriptor:
    """Schatten class ``S_p`` on ``k x k`` matrices."""
    return SpaceDescriptor(Family.SCHATTEN, k, p)


def _check_shape(X: SpaceDescriptor, x: np.ndarray, batched: bool = False):
    tail = x.shape[x.ndim - len(X.shape):] if x.ndim >= len(X.shape) else x.shape
    if tuple(tail) != X.shape or (not batched and x.ndim != len(X.shape)):
        raise ValueError(f"shape {x.shape} does not match {X}")


def _lp_norms(a: np.ndarray, p: float) -> np.ndarray:
    """p-norms along the last axis of a nonnegative array."""
    if math.isinf(p):
        return a.max(axis=-1)
    if p == 1.0:
        return a.sum(axis=-1)
    if p == 2.0:
        return np.sqrt((a * a).sum(axis=-1))
    m = a.max(axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    return (m[..., 0]) * ((a / safe) ** p).sum(axis=-1) ** (1.0 / p)


def norms(X: SpaceDescriptor, Y) -> np.ndarray:
    """Norms of a batch of elements stacked along leading axes."""
    Y = np.asarray(Y)
    _check_shape(X, Y, batched=True)
    if X.family is Family.SCHATTEN:
        s = np.linalg.svd(Y, compute_uv=False)
        return _lp_norms(s, X.p)
    a = np.abs(Y)
    if X.family is Family.WEIGHTED_L2:
        return np.sqrt((X.weight_array * a * a).sum(axis=-1))
    return _lp_norms(a, X.p)


def norm(X: SpaceDescriptor, x) -> float:
    """Exact norm of ``x`` in ``X``.

    Examples
    --------
    >>> norm(lp(2, 2), [3, 4])
    5.0
    """
    x = np.asarray(x)
    _check_shape(X, x)
    return float(norms(X, x))


def dual_space(X: SpaceDescriptor) -> SpaceDescriptor:
    """Dual space under the bilinear pairing."""
    if X.family is Family.WEIGHTED_L2:
        if X._predual is not None:
            return X._predual
        return SpaceDescriptor(Family.WEIGHTED_L2, X.dim, 2.0, tuple(1.0 / X.weight_array), _predual=X)
    return SpaceDescriptor(X.family, X.dim, conjugate_exponent(X.p))


def dual_norm(X: SpaceDescriptor, xi) -> float:
    """Norm of the functional ``xi`` in ``X*``."""
    return norm(dual_space(X), xi)


def pairing(xi, x) -> complex:
    """Bilinear pairing ``sum(xi * x)`` (``tr(xi^T x)`` for matrices)."""
    xi = np.asarray(xi)
    x = np.asarray(x)
    if xi.shape != x.shape:
        raise ValueError(f"shape mismatch {xi.shape} vs {x.shape}")
    return complex(np.sum(xi * x))


def _phase(y: np.ndarray) -> np.ndarray:
    a = np.abs(y)
    return np.where(a > 0, np.conj(y) / np.where(a > 0, a, 1.0), 1.0)


def norming_functional(X: SpaceDescriptor, x) -> np.ndarray:
    """Unit functional ``xi`` in ``X*`` with ``<xi, x> = ||x||``.

    For ``x = 0`` an arbitrary unit functional is returned.  Ties at
    ``p = inf`` are broken towards the first maximal coordinate.
    """
    x = np.asarray(x, dtype=complex)
    _check_shape(X, x)
    nx = norm(X, x)
    if X.family is Family.SCHATTEN:
        if nx == 0:
            xi = np.zeros(X.shape, dtype=complex)
            xi[0, 0] = 1.0
            return xi
        U, s, Vh = np.linalg.svd(x)
        p = X.p
        if math.isinf(p):
            d = (s >= s[0] * (1 - 1e-12)).astype(float)
            d /= d.sum()
        elif p == 1.0:
            d = np.ones_like(s)
        else:
            d = (s / nx) ** (p - 1.0)
        # tr(xi^T x) = ||x||  with  xi^T = V diag(d) U^*
        return (Vh.conj().T @ np.diag(d) @ U.conj().T).T
    if nx == 0:
        xi = np.zeros(X.shape, dtype=complex)
        xi[0] = math.sqrt(X.weight_array[0]) if X.family is Family.WEIGHTED_L2 else 1.0
        return xi
    if X.family is Family.WEIGHTED_L2:
        return X.weight_array * np.conj(x) / nx
    a = np.abs(x)
    ph = _phase(x)
    p = X.p
    if math.isinf(p):
        k = int(np.argmax(a))
        xi = np.zeros(X.shape, dtype=complex)
        xi[k] = ph[k]
        return xi
    if p == 1.0:
        return ph
    return (a / nx) ** (p - 1.0) * ph


def square_function_norm(X: SpaceDescriptor, xs) -> float:
    """Lattice square function ``||(sum_i |x_i|^2)^{1/2}||_X``.

    Raises
    ------
    ValueError
        For Schatten descriptors, which carry no lattice structure here.
    """
    if not X.is_lattice:
        raise ValueError("square functions need a lattice (Lp or WeightedL2)")
    xs = np.asarray(xs, dtype=complex)
    if xs.ndim == 1:
        xs = xs[None, :]
    if xs.shape[-1] != X.dim:
        raise ValueError(f"vectors of length {xs.shape[-1]} do not match {X}")
    s = np.sqrt((np.abs(xs) ** 2).sum(axis=0))
    return norm(X, s)


def random_unit_vector(X: SpaceDescriptor, seed) -> np.ndarray:
    """Deterministic random unit vector (complex Gaussian direction)."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(X.shape) + 1j * rng.standard_normal(X.shape)
    return x / norm(X, x)
