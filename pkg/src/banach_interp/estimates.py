"""Result containers shared by the numerical modules."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["NormEstimate", "ConstantEstimate", "to_jsonable", "complex_from_json"]


def to_jsonable(obj: Any):
    """Convert numpy values, complex numbers and witnesses to plain JSON types.

    Complex arrays become ``{"re": ..., "im": ...}``; objects with a
    ``to_json`` method are delegated to it; infinities become ``"inf"``.
    """
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        if math.isnan(f):
            return "nan"
        return f
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return str(obj)


def complex_from_json(obj) -> np.ndarray:
    """Inverse of :func:`to_jsonable` for arrays (plain nested lists allowed)."""
    if isinstance(obj, dict):
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        return re + 1j * im
    arr = np.asarray(obj)
    if arr.dtype.kind in "fiu":
        return arr.astype(complex)
    return arr.astype(complex)


@dataclass
class NormEstimate:
    """Certified interval ``lower <= norm <= upper`` with witnesses.

    Attributes
    ----------
    lower, upper : float
        Bounds; ``upper`` may be ``inf`` when only a lower bound was asked for.
    lower_witness, upper_witness : object
        Dual element (or certificate) reproducing ``lower``; decomposition,
        factorization or analytic certificate reproducing ``upper``.
    status : str
        ``"exact"``, ``"certified"`` or ``"heuristic"`` (an estimate whose
        bound relies on a nonconvex search).
    """

    lower: float
    upper: float
    lower_witness: Any = None
    upper_witness: Any = None
    status: str = "certified"
    theta: float | None = None
    degree: int | None = None
    grid: int | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lower = float(self.lower)
        self.upper = float(self.upper)

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def to_json(self) -> dict:
        return {
            "lower": to_jsonable(self.lower),
            "upper": to_jsonable(self.upper),
            "theta": self.theta,
            "degree": self.degree,
            "grid": self.grid,
            "status": self.status,
            "witnesses": {
                "lower": to_jsonable(self.lower_witness),
                "upper": to_jsonable(self.upper_witness),
            },
            "info": to_jsonable(self.info),
        }


@dataclass
class ConstantEstimate:
    """Estimate of a geometric constant.

    ``value_lower`` is a lower bound unless ``method == "closed_form"``, in
    which case it is the exact value.
    """

    value_lower: float
    method: str
    trials: int = 0
    std_error: float = 0.0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("closed_form", "monte_carlo", "grid"):
            raise ValueError(f"unknown method {self.method}")

    @property
    def is_exact(self) -> bool:
        return self.method == "closed_form"

    def to_json(self) -> dict:
        return {
            "value_lower": self.value_lower,
            "method": self.method,
            "trials": self.trials,
            "std_error": self.std_error,
            "info": to_jsonable(self.info),
        }
