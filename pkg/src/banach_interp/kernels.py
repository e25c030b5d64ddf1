"""Kernel dispatch: compiled Cython core when available, numpy otherwise.

Set ``BANACH_INTERP_PURE_PYTHON=1`` to force the numpy implementations.
``BACKEND`` reports which one is active.
"""
from __future__ import annotations

import os

from . import _pykernels

_NAMES = ("lp_norming", "lp_smooth", "lp_opnorm_batch", "sphere_grid_max2", "gaussian_sq_norms")

_impl = _pykernels
BACKEND = "python"
if os.environ.get("BANACH_INTERP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pykernels

lp_norming = _impl.lp_norming
lp_smooth = _impl.lp_smooth
lp_opnorm_batch = _impl.lp_opnorm_batch
sphere_grid_max2 = _impl.sphere_grid_max2
gaussian_sq_norms = _impl.gaussian_sq_norms

__all__ = list(_NAMES) + ["BACKEND"]
