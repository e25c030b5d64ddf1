"""Build script for the optional Cython kernels.

The extension is marked optional: when Cython or a C compiler is missing the
package still installs and falls back to the numpy kernels at import time.
"""
from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "banach_interp._ckernels",
                ["src/banach_interp/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )
except Exception as exc:  # missing Cython/numpy or a compile error
    print(f"banach_interp: building without the compiled kernels ({exc})")
    ext_modules = []

setup(ext_modules=ext_modules)
