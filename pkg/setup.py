"""Build script: compiles the optional Cython kernel core.

The package works without the extension (a pure-Python fallback with the
same API is selected at import time), so a failed compile only costs speed.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("GSQG_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize
        import numpy as np

        ext = Extension(
            "gsqg._core",
            ["src/gsqg/_core.pyx"],
            include_dirs=[np.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], language_level=3)
    except Exception as exc:  # pragma: no cover - build-environment dependent
        print(f"gsqg: skipping compiled kernels ({exc}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
