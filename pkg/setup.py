"""Build script: compiles the exact-transport simplex kernel when possible.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed compile only costs speed.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "topotrack.transport._simplex",
                ["src/topotrack/transport/_simplex.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3str",
    )

setup(ext_modules=ext_modules)
