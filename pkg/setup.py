"""Build the optional compiled kernels.

The package is fully functional without them: ``admissibility.kernels``
falls back to the pure-Python implementations when the extension is absent.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("ADMISSIBILITY_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "admissibility._ckernels",
                    ["src/admissibility/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )

setup(ext_modules=ext_modules)
