"""Build script for the compiled kernel core.

The package works without the extension (a pure NumPy fallback is selected
at import time), but the compiled core is much faster for Matern Gram
assembly, so we build it whenever Cython and a C compiler are available.
"""

from setuptools import Extension, setup

import numpy
from Cython.Build import cythonize

extensions = [
    Extension(
        "specshift._ckernels",
        ["src/specshift/_ckernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
