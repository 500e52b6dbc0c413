"""Build script for the optional Metropolis-chain C extension.

The package works without the extension (a pure numpy fallback is picked
at import time), so the build degrades gracefully when Cython or a C
compiler is missing:

    python setup.py build_ext --inplace
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = cythonize(
        [
            Extension(
                "tensorgrid._mc_kernel",
                ["src/tensorgrid/_mc_kernel.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
