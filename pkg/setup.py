"""Build script for the optional Cython kernels.

If Cython or a C compiler is missing the package still installs and
runs on the pure-Python fallback in flk._fallback.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("FLK_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "flk._kernels",
                    ["src/flk/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O2", "-fno-fast-math"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
