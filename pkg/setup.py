"""Build script: compiles the optional Cython kernel extension.

Set NETMP_PURE=1 to skip the extension entirely; the package then runs on
the numpy fallback kernels selected at import time.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("NETMP_PURE") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "netmp._kernels",
                    ["src/netmp/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
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
    except ImportError:
        # No Cython available: ship pure. The import-time selector in
        # netmp.kernels falls back to the numpy implementation.
        ext_modules = []

setup(ext_modules=ext_modules)
