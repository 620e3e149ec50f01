"""Build script for the optional compiled kernels.

The package works without the extension; ``lipslr._kernels`` falls back
to the pure-Python implementation when the compiled module is missing.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("LIPSLR_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:  # build without the accelerated core
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "lipslr._kernels._native",
                    ["src/lipslr/_kernels/_native.pyx"],
                    include_dirs=[np.get_include()],
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

setup(ext_modules=ext_modules)
