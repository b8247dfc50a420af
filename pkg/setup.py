"""Build script for the compiled flow kernel.

The package works without the extension (a pure-Python kernel is selected at
import time), so compilation failures degrade gracefully instead of blocking
installation.
"""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None and os.path.exists("src/netoff/_ssp.pyx"):
    extensions = cythonize(
        [
            Extension(
                "netoff._ssp",
                ["src/netoff/_ssp.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )
else:
    extensions = []

setup(ext_modules=extensions)
