"""Build script: compiles the optional Cython jet kernel.

The package works without the extension (a pure-Python kernel is selected
at import time), so a missing Cython/C toolchain only costs speed.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("apaprgeo._jetcore", ["src/apaprgeo/_jetcore.pyx"])],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
