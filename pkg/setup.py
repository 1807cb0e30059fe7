"""Build script: compiles the optional fast stepping kernel.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so a failed compile only costs speed.
"""
import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/ifnsim/_kernel.pyx"],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"ifnsim: skipping compiled kernel ({exc}); NumPy fallback will be used", file=sys.stderr)

setup(ext_modules=ext_modules)
