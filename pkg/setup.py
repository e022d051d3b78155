"""Build script: compiles the optional exact-arithmetic pivot kernel.

The package is pure Python; the Cython extension only removes interpreter
overhead from the simplex inner loop.  If Cython or a C compiler is missing
the build silently falls back to the pure-Python kernel selected at import.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/ctxcheck/_kernels_c.pyx"],
        language_level=3,
    )
except Exception:
    ext_modules = []

setup(ext_modules=ext_modules)
