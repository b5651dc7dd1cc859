"""Build hook for the optional compiled kernel.

The package is pure Python plus one optional Cython extension holding the hot
kernels (exact integer elimination, graded polynomial term merging). If Cython
or a C compiler is unavailable the build falls through to the pure twin in
folwerk._kernel.pure; nothing else changes.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/folwerk/_kernel/_speedups.pyx"],
        language_level=3,
    )
except Exception:
    ext_modules = []

setup(ext_modules=ext_modules)
