"""Build script for the compiled interpolation kernels.

The extension is optional: if Cython or a C compiler is missing the package
installs anyway and falls back to the numpy kernels at import time.
Build in place for development with

    python setup.py build_ext --inplace
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "rvm._kernels._core",
                sources=["src/rvm/_kernels/_core.pyx"],
                # -ffp-contract=off keeps the compiled kernels bit-identical
                # to the numpy fallback (no FMA contraction).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
