"""Build script: compiles the clipping kernel extension when Cython and a C++
toolchain are available, otherwise installs the pure-Python package (the
numpy fallback kernel is selected automatically at import time)."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("FIBERTRACK_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "fibertrack._clipcore",
                    ["src/fibertrack/_clipcore.pyx"],
                    language="c++",
                    extra_compile_args=["-O3", "-std=c++11", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
