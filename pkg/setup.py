"""Build the optional Cython kernels; the package imports a pure-Python
fallback when the extension is unavailable."""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("JAMSENSE_NO_EXT", "") in ("", "0"):
    try:
        import numpy as np  # noqa: F401
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("jamsense.wishart._kernels", ["src/jamsense/wishart/_kernels.pyx"],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
