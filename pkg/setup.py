"""Build script: compiles the optional Cython integrator kernels.

The package works without the extension (a pure-Python backend with the
same semantics is selected at import time), so a failed compile only
costs speed.  Set PHASETIP_NO_EXT=1 to skip the extension build.
"""

import os

from setuptools import Extension, setup

_PYX = "src/phasetip/_kernels/_fast.pyx"

ext_modules = []
if not os.environ.get("PHASETIP_NO_EXT") and os.path.exists(_PYX):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "phasetip._kernels._fast",
                    [_PYX],
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
