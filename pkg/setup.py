"""Builds the optional compiled kernel core.

If Cython or a C compiler is missing, the package still installs and runs on
the numpy fallback (``cyclic_reduction._pykernels``).
"""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"warning: compiled kernels not built ({exc}); using numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: failed to build {ext.name} ({exc}); using numpy fallback")


def extensions():
    if os.environ.get("CYCLIC_REDUCTION_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    ext = Extension(
        "cyclic_reduction._ckernels",
        ["src/cyclic_reduction/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # no FMA contraction or fast-math: the evaluation order is part of the contract
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    try:
        return cythonize([ext], compiler_directives={"language_level": "3"})
    except Exception as exc:  # noqa: BLE001
        print(f"warning: cythonize failed ({exc}); using numpy fallback")
        return []


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
