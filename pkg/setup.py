"""Build script: compiles the optional Cython kernel extension.

The compiled extension accelerates the hot kernels (Katz series rows,
pairwise haversine). If compilation is impossible the package still
installs and falls back to the pure NumPy/SciPy backend at import time,
so build failures here are demoted to a warning.
"""

import warnings

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if we can; otherwise install pure-Python only."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            warnings.warn(f"skipping compiled kernels ({exc}); "
                          "pure-Python backend will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"skipping {ext.name} ({exc}); "
                          "pure-Python backend will be used")


def make_extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return [], []
    exts = cythonize(
        ["src/geokatz/_kernels/_speedups.pyx"],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
    return exts, [numpy.get_include()]


extensions, include_dirs = make_extensions()

setup(
    ext_modules=extensions,
    include_dirs=include_dirs,
    cmdclass={"build_ext": OptionalBuildExt},
)
