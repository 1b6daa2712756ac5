"""Build script.

The package works without compilation (pure NumPy kernels). When a C
toolchain, Cython, and the scipy BLAS/LAPACK headers are available, an
accelerated extension `spinphonon._backends._core` is built; import-time
selection in `spinphonon._backends` picks it up automatically. Set
SPINPHONON_NO_EXT=1 to skip the extension entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


def _extensions():
    if os.environ.get("SPINPHONON_NO_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "spinphonon._backends._core",
        sources=["src/spinphonon/_backends/_core.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


class optional_build_ext(build_ext):
    """Never fail the install over the accelerator; fall back to pure NumPy."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"spinphonon: skipping compiled core ({exc}); "
                  "pure NumPy backend will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"spinphonon: failed to build {ext.name} ({exc}); "
                  "pure NumPy backend will be used")


setup(ext_modules=_extensions(), cmdclass={"build_ext": optional_build_ext})
