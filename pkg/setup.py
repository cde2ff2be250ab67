"""Build script: compiles the optional kernel extension.

The extension is a speedup, not a requirement.  If Cython or a C compiler is
missing, or the compile fails for any reason, the install proceeds and the
package falls back to the pure-Python kernels at import time.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools.extension import Extension
    except ImportError as exc:
        print(f"sbicover: skipping compiled kernels ({exc})", file=sys.stderr)
        return []
    ext = Extension(
        "sbicover.kernels._ckernels",
        ["src/sbicover/kernels/_ckernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level="3")


class optional_build_ext(build_ext):
    """Build the extension if possible; warn and continue if not."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"sbicover: compiled kernels unavailable ({exc}); "
                  "using pure-Python fallback", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"sbicover: failed to build {ext.name} ({exc}); "
                  "using pure-Python fallback", file=sys.stderr)


setup(ext_modules=_extensions(), cmdclass={"build_ext": optional_build_ext})
