"""Build the optional compiled core.

The extension is optional: when Cython or a C compiler is unavailable the
package installs without it and ``hypercross.kernels`` falls back to the
numpy implementations in ``_core_py``.
"""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - depends on toolchain
            print(f"warning: compiled core not built ({exc}); using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover
            print(f"warning: failed to build {ext.name} ({exc})")


def extensions():
    if os.environ.get("HYPERCROSS_NO_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        "src/hypercross/_core.pyx",
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
        quiet=True,
    ), numpy.get_include()


exts = extensions()
if exts:
    modules, include = exts
    for m in modules:
        m.include_dirs.append(include)
else:
    modules = []

setup(ext_modules=modules, cmdclass={"build_ext": OptionalBuildExt})
