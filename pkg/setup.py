"""Build script: compiles the optional trajectory kernel.

The package is fully functional without the extension (a pure-Python
fallback is selected at import time), so any failure here downgrades to
a pure build instead of aborting the install.
"""

import sys

from setuptools import Extension, setup


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("gx1cycles: Cython not available, building without the compiled kernel",
              file=sys.stderr)
        return []
    ext = Extension(
        "gx1cycles._kernel",
        sources=["src/gx1cycles/_kernel.pyx"],
        extra_compile_args=["-O3"],
    )
    try:
        return cythonize([ext], compiler_directives={"language_level": "3"})
    except Exception as exc:
        print(f"gx1cycles: kernel cythonization failed ({exc}), "
              "building without the compiled kernel", file=sys.stderr)
        return []


setup(ext_modules=extensions())
