"""Build script: compiles the optional fast kernel extension.

The package is fully functional without the extension (a numpy
implementation with identical semantics is selected at import time),
so a failed compile only costs speed.
"""

import sys

from setuptools import Extension, setup


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        print("glrtlab: Cython/numpy unavailable at build time; "
              "skipping the compiled kernel (pure-python fallback will be used)",
              file=sys.stderr)
        return []
    ext = Extension(
        "glrtlab._fastkern",
        ["src/glrtlab/_fastkern.pyx"],
        include_dirs=[numpy.get_include()],
        # no -ffast-math: kernels must keep strict IEEE semantics so both
        # backends produce identical random streams
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
