"""Build the optional Cython GF(2) kernel.

The package works without it: ``cubicloc.gf2.backend`` falls back to a
numpy implementation when the extension is missing.
"""
import os

from setuptools import Extension, setup


def _extensions():
    if os.environ.get("CUBICLOC_NO_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "cubicloc.gf2._kernels",
        ["src/cubicloc/gf2/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
