"""Build hook for the optional compiled stencil core.

The package is fully functional without the extension (a numpy fallback is
selected at import time); the extension is attempted whenever Cython and a C
compiler are available.
"""
from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "landauspec._stencil",
                ["src/landauspec/_stencil.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
