from setuptools import setup
from setuptools.extension import Extension

import numpy

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "airsynth.render._raster",
                ["src/airsynth/render/_raster.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-Python kernel is selected at import time when the extension is absent.
    extensions = []

setup(ext_modules=extensions)
