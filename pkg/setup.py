import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("HRV_SKIP_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "hrvkit.kernels._ckernels",
                    ["src/hrvkit/kernels/_ckernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        # No Cython or numpy at build time: ship the pure fallback only.
        ext_modules = []

setup(ext_modules=ext_modules)
