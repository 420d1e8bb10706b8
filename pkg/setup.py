import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # Pure-Python install: the package falls back to the numpy backend.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "switchdiff._kernels._core",
                ["src/switchdiff/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off: keep FP results identical to the
                # non-fused arithmetic of the numpy fallback.
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
