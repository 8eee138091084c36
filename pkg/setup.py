import os

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize
except ImportError:  # build without the compiled core; the NumPy fallback is used
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "fgcoupled._kernels._core",
                ["src/fgcoupled/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # no FMA contraction or reassociation: results must match the fallback bit for bit
                extra_compile_args=["-O3", "-ffp-contract=off", "-fno-fast-math"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

if os.environ.get("FGCOUPLED_NO_EXT"):
    ext_modules = []

setup(ext_modules=ext_modules)
