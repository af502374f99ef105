import os

import numpy as np
from setuptools import Extension, setup

# Building the compiled kernel is optional; the package falls back to numpy.
ext_modules = []
if os.environ.get("FLQKD_NO_EXT") != "1":
    from Cython.Build import cythonize

    npy_random_lib = os.path.join(np.get_include(), "..", "..", "random", "lib")
    ext_modules = cythonize(
        [
            Extension(
                "flqkd._kernel",
                ["src/flqkd/_kernel.pyx"],
                include_dirs=[np.get_include()],
                library_dirs=[npy_random_lib],
                libraries=["npyrandom"],
                extra_compile_args=["-O3", "-fno-fast-math", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
