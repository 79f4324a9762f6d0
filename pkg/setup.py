import os

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# Bit-for-bit agreement with the numpy fallback needs strict IEEE arithmetic:
# no fused multiply-add contraction, no fast-math.
extensions = [
    Extension(
        "scienet._kernel",
        ["src/scienet/_kernel.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
        quiet=True,
    )
    if not os.environ.get("SCIENET_NO_EXT")
    else [],
)
