import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("DARKTHERMO_NO_EXT", "").strip() in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        openmp = [] if os.environ.get("DARKTHERMO_NO_OPENMP") else ["-fopenmp"]
        ext_modules = cythonize(
            Extension(
                "darkthermo._kernels",
                ["src/darkthermo/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"] + openmp,
                extra_link_args=openmp,
            ),
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
