import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("PETEVT_NO_EXTENSION"):
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "petevt._kernels",
                    ["src/petevt/_kernels.pyx", "src/petevt/_kernels_impl.c"],
                    include_dirs=[numpy.get_include(), "src/petevt"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3", "-fno-math-errno", "-fno-trapping-math", "-fopenmp-simd"],
                    libraries=["mvec", "m"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
