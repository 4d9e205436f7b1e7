from setuptools import Extension, setup

# The compiled kernels are optional: the package runs on the pure-Python
# twin when Cython (or a C compiler) is unavailable.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "trendagg._kernels_c",
                ["src/trendagg/_kernels_c.pyx"],
                extra_compile_args=["-O2"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
