from setuptools import Extension, setup

# The compiled kernels are optional: srgforge.kernels falls back to the pure
# Python implementations when the extension is absent.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "srgforge._kernels",
                ["src/srgforge/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
