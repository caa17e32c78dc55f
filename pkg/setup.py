import os

from setuptools import setup

# The compiled kernel is optional: without Cython (or with the env override
# below) the package installs pure-Python and selects the numpy fallback at
# import time.
ext_modules = []
if os.environ.get("MISMATCH_QPT_NO_EXTENSION") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "mismatch_qpt._core",
                    ["src/mismatch_qpt/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
