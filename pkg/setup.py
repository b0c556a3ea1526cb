from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("pinv._speedups", ["src/pinv/_speedups.pyx"])],
        language_level="3",
    )
except ImportError:
    # The package works without the compiled kernel; pinv.kernel falls
    # back to the pure-Python implementation at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
