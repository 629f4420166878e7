import sys

from setuptools import Extension, setup

# The compiled kernel is optional: everything falls back to the numpy
# reference implementation in pinyintypo.kernels.reference when the
# extension is unavailable (see pinyintypo/kernels/__init__.py).
try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "pinyintypo.kernels._core",
                ["src/pinyintypo/kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )
else:
    print("Cython not found; building without the compiled kernel.", file=sys.stderr)

setup(ext_modules=ext_modules)
