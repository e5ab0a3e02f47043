"""Build script for the compiled ray-casting core.

The extension is optional: if Cython or a C compiler is missing the install
still succeeds and the package falls back to the pure-NumPy kernels.
"""

from setuptools import setup, Extension

try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "softshadow._kernels._core",
                ["src/softshadow/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
