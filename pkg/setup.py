"""Build script for the compiled time-stepping kernel.

The kernel is optional at runtime: if the extension fails to import, the
package falls back to the pure-numpy implementation (see
``shearctl._kernels``).
"""

from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "shearctl._kernels._newmark_c",
        ["src/shearctl/_kernels/_newmark_c.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
