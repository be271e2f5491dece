"""Build the optional compiled kernels; metadata lives in pyproject.toml."""

from setuptools import setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install
    ext_modules = []
else:
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("lcfactor._ckernels", ["src/lcfactor/_ckernels.pyx"], optional=True)],
        language_level=3,
    )

setup(ext_modules=ext_modules)
