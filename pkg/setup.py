import os

from setuptools import setup

ext_modules = []
if not os.environ.get("HRRIS_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/hrris/kernels/_sweep_cy.pyx"],
            language_level=3,
        )
    except ImportError:
        pass  # pure-Python install; the kernel falls back at import time

setup(ext_modules=ext_modules)
