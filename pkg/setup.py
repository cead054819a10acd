import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("RVLINE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("rvline._simplex_cy", ["src/rvline/_simplex_cy.pyx"])],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # Pure-Python kernel is selected at import when the extension is absent.
        ext_modules = []

setup(ext_modules=ext_modules)
