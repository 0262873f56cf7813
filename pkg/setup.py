"""Build script for the optional compiled kernel core.

The package is fully functional without the extension: animo._kernels
falls back to the pure-Python implementation when the compiled module
is absent (or when ANIMO_PURE_PYTHON=1). Building here just makes the
hot per-sample loops (EMA, banding, change scans) fast.

Metadata lives in pyproject.toml; it is repeated here only so that
legacy installers (setuptools < 61, which ignore [project]) still
produce a working install.
"""

from setuptools import find_packages, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/animo/_kernels/_core.pyx",
        compiler_directives={"language_level": "3"},
    )
    include_dirs = [numpy.get_include()]
except ImportError:
    ext_modules = []
    include_dirs = []

setup(
    name="animo",
    version="0.1.0",
    package_dir={"": "src"},
    packages=find_packages("src"),
    package_data={"animo": ["data/*.jsonl"]},
    install_requires=["numpy>=1.24", "websockets>=12"],
    entry_points={"console_scripts": ["animo = animo.cli:main"]},
    ext_modules=ext_modules,
    include_dirs=include_dirs,
)
