"""Build the optional compiled kernels; the package works without them."""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - fallback kernels only
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "meshfwd.kernels._ckernels",
                ["src/meshfwd/kernels/_ckernels.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
