import sys

from setuptools import Extension, setup


def extensions():
    """Compiled kernel core; falls back to the pure-NumPy backend if unavailable."""
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "tampkit.dynamics._kernels_c",
        ["src/tampkit/dynamics/_kernels_c.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    try:
        return cythonize([ext], language_level=3)
    except Exception as exc:  # pragma: no cover
        print(f"warning: skipping compiled kernels ({exc})", file=sys.stderr)
        return []


setup(ext_modules=extensions())
