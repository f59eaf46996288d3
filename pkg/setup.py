"""Build script: compiles the enumeration kernel when Cython is available.

The package is fully functional without the extension; ``sheafkit.kernel``
falls back to the pure-Python enumerator at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "sheafkit._natcore",
                ["src/sheafkit/_natcore.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
