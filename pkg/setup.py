"""Build script: optionally compiles the runtime kernel with Cython.

The package is pure Python.  When Cython is available at build time we
additionally compile a twin of chrg/core.py (pure-Python mode) under the
name chrg._core_c; chrg.kernel picks it up at import when present.  If
the compilation fails for any reason the build falls through to the pure
package so `pip install` never breaks on a missing toolchain.
"""

import os
import shutil

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    here = os.path.dirname(os.path.abspath(__file__))
    os.chdir(here)
    src = os.path.join("src", "chrg", "core.py")
    twin = os.path.join("src", "chrg", "_core_c.py")
    if os.path.exists(src):
        shutil.copyfile(src, twin)
        ext_modules = cythonize(
            [twin],
            language_level=3,
            compiler_directives={"binding": True},
            quiet=True,
        )
except Exception:
    ext_modules = []

setup(ext_modules=ext_modules)
