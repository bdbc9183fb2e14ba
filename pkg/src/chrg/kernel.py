"""Runtime kernel selection.

The engine lives in chrg.core (pure Python).  When the package was built
with Cython available, a compiled twin of the same source exists as
chrg._core_c; it is picked by default.  Set CHRG_KERNEL=pure (or
compiled) to force one side — the test suite uses this to check parity.
"""

from __future__ import annotations

import os

_choice = os.environ.get("CHRG_KERNEL", "auto").strip().lower()

if _choice in ("auto", "", "compiled", "c"):
    try:
        from chrg import _core_c as _impl
        KERNEL_NAME = "compiled"
    except ImportError:
        if _choice in ("compiled", "c"):
            raise ImportError(
                "CHRG_KERNEL=compiled but the compiled kernel is not built")
        from chrg import core as _impl
        KERNEL_NAME = "pure"
elif _choice in ("pure", "py", "python"):
    from chrg import core as _impl
    KERNEL_NAME = "pure"
else:
    raise ImportError("unknown CHRG_KERNEL value %r" % _choice)

IMPL = _impl

# Re-export the kernel surface under the selected implementation.
for _name in dir(_impl):
    if not _name.startswith("__"):
        globals()[_name] = getattr(_impl, _name)
del _name
