"""Select the numerical core at import time.

The compiled Cython extension is preferred; the NumPy implementation is used
when the extension is missing or when ``BESSELHEAT_BACKEND=python`` is set.
"""

import os

_requested = os.environ.get("BESSELHEAT_BACKEND", "auto").lower()

if _requested == "python":
    from . import _pycore as core
else:
    try:
        from . import _ccore as core
    except ImportError:  # extension not built
        if _requested == "cython":
            raise
        from . import _pycore as core

BACKEND = core.BACKEND
