"""Select the kernel implementation at import time.

The compiled extension is preferred; setting ``PETEVT_PURE_PYTHON=1`` forces
the numpy fallback.
"""

import os

if os.environ.get("PETEVT_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        from . import _kernels_py as kernels

        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
