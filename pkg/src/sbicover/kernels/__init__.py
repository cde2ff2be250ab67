"""Simulator hot-loop kernels with interchangeable backends.

The compiled Cython backend is preferred when importable; the pure-Python
fallback is selected otherwise.  Set SBICOVER_KERNELS=py or =c to force one
(forcing `c` raises if the extension is missing).  Both backends consume
random draws identically, so results are bit-for-bit equal either way.
"""

import os

from . import pyimpl

_choice = os.environ.get("SBICOVER_KERNELS", "").strip().lower()

if _choice == "py":
    _impl = pyimpl
    BACKEND = "python"
elif _choice == "c":
    from . import _ckernels as _impl  # noqa: F401
    BACKEND = "compiled"
elif _choice == "":
    try:
        from . import _ckernels as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = pyimpl
        BACKEND = "python"
else:
    raise ValueError(f"SBICOVER_KERNELS must be 'py' or 'c', got {_choice!r}")

mg1_core = _impl.mg1_core
weinberg_core = _impl.weinberg_core
lotka_core = _impl.lotka_core
sir_core = _impl.sir_core
