"""Hot-loop kernels.

The compiled extension is used when it was built; otherwise the NumPy
fallback is imported. Set ``CYCLONE_EYE_PURE_PYTHON=1`` to force the
fallback.
"""
import os

from . import _pure

if os.environ.get("CYCLONE_EYE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pure
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND
aggregate = _impl.aggregate
coa = _impl.coa
aggregate_coa_batch = _impl.aggregate_coa_batch
erode = _impl.erode
dilate = _impl.dilate
mass_moments = _impl.mass_moments


def available_backends():
    """Map backend name to kernel module for every importable backend."""
    found = {"python": _pure}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        found["cython"] = _ckernels
    return found
