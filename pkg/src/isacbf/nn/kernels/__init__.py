"""Kernel backend selection: compiled extension when available, numpy otherwise.

Set ISACBF_PURE_PYTHON=1 to force the numpy fallback.
"""
import os

if os.environ.get("ISACBF_PURE_PYTHON"):
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykernels as _impl

BACKEND = _impl.BACKEND
conv2d3x3_same_fwd = _impl.conv2d3x3_same_fwd
conv2d3x3_same_bwd = _impl.conv2d3x3_same_bwd
maxpool2x2_fwd = _impl.maxpool2x2_fwd
maxpool2x2_bwd = _impl.maxpool2x2_bwd


def get_backend() -> str:
    return BACKEND
