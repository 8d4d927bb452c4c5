"""Convolution kernel backend selection.

Prefers the compiled extension when it was built; falls back to the NumPy
implementation otherwise.  Set FEDCHAN_FORCE_NUMPY=1 to force the fallback
(used by the benchmark to compare both).
"""

import os

from . import kernels_np

if os.environ.get("FEDCHAN_FORCE_NUMPY") == "1":
    _impl = kernels_np
    BACKEND = "numpy"
else:
    try:
        from . import _convcore as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = kernels_np
        BACKEND = "numpy"

conv2d_forward = _impl.conv2d_forward
conv2d_backward_weights = _impl.conv2d_backward_weights
conv2d_backward_input = _impl.conv2d_backward_input
