"""NumPy implementation of the 2-D convolution kernels.

Zero padding, unit stride, odd kernels only (spatial dims are preserved).
Used as the fallback when the compiled extension is unavailable.
"""

import numpy as np


def _windows(x, kh, kw):
    ph, pw = kh // 2, kw // 2
    xp = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)))
    # (B, C, H, W, kh, kw)
    return np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(2, 3))


def conv2d_forward(x, w):
    """x (B, C, H, W), w (F, C, kh, kw) -> y (B, F, H, W)."""
    win = _windows(x, w.shape[2], w.shape[3])
    return np.einsum("bchwij,fcij->bfhw", win, w, optimize=True)


def conv2d_backward_weights(x, dy, kh, kw):
    """Gradient w.r.t. kernels: x (B, C, H, W), dy (B, F, H, W) -> (F, C, kh, kw)."""
    win = _windows(x, kh, kw)
    return np.einsum("bchwij,bfhw->fcij", win, dy, optimize=True)


def conv2d_backward_input(dy, w):
    """Gradient w.r.t. the input: correlation of dy with the flipped kernels."""
    win = _windows(dy, w.shape[2], w.shape[3])
    w_flip = w[:, :, ::-1, ::-1]
    return np.einsum("bfhwij,fcij->bchw", win, w_flip, optimize=True)
