# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled 2-D convolution kernels: zero padding, unit stride, odd kernels.

Each kernel tap is applied as a scalar times a shifted plane of a padded
buffer, so the innermost loop runs over contiguous memory.  Loops are serial
with a fixed accumulation order, keeping results reproducible independent of
thread settings.
"""

import numpy as np


def conv2d_forward(double[:, :, :, ::1] x, double[:, :, :, ::1] w):
    cdef Py_ssize_t B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3]
    cdef Py_ssize_t F = w.shape[0], kh = w.shape[2], kw = w.shape[3]
    cdef Py_ssize_t ph = kh // 2, pw = kw // 2
    xpad_arr = np.zeros((B, C, H + 2 * ph, W + 2 * pw))
    xpad_arr[:, :, ph:ph + H, pw:pw + W] = x
    cdef double[:, :, :, ::1] xpad = xpad_arr
    out = np.zeros((B, F, H, W))
    cdef double[:, :, :, ::1] y = out
    cdef Py_ssize_t b, f, c, i, j, u, v
    cdef double wv
    with nogil:
        for b in range(B):
            for f in range(F):
                for c in range(C):
                    for u in range(kh):
                        for v in range(kw):
                            wv = w[f, c, u, v]
                            if wv == 0.0:
                                continue
                            for i in range(H):
                                for j in range(W):
                                    y[b, f, i, j] += wv * xpad[b, c, i + u, j + v]
    return out


def conv2d_backward_weights(double[:, :, :, ::1] x, double[:, :, :, ::1] dy,
                            Py_ssize_t kh, Py_ssize_t kw):
    cdef Py_ssize_t B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3]
    cdef Py_ssize_t F = dy.shape[1]
    cdef Py_ssize_t ph = kh // 2, pw = kw // 2
    xpad_arr = np.zeros((B, C, H + 2 * ph, W + 2 * pw))
    xpad_arr[:, :, ph:ph + H, pw:pw + W] = x
    cdef double[:, :, :, ::1] xpad = xpad_arr
    out = np.zeros((F, C, kh, kw))
    cdef double[:, :, :, ::1] dw = out
    cdef Py_ssize_t b, f, c, i, j, u, v
    cdef double acc
    with nogil:
        for f in range(F):
            for c in range(C):
                for u in range(kh):
                    for v in range(kw):
                        acc = 0.0
                        for b in range(B):
                            for i in range(H):
                                for j in range(W):
                                    acc += xpad[b, c, i + u, j + v] * dy[b, f, i, j]
                        dw[f, c, u, v] = acc
    return out


def conv2d_backward_input(double[:, :, :, ::1] dy, double[:, :, :, ::1] w):
    cdef Py_ssize_t B = dy.shape[0], F = dy.shape[1], H = dy.shape[2], W = dy.shape[3]
    cdef Py_ssize_t C = w.shape[1], kh = w.shape[2], kw = w.shape[3]
    cdef Py_ssize_t ph = kh // 2, pw = kw // 2
    pad_arr = np.zeros((B, C, H + 2 * ph, W + 2 * pw))
    cdef double[:, :, :, ::1] dxpad = pad_arr
    cdef Py_ssize_t b, f, c, i, j, u, v
    cdef double wv
    with nogil:
        for b in range(B):
            for c in range(C):
                for f in range(F):
                    for u in range(kh):
                        for v in range(kw):
                            wv = w[f, c, u, v]
                            if wv == 0.0:
                                continue
                            for i in range(H):
                                for j in range(W):
                                    dxpad[b, c, i + u, j + v] += wv * dy[b, f, i, j]
    return pad_arr[:, :, ph:ph + H, pw:pw + W].copy()
