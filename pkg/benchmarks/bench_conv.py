#!/usr/bin/env python3
"""Benchmark the convolution kernel backends.

Compares the compiled extension against the NumPy implementation on the
shapes that dominate training: desk-profile batches, the validation-set
forward pass, and one paper-scale layer.  Run after building the extension:

    python3 benchmarks/bench_conv.py
"""

import time

import numpy as np

from fedchan.net import kernels, kernels_np

CASES = [
    ("desk conv block, train batch", (128, 8, 4, 16), 8),
    ("desk conv block, validation batch", (960, 8, 4, 16), 8),
    ("desk input block (3 planes)", (128, 3, 4, 16), 8),
    ("paper-scale conv block, batch 8", (8, 128, 32, 128), 128),
]


def timeit(fn, min_time=0.5):
    fn()  # warm up
    start = time.perf_counter()
    n = 0
    while time.perf_counter() - start < min_time:
        fn()
        n += 1
    return (time.perf_counter() - start) / n


def main():
    if kernels.BACKEND != "compiled":
        print("compiled extension not available; benchmarking NumPy only")
    rng = np.random.default_rng(0)
    print(f"{'case':<38} {'op':<8} {'compiled':>10} {'numpy':>10} {'ratio':>7}")
    for name, xshape, filters in CASES:
        x = np.ascontiguousarray(rng.standard_normal(xshape))
        w = np.ascontiguousarray(rng.standard_normal((filters, xshape[1], 3, 3)))
        dy = np.ascontiguousarray(rng.standard_normal((xshape[0], filters) + xshape[2:]))
        ops = {
            "fwd": (lambda: kernels.conv2d_forward(x, w),
                    lambda: kernels_np.conv2d_forward(x, w)),
            "bwd_w": (lambda: kernels.conv2d_backward_weights(x, dy, 3, 3),
                      lambda: kernels_np.conv2d_backward_weights(x, dy, 3, 3)),
            "bwd_x": (lambda: kernels.conv2d_backward_input(dy, w),
                      lambda: kernels_np.conv2d_backward_input(dy, w)),
        }
        for op, (fast, slow) in ops.items():
            t_np = timeit(slow)
            if kernels.BACKEND == "compiled":
                t_cy = timeit(fast)
                print(f"{name:<38} {op:<8} {t_cy * 1e3:>8.2f}ms {t_np * 1e3:>8.2f}ms "
                      f"{t_np / t_cy:>6.2f}x")
            else:
                print(f"{name:<38} {op:<8} {'-':>10} {t_np * 1e3:>8.2f}ms {'-':>7}")


if __name__ == "__main__":
    main()
