from .kernels import BACKEND
from .model import (
    NORM_EPS,
    DropoutMask,
    NetworkSpec,
    backward,
    flatten,
    forward,
    init_params,
    loss,
    param_count_actual,
    param_layout,
    param_shapes,
    predict,
    samples_to_arrays,
    sgd_step,
    unflatten,
)

__all__ = [
    "BACKEND", "NORM_EPS", "DropoutMask", "NetworkSpec", "backward",
    "flatten", "forward", "init_params", "loss", "param_count_actual",
    "param_layout", "param_shapes", "predict", "samples_to_arrays",
    "sgd_step", "unflatten",
]
