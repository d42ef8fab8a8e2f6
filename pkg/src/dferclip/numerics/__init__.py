from .functional import (
    causal_mask,
    cosine_logits,
    cross_entropy,
    gelu,
    l2_normalize,
    layer_norm,
    linear,
    log_softmax,
    multi_head_attention,
    scaled_dot_product_attention,
    softmax,
)
from .gradcheck import GradCheckReport, finite_difference_check
from .tensor import (
    ComputationTape,
    Tensor,
    backward,
    concat,
    get_tape,
    is_grad_enabled,
    matmul,
    no_grad,
    stack,
    tensor,
)

__all__ = [
    "ComputationTape",
    "GradCheckReport",
    "Tensor",
    "backward",
    "causal_mask",
    "concat",
    "cosine_logits",
    "cross_entropy",
    "finite_difference_check",
    "gelu",
    "get_tape",
    "is_grad_enabled",
    "l2_normalize",
    "layer_norm",
    "linear",
    "log_softmax",
    "matmul",
    "multi_head_attention",
    "no_grad",
    "scaled_dot_product_attention",
    "softmax",
    "stack",
    "tensor",
]
