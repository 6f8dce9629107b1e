"""Distractor generation for reading-comprehension MCQs.

Hierarchical encoder with article-question co-attention, hierarchical
attention decoding, joint NLL + semantic-similarity training, diverse
beam-search inference, and BLEU/ROUGE evaluation, on top of a small
reverse-mode autodiff core.
"""

from .kernels import active_lane
from .tensor import Parameter, Tensor, backward, no_grad, set_default_dtype

__version__ = "0.1.0"

__all__ = [
    "Parameter",
    "Tensor",
    "backward",
    "no_grad",
    "set_default_dtype",
    "active_lane",
    "__version__",
]
