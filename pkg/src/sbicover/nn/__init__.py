"""Minimal neural stack: MLPs with hand-written reverse mode, AdamW, and a
mixture-density head."""

from .net import init_mlp, mlp_backward, mlp_forward, mlp_forward_cached  # noqa: F401
from .optim import AdamState, adamw_step  # noqa: F401
from .train import TrainConfig, TrainingError  # noqa: F401
