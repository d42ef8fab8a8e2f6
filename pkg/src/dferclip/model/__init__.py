from .checkpoint import load_checkpoint, save_checkpoint
from .config import ModelConfig
from .encoders import ImageEncoder, PromptLearner, TemporalModel, TextEncoder, patchify
from .network import DFERCLIP, Prediction, predict
from .nn import Module, Parameter

__all__ = [
    "DFERCLIP",
    "ImageEncoder",
    "ModelConfig",
    "Module",
    "Parameter",
    "Prediction",
    "PromptLearner",
    "TemporalModel",
    "TextEncoder",
    "load_checkpoint",
    "patchify",
    "predict",
    "save_checkpoint",
]
