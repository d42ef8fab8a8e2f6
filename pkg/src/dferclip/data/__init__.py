from .augment import AUGMENT_FLAGS, AugmentParams, apply_params, augment, draw_params
from .clips import (
    N_FOLDS,
    ClipRef,
    DatasetManifest,
    VideoClip,
    load_clip,
    load_dataset,
    load_manifest,
    save_clip,
    save_manifest,
)
from .sampling import SAMPLING_MODES, center_indices, sample_frames, segment_indices
from .synthetic import SyntheticSpec, class_template, generate_synthetic, template_oracle, templates

__all__ = [
    "AUGMENT_FLAGS",
    "N_FOLDS",
    "SAMPLING_MODES",
    "AugmentParams",
    "ClipRef",
    "DatasetManifest",
    "SyntheticSpec",
    "VideoClip",
    "apply_params",
    "augment",
    "center_indices",
    "class_template",
    "draw_params",
    "generate_synthetic",
    "load_clip",
    "load_dataset",
    "load_manifest",
    "sample_frames",
    "save_clip",
    "save_manifest",
    "segment_indices",
    "template_oracle",
    "templates",
]
