"""Python bindings for the textsr toolkit.

Images are float arrays in [0, 1] shaped (H, W) or (H, W, C).
"""

import json

from ._core import (
    Error,
    FormatError,
    IoError,
    ParameterError,
    ShapeError,
    build_dataset,
    canny_edges,
    config_hash,
    degrade,
    manifest_stats,
    masked_edge_loss,
    normalize_transcript,
    psnr,
    read_image,
    sample_recipe,
    selftest,
    ssim,
    write_png,
)
from ._core import text_mask as _text_mask

__version__ = "0.1.0"


def text_mask(annotations, width, height):
    """Rasterize text-line quads. `annotations` are sidecar-style dicts."""
    return _text_mask(json.dumps(list(annotations)), width, height)


__all__ = [
    "Error",
    "FormatError",
    "IoError",
    "ParameterError",
    "ShapeError",
    "build_dataset",
    "canny_edges",
    "config_hash",
    "degrade",
    "manifest_stats",
    "masked_edge_loss",
    "normalize_transcript",
    "psnr",
    "read_image",
    "sample_recipe",
    "selftest",
    "ssim",
    "text_mask",
    "write_png",
]
