"""Reversible watermarking of 8-bit grayscale video by prediction-error
expansion with an adaptive least-squares spatiotemporal predictor."""

from .codec_pipeline import (
    EmbedReport,
    SidecarFile,
    SidecarRecord,
    embed_frame,
    embed_sequence,
    extract_frame,
    extract_sequence,
)
from .metrics import bpp, capacity_distortion_sweep, psnr
from .video_model import Frame, FrameSequence, ParitySet, PixelCoord, WatermarkLogo

__all__ = [
    "EmbedReport",
    "Frame",
    "FrameSequence",
    "ParitySet",
    "PixelCoord",
    "SidecarFile",
    "SidecarRecord",
    "WatermarkLogo",
    "bpp",
    "capacity_distortion_sweep",
    "embed_frame",
    "embed_sequence",
    "extract_frame",
    "extract_sequence",
    "psnr",
]
