"""Colour segmentation: red/blue enhancement, global adaptive threshold, cleanup."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .imagecore import Blob, connected_components, morph_filter


class Channel(enum.Enum):
    RED = "red"
    BLUE = "blue"


@dataclass(frozen=True)
class SegmentationConfig:
    alpha: float = 4.0
    morph_radius: int = 1
    min_area: int = 50

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.morph_radius < 1:
            raise ValueError("morph_radius must be >= 1")
        if self.min_area < 1:
            raise ValueError("min_area must be >= 1")


def enhance_color(img: np.ndarray, channel: Channel | str) -> np.ndarray:
    """Per-pixel chromatic evidence for the given channel.

    Red:  max(0, min(R - G, R - B) / S)
    Blue: max(0, min(B - G, B - R) / S)

    with S = R + G + B. Pure black (S = 0) maps to 0.
    """
    channel = Channel(channel)
    rgb = np.asarray(img, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    s = r + g + b
    if channel is Channel.RED:
        num = np.minimum(r - g, r - b)
    else:
        num = np.minimum(b - g, b - r)
    out = np.zeros_like(s)
    np.divide(num, s, out=out, where=s > 0)
    return np.maximum(out, 0.0)


def adaptive_threshold(gray: np.ndarray, alpha: float = 4.0) -> np.ndarray:
    """Foreground where ``gray > mean + alpha * std`` (population std)."""
    gray = np.asarray(gray, dtype=np.float64)
    t = gray.mean() + alpha * gray.std()
    return gray > t


def segment_mask(img: np.ndarray, channel: Channel | str,
                 cfg: SegmentationConfig = SegmentationConfig()) -> np.ndarray:
    """Cleaned binary ROI mask for one channel (before component extraction)."""
    mask = adaptive_threshold(enhance_color(img, channel), cfg.alpha)
    mask = morph_filter(mask, "open", cfg.morph_radius)
    return morph_filter(mask, "close", cfg.morph_radius)


def segment(img: np.ndarray, channel: Channel | str,
            cfg: SegmentationConfig = SegmentationConfig()) -> list[Blob]:
    return connected_components(segment_mask(img, channel, cfg), cfg.min_area)
