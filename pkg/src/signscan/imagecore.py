"""Raster helpers shared by every pipeline stage.

Images are plain numpy arrays:

* RGB image   -- ``(H, W, 3)`` uint8
* gray image  -- ``(H, W)`` float64 in [0, 1]
* binary mask -- ``(H, W)`` bool

Point sets (blob pixels, edge points) are ``(N, 2)`` integer arrays of
``(x, y)`` coordinates, i.e. column first.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class Blob:
    """An 8-connected foreground component.

    ``pixels`` holds ``(x, y)`` rows; ``bbox`` is inclusive
    ``(x_min, y_min, x_max, y_max)``.
    """

    pixels: np.ndarray
    bbox: tuple[int, int, int, int]

    @classmethod
    def from_pixels(cls, pixels) -> "Blob":
        pixels = np.asarray(pixels, dtype=np.int64).reshape(-1, 2)
        if len(pixels) == 0:
            raise ValueError("a blob needs at least one pixel")
        x0, y0 = pixels.min(axis=0)
        x1, y1 = pixels.max(axis=0)
        return cls(pixels, (int(x0), int(y0), int(x1), int(y1)))

    @property
    def area(self) -> int:
        return len(self.pixels)

    @property
    def width(self) -> int:
        return self.bbox[2] - self.bbox[0] + 1

    @property
    def height(self) -> int:
        return self.bbox[3] - self.bbox[1] + 1

    def local_mask(self) -> np.ndarray:
        """Blob pixels as a bool array covering exactly the bbox."""
        out = np.zeros((self.height, self.width), dtype=bool)
        out[self.pixels[:, 1] - self.bbox[1], self.pixels[:, 0] - self.bbox[0]] = True
        return out


def connected_components(mask: np.ndarray, min_area: int = 50) -> list[Blob]:
    """8-connected foreground components with at least ``min_area`` pixels.

    Blobs come back in raster order of their first pixel.
    """
    mask = np.asarray(mask, dtype=bool)
    labels, n = ndimage.label(mask, structure=EIGHT)
    if n == 0:
        return []
    blobs = []
    for idx, sl in enumerate(ndimage.find_objects(labels), start=1):
        ys, xs = np.nonzero(labels[sl] == idx)
        if len(xs) < min_area:
            continue
        pixels = np.column_stack([xs + sl[1].start, ys + sl[0].start]).astype(np.int64)
        blobs.append(
            Blob(pixels, (sl[1].start, sl[0].start, sl[1].stop - 1, sl[0].stop - 1))
        )
    return blobs


def morph_filter(mask: np.ndarray, op: str, radius: int = 1) -> np.ndarray:
    """Binary opening or closing with a ``(2r+1)`` square element.

    Pixels outside the frame are background for erosion. For closing the
    intermediate dilation is taken on a padded canvas so a hole near the
    border is sealed the same way as one in the interior.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    mask = np.asarray(mask, dtype=bool)
    se = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
    if op == "open":
        eroded = ndimage.binary_erosion(mask, se, border_value=0)
        return ndimage.binary_dilation(eroded, se)
    if op == "close":
        padded = np.pad(mask, radius)
        dilated = ndimage.binary_dilation(padded, se)
        # the frame beyond the padding is still background, but it never
        # reaches the original area after one erosion of the same radius
        closed = ndimage.binary_erosion(dilated, se, border_value=0)
        return closed[radius:-radius, radius:-radius]
    raise ValueError(f"unknown morphology op {op!r}")


def boundary_mask(mask: np.ndarray) -> np.ndarray:
    """Foreground pixels with at least one background 8-neighbour."""
    mask = np.asarray(mask, dtype=bool)
    return mask & ~ndimage.binary_erosion(mask, EIGHT, border_value=0)


def extract_edges(mask: np.ndarray, blob: Blob) -> np.ndarray:
    """Boundary pixels of ``blob`` as an ``(N, 2)`` array of ``(x, y)``."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    x0, y0, x1, y1 = blob.bbox
    window = mask[max(y0 - 1, 0):y1 + 2, max(x0 - 1, 0):x1 + 2]
    # outside the frame counts as background
    window = np.pad(
        window,
        ((int(y0 == 0), int(y1 == h - 1)), (int(x0 == 0), int(x1 == w - 1))),
    )
    border = boundary_mask(window)
    px = blob.pixels
    keep = border[px[:, 1] - y0 + 1, px[:, 0] - x0 + 1]
    return px[keep].copy()


def read_image(path) -> np.ndarray:
    """Read a PNG or binary PPM as an ``(H, W, 3)`` uint8 array."""
    with Image.open(Path(path)) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def write_image(path, img: np.ndarray) -> None:
    Image.fromarray(np.asarray(img, dtype=np.uint8)).save(Path(path))


def write_mask(path, mask: np.ndarray) -> None:
    """Write a mask as 8-bit grayscale PNG, 0 for background, 255 for foreground."""
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8)).save(Path(path))


def read_mask(path) -> np.ndarray:
    with Image.open(Path(path)) as im:
        return np.asarray(im.convert("L")) > 127
