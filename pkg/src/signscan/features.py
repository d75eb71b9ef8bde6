"""Texture and moment descriptors of a detected blob.

A blob is resampled to a 32x32 binary patch. Four statistics of its
co-occurrence matrix and the magnitudes of two pseudo-Zernike moments form
a six-value descriptor.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from .imagecore import Blob

PATCH = 32
DEFAULT_OFFSETS = ((1, 0), (0, 1), (1, 1), (1, -1))
FEATURE_NAMES = ("hom", "corr", "var", "diff_var", "z00", "z10")


class InvalidIndices(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    hom: float
    corr: float
    var: float
    diff_var: float
    z00_mag: float
    z10_mag: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)


def resize_binary(mask: np.ndarray, blob: Blob, size: int = PATCH) -> np.ndarray:
    """Crop ``blob`` to its bbox, pad to a square, nearest-neighbour to ``size``.

    Only the blob's own pixels are foreground; padding is split evenly
    between both sides of the shorter dimension (extra pixel after).
    """
    local = blob.local_mask()
    if mask is not None:
        x0, y0, x1, y1 = blob.bbox
        local &= np.asarray(mask, dtype=bool)[y0:y1 + 1, x0:x1 + 1]
    h, w = local.shape
    side = max(h, w)
    top, left = (side - h) // 2, (side - w) // 2
    square = np.zeros((side, side), dtype=bool)
    square[top:top + h, left:left + w] = local
    idx = ((np.arange(size) + 0.5) * side / size).astype(np.int64)
    return square[np.ix_(idx, idx)]


def compute_glcm(patch: np.ndarray, offsets=DEFAULT_OFFSETS, levels: int = 2) -> np.ndarray:
    """Normalised symmetric co-occurrence matrix pooled over ``offsets``.

    ``patch`` holds integer levels in ``[0, levels)``; offsets are ``(dx, dy)``.
    """
    if not offsets:
        raise ValueError("at least one offset is required")
    img = np.asarray(patch).astype(np.int64)
    if img.min(initial=0) < 0 or img.max(initial=0) >= levels:
        raise ValueError("patch values outside [0, levels)")
    h, w = img.shape
    counts = np.zeros(levels * levels, dtype=np.int64)
    for dx, dy in offsets:
        ys = slice(max(0, -dy), min(h, h - dy))
        xs = slice(max(0, -dx), min(w, w - dx))
        ys2 = slice(ys.start + dy, ys.stop + dy)
        xs2 = slice(xs.start + dx, xs.stop + dx)
        a = img[ys, xs].ravel()
        b = img[ys2, xs2].ravel()
        counts += np.bincount(a * levels + b, minlength=levels * levels)
        counts += np.bincount(b * levels + a, minlength=levels * levels)
    total = counts.sum()
    g = counts.reshape(levels, levels).astype(np.float64)
    return g / total if total else g


def haralick_features(glcm: np.ndarray) -> tuple[float, float, float, float]:
    """``(hom, corr, var, diff_var)`` of a normalised co-occurrence matrix.

    hom       sum p(i,j)^2
    corr      (sum i j p(i,j) - mu_x mu_y) / (sigma_x sigma_y), 0 if a sigma is 0
    var       sum (i - mu_x)^2 p(i,j)
    diff_var  sum_k k^2 p_{x-y}(k), p_{x-y}(k) = sum_{|i-j|=k} p(i,j)
    """
    p = np.asarray(glcm, dtype=np.float64)
    n = p.shape[0]
    i = np.arange(n, dtype=np.float64)
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mu_x = float(i @ px)
    mu_y = float(i @ py)
    sd_x = math.sqrt(max(float((i * i) @ px) - mu_x * mu_x, 0.0))
    sd_y = math.sqrt(max(float((i * i) @ py) - mu_y * mu_y, 0.0))

    hom = float((p * p).sum())
    if sd_x * sd_y > 0:
        corr = (float(i @ p @ i) - mu_x * mu_y) / (sd_x * sd_y)
        corr = min(1.0, max(-1.0, corr))
    else:
        corr = 0.0
    var = float(((i - mu_x) ** 2) @ px)
    k = np.abs(i[:, None] - i[None, :]).astype(np.int64)
    p_diff = np.bincount(k.ravel(), weights=p.ravel(), minlength=n)
    diff_var = float((i * i) @ p_diff)
    return hom, corr, var, diff_var


def radial_poly(n: int, m: int, rho):
    """Pseudo-Zernike radial polynomial R_{n,|m|}(rho)."""
    m = abs(m)
    rho = np.asarray(rho, dtype=np.float64)
    out = np.zeros_like(rho)
    for s in range(n - m + 1):
        coef = ((-1) ** s * math.factorial(2 * n + 1 - s)
                / (math.factorial(s) * math.factorial(n - m - s)
                   * math.factorial(n + m + 1 - s)))
        out = out + coef * rho ** (n - s)
    return out


def _unit_disk_grid(size: int):
    c = (2.0 * np.arange(size) + 1.0) / size - 1.0
    x, y = np.meshgrid(c, c)
    return np.hypot(x, y), np.arctan2(y, x)


def pseudo_zernike(patch: np.ndarray, n: int, m: int) -> complex:
    """Pseudo-Zernike moment ``Z_{nm}`` of a square patch over the inscribed
    unit disk, pixel centres mapped to ``((2c+1)/N - 1, (2r+1)/N - 1)``."""
    if n < 0 or abs(m) > n:
        raise InvalidIndices(f"need n >= 0 and |m| <= n, got n={n}, m={m}")
    f = np.asarray(patch, dtype=np.float64)
    size = f.shape[0]
    if f.shape != (size, size):
        raise ValueError("patch must be square")
    rho, phi = _unit_disk_grid(size)
    inside = rho <= 1.0
    kernel = radial_poly(n, m, rho[inside]) * np.exp(-1j * m * phi[inside])
    area = (2.0 / size) ** 2
    return complex((n + 1) / math.pi * np.sum(f[inside] * kernel) * area)


def feature_vector(patch: np.ndarray) -> FeatureVector:
    hom, corr, var, diff_var = haralick_features(compute_glcm(patch))
    return FeatureVector(hom, corr, var, diff_var,
                         abs(pseudo_zernike(patch, 0, 0)),
                         abs(pseudo_zernike(patch, 1, 0)))


def write_feature_csv(path, vectors, labels=None) -> None:
    """CSV rows ``hom,corr,var,diff_var,z00,z10[,label]`` with a header."""
    with open(path, "w", encoding="utf-8") as fh:
        header = list(FEATURE_NAMES) + (["label"] if labels is not None else [])
        fh.write(",".join(header) + "\n")
        for idx, v in enumerate(vectors):
            row = [repr(float(x)) for x in np.asarray(
                v.as_array() if isinstance(v, FeatureVector) else v)]
            if labels is not None:
                row.append(str(int(labels[idx])))
            fh.write(",".join(row) + "\n")


def read_feature_csv(path) -> tuple[np.ndarray, np.ndarray | None]:
    """Inverse of :func:`write_feature_csv`; labels are ``None`` if absent."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[:6] != list(FEATURE_NAMES):
            raise ValueError(f"unexpected feature header {header}")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    has_label = len(header) == 7 and header[6] == "label"
    x = np.array([[float(v) for v in r[:6]] for r in rows], dtype=np.float64).reshape(-1, 6)
    if not has_label:
        return x, None
    y = np.array([int(r[6]) for r in rows], dtype=np.int64)
    if not np.isin(y, (-1, 1)).all():
        raise ValueError("labels must be +1 or -1")
    return x, y
