"""Synthetic road scenes with exact ground truth.

Scenes are a noisy gray background carrying 1-3 signs (red-rimmed
circles, red-rimmed octagons, blue discs with a white arrow) and a number
of red/blue distractors (rectangles and irregular blobs). Rendering is
hard-edged: a pixel takes a shape's colour when its centre is inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SHAPES = ("circle", "octagon")
COLORS = ("red", "blue")


class LayoutFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class GroundTruth:
    image_id: str
    cx: float
    cy: float
    radius: float
    shape: str
    color: str

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class SceneConfig:
    width: int = 640
    height: int = 480
    n_signs: int | None = None  # None: 1-3 drawn from the seed
    n_distractors: int = 3
    noise_level: float = 0.05
    seed: int = 0
    min_radius: float = 10.0
    max_radius: float = 40.0

    def __post_init__(self):
        if self.n_signs is not None and not 0 <= self.n_signs <= 3:
            raise ValueError("n_signs must be within 0..3")
        if self.n_distractors < 0:
            raise ValueError("n_distractors must be non-negative")
        if not 0 <= self.noise_level <= 1:
            raise ValueError("noise_level must lie in [0, 1]")
        if not 10 <= self.min_radius <= self.max_radius <= 40:
            raise ValueError("sign radii must lie in [10, 40]")
        if min(self.width, self.height) < 2 * self.max_radius + 2:
            raise ValueError("frame too small for the largest sign")


def _pixel_grid(h, w):
    yy, xx = np.mgrid[0:h, 0:w]
    return xx.astype(np.float64), yy.astype(np.float64)


def _disk(xx, yy, cx, cy, r):
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r


def _polygon(xx, yy, cx, cy, r, sides, rot):
    """Regular polygon with circumradius ``r`` (pixel-centre test)."""
    inside = np.ones(xx.shape, dtype=bool)
    apothem = r * math.cos(math.pi / sides)
    for k in range(sides):
        ang = rot + (k + 0.5) * 2.0 * math.pi / sides
        inside &= (xx - cx) * math.cos(ang) + (yy - cy) * math.sin(ang) <= apothem
    return inside


def _jitter(rng, base, spread=20):
    return np.clip(np.asarray(base) + rng.integers(-spread, spread + 1, size=3), 0, 255)


def _red(rng):
    return _jitter(rng, (210, 30, 35), 15)


def _blue(rng):
    return _jitter(rng, (25, 55, 200), 15)


def _white(rng):
    return _jitter(rng, (235, 235, 235), 15)


class _Layout:
    def __init__(self, rng, w, h):
        self.rng, self.w, self.h = rng, w, h
        self.placed: list[tuple[float, float, float]] = []

    def place(self, radius, margin=4.0, attempts=100):
        for _ in range(attempts):
            cx = self.rng.uniform(radius + 1, self.w - radius - 1)
            cy = self.rng.uniform(radius + 1, self.h - radius - 1)
            if all(math.hypot(cx - x, cy - y) > radius + r + margin
                   for x, y, r in self.placed):
                self.placed.append((cx, cy, radius))
                return cx, cy
        raise LayoutFailure(f"no free spot for an object of radius {radius:.1f}")


def _draw_sign(canvas, xx, yy, rng, cx, cy, r, kind):
    if kind == "red_circle":
        rim = rng.uniform(3, 5)
        canvas[_disk(xx, yy, cx, cy, r)] = _red(rng)
        canvas[_disk(xx, yy, cx, cy, r - rim)] = _white(rng)
        return "circle", "red"
    if kind == "red_octagon":
        rim = rng.uniform(3, 5)
        rot = rng.uniform(0, math.pi / 4)
        canvas[_polygon(xx, yy, cx, cy, r, 8, rot)] = _red(rng)
        inner = r - rim / math.cos(math.pi / 8)
        canvas[_polygon(xx, yy, cx, cy, inner, 8, rot)] = _white(rng)
        return "octagon", "red"
    # blue disc with a white upward arrow
    canvas[_disk(xx, yy, cx, cy, r)] = _blue(rng)
    white = _white(rng)
    sw = 0.15 * r
    shaft = (np.abs(xx - cx) <= sw) & (yy >= cy - 0.2 * r) & (yy <= cy + 0.6 * r)
    head = ((yy >= cy - 0.6 * r) & (yy <= cy - 0.2 * r)
            & (np.abs(xx - cx) <= (yy - (cy - 0.6 * r)) * 1.0))
    canvas[shaft | head] = white
    return "circle", "blue"


def _draw_distractor(canvas, xx, yy, rng, layout):
    color = _red(rng) if rng.random() < 0.5 else _blue(rng)
    if rng.random() < 0.5:
        w, h = rng.uniform(12, 50, size=2)
        cx, cy = layout.place(0.5 * math.hypot(w, h))
        ang = rng.uniform(0, math.pi)
        u = (xx - cx) * math.cos(ang) + (yy - cy) * math.sin(ang)
        v = -(xx - cx) * math.sin(ang) + (yy - cy) * math.cos(ang)
        canvas[(np.abs(u) <= w / 2) & (np.abs(v) <= h / 2)] = color
    else:
        extent = rng.uniform(12, 28)
        cx, cy = layout.place(extent)
        region = np.zeros(xx.shape, dtype=bool)
        for _ in range(rng.integers(3, 6)):
            rr = rng.uniform(4, 0.5 * extent)
            ang = rng.uniform(0, 2 * math.pi)
            off = rng.uniform(0, extent - rr)
            region |= _disk(xx, yy, cx + off * math.cos(ang), cy + off * math.sin(ang), rr)
        canvas[region] = color


SIGN_KINDS = ("red_circle", "red_octagon", "blue_circle")


def synth_scene(cfg: SceneConfig, image_id: str | None = None):
    """Render one scene; returns ``(rgb uint8 array, [GroundTruth, ...])``."""
    rng = np.random.default_rng(cfg.seed)
    image_id = image_id if image_id is not None else f"scene_{cfg.seed:05d}"
    n_signs = cfg.n_signs if cfg.n_signs is not None else int(rng.integers(1, 4))
    h, w = cfg.height, cfg.width
    xx, yy = _pixel_grid(h, w)
    base = rng.uniform(90, 170)
    tint = rng.uniform(-6, 6, size=3)
    canvas = np.empty((h, w, 3), dtype=np.float64)
    canvas[:] = base + tint
    layout = _Layout(rng, w, h)

    gts = []
    for _ in range(n_signs):
        r = rng.uniform(cfg.min_radius, cfg.max_radius)
        cx, cy = layout.place(r)
        kind = SIGN_KINDS[int(rng.integers(len(SIGN_KINDS)))]
        shape, color = _draw_sign(canvas, xx, yy, rng, cx, cy, r, kind)
        gts.append(GroundTruth(image_id, float(cx), float(cy), float(r), shape, color))
    for _ in range(cfg.n_distractors):
        _draw_distractor(canvas, xx, yy, rng, layout)

    if cfg.noise_level > 0:
        canvas += rng.normal(0.0, cfg.noise_level * 255.0, size=canvas.shape)
    img = np.clip(np.rint(canvas), 0, 255).astype(np.uint8)
    return img, gts


def benchmark_configs(seeds, n_distractors=3, noise_level=0.05, **kw) -> list[SceneConfig]:
    return [SceneConfig(n_distractors=n_distractors, noise_level=noise_level, seed=int(s), **kw)
            for s in seeds]
