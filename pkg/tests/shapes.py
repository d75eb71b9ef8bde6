"""Rasterisers and random draws shared by the test modules."""

import math

import numpy as np

from signscan.imagecore import connected_components, extract_edges
from signscan.rht import Ellipse, ellipse_distance


def grid_points(w, h):
    yy, xx = np.mgrid[0:h, 0:w]
    return np.column_stack([xx.ravel(), yy.ravel()])


def ellipse_outline(e: Ellipse, w=100, h=100, band=0.5):
    """Pixels whose centre is within ``band`` (first-order distance) of ``e``."""
    pts = grid_points(w, h)
    return pts[ellipse_distance(pts, e) <= band]


def filled_ellipse(e: Ellipse, w=100, h=100):
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    ct, st = math.cos(e.theta), math.sin(e.theta)
    u = (xx - e.cx) * ct + (yy - e.cy) * st
    v = -(xx - e.cx) * st + (yy - e.cy) * ct
    return (u / e.a) ** 2 + (v / e.b) ** 2 <= 1.0


def blob_edges(mask):
    (blob,) = connected_components(mask, 1)
    return extract_edges(mask, blob)


def random_ellipse(rng, lo=10.0, hi=40.0, aspect=1.5, centre=(50.0, 50.0), jitter=5.0):
    """Axes in [lo, hi] with a/b <= aspect; orientation uniform."""
    a = rng.uniform(lo, hi)
    b = rng.uniform(max(lo, a / aspect), min(hi, a * aspect))
    a, b = max(a, b), min(a, b)
    cx, cy = np.asarray(centre) + rng.uniform(-jitter, jitter, 2)
    return Ellipse(float(cx), float(cy), float(a), float(b), float(rng.uniform(0, math.pi)))


def recovered(found, truth: Ellipse, centre_px=2.0, axis_rel=0.05) -> bool:
    return any(
        math.hypot(f.cx - truth.cx, f.cy - truth.cy) <= centre_px
        and abs(f.a - truth.a) <= axis_rel * truth.a
        and abs(f.b - truth.b) <= axis_rel * truth.b
        for f in found)


def point_on(e: Ellipse, t: float):
    """Point at parameter ``t`` and the unit tangent there."""
    ct, st = math.cos(e.theta), math.sin(e.theta)
    x = e.cx + e.a * math.cos(t) * ct - e.b * math.sin(t) * st
    y = e.cy + e.a * math.cos(t) * st + e.b * math.sin(t) * ct
    dx = -e.a * math.sin(t) * ct - e.b * math.cos(t) * st
    dy = -e.a * math.sin(t) * st + e.b * math.cos(t) * ct
    n = math.hypot(dx, dy)
    return (x, y), (dx / n, dy / n)
