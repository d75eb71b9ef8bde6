"""Randomized Hough Transform for circles and octagons seen as ellipses.

One hypothesis per random triple of edge points:

1. tangent at each point from a total-least-squares fit of its neighbourhood,
2. centre from the tangent/midpoint construction: the line through the
   intersection of two tangents and the midpoint of their chord passes
   through the centre; two such lines meet there,
3. the centred conic ``a x^2 + 2 b x y + c y^2 = 1`` through the three
   translated points (a 3x3 linear solve),
4. axes and orientation from the eigen-structure of ``[[a, b], [b, c]]``.

Hypotheses are clustered in a flat accumulator. A cluster that collects
``min_score`` votes is checked against the edge map; accepted ellipses
have their supporting edges removed and the accumulator is reset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


class RhtError(ValueError):
    """A random sample that cannot produce an ellipse; callers resample."""


class InsufficientNeighbors(RhtError):
    pass


class DegenerateSample(RhtError):
    pass


class SingularSystem(RhtError):
    pass


class NotAnEllipse(RhtError):
    pass


@dataclass(frozen=True)
class TangentLine:
    point: tuple[float, float]
    direction: tuple[float, float]


@dataclass(frozen=True)
class Ellipse:
    """Geometric ellipse. ``a >= b`` are semi-axes, ``theta`` in [0, pi) is the
    direction of the ``a`` axis measured from +x towards +y."""

    cx: float
    cy: float
    a: float
    b: float
    theta: float = 0.0
    score: int = 0
    support: float = 0.0

    @property
    def center(self) -> tuple[float, float]:
        return (self.cx, self.cy)


@dataclass(frozen=True)
class RhtConfig:
    max_iters: int = 2000
    tangent_radius: int = 3
    center_tol: float = 2.0
    axis_tol: float = 2.0
    theta_tol: float = 0.1
    min_score: int = 3
    support_eps: float = 1.5
    min_support: float = 0.5
    min_axis: float = 5.0
    max_aspect: float = 1.5
    tangent_tol: float = 0.25
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("center_tol", "axis_tol", "theta_tol", "support_eps", "min_axis",
                     "tangent_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.min_support <= 1:
            raise ValueError("min_support must lie in (0, 1]")
        if self.max_aspect < 1:
            raise ValueError("max_aspect must be >= 1")
        if self.max_iters < 0 or self.min_score < 1 or self.tangent_radius < 1:
            raise ValueError("max_iters, min_score and tangent_radius out of range")


# --------------------------------------------------------------------------
# geometry primitives


def _principal_direction(sxx: float, sxy: float, syy: float) -> tuple[float, float]:
    ang = 0.5 * math.atan2(2.0 * sxy, sxx - syy)
    return (math.cos(ang), math.sin(ang))


def estimate_tangent(edges, p, radius: int = 3) -> TangentLine:
    """Tangent at edge point ``p`` by total least squares over its
    ``(2r+1)^2`` neighbourhood (Chebyshev distance ``<= r``)."""
    pts = np.asarray(edges, dtype=np.float64).reshape(-1, 2)
    px, py = float(p[0]), float(p[1])
    near = pts[(np.abs(pts[:, 0] - px) <= radius) & (np.abs(pts[:, 1] - py) <= radius)]
    if len(near) < 3:
        raise InsufficientNeighbors(f"{len(near)} edge points near {tuple(p)}")
    d = near - near.mean(axis=0)
    direction = _principal_direction(
        float(d[:, 0] @ d[:, 0]), float(d[:, 0] @ d[:, 1]), float(d[:, 1] @ d[:, 1])
    )
    return TangentLine((px, py), direction)


def _tangent_field(pts: np.ndarray, radius: int) -> tuple[np.ndarray, np.ndarray]:
    """Tangent directions for every edge point at once.

    Returns ``(directions, ok)`` where ``ok`` flags points that had enough
    neighbours.
    """
    n = len(pts)
    if n == 0:
        return np.zeros((0, 2)), np.zeros(0, dtype=bool)
    ipts = pts.astype(np.int64)
    origin = ipts.min(axis=0) - radius
    shape = ipts.max(axis=0) - origin + radius + 1
    grid = np.zeros((shape[1], shape[0]), dtype=bool)
    loc = ipts - origin
    grid[loc[:, 1], loc[:, 0]] = True

    off = np.arange(-radius, radius + 1)
    ox, oy = np.meshgrid(off, off)
    ox, oy = ox.ravel(), oy.ravel()
    hit = grid[loc[:, 1, None] + oy[None, :], loc[:, 0, None] + ox[None, :]]
    w = hit.astype(np.float64)
    cnt = w.sum(axis=1)
    mx = (w * ox).sum(axis=1) / cnt
    my = (w * oy).sum(axis=1) / cnt
    sxx = (w * ox * ox).sum(axis=1) - cnt * mx * mx
    syy = (w * oy * oy).sum(axis=1) - cnt * my * my
    sxy = (w * ox * oy).sum(axis=1) - cnt * mx * my
    ang = 0.5 * np.arctan2(2.0 * sxy, sxx - syy)
    return np.column_stack([np.cos(ang), np.sin(ang)]), cnt >= 3


def _cross(u, v) -> float:
    return u[0] * v[1] - u[1] * v[0]


def _intersect(p, u, q, v) -> tuple[float, float]:
    """Intersection of lines ``p + s u`` and ``q + t v``."""
    nu = math.hypot(u[0], u[1])
    nv = math.hypot(v[0], v[1])
    if nu == 0.0 or nv == 0.0:
        raise DegenerateSample("zero-length direction")
    den = _cross(u, v)
    if abs(den) / (nu * nv) < 1e-9:
        raise DegenerateSample("parallel lines")
    s = _cross((q[0] - p[0], q[1] - p[1]), v) / den
    return (p[0] + s * u[0], p[1] + s * u[1])


def ellipse_center(pa, pb, pc, ta: TangentLine, tb: TangentLine,
                   tc: TangentLine) -> tuple[float, float]:
    """Ellipse centre from three points and their tangents."""
    pa, pb, pc = (tuple(map(float, p)) for p in (pa, pb, pc))
    if pa == pb or pb == pc or pa == pc:
        raise DegenerateSample("repeated point")
    s = _intersect(pa, ta.direction, pb, tb.direction)
    t = (0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1]))
    n = _intersect(pc, tc.direction, pb, tb.direction)
    m = (0.5 * (pb[0] + pc[0]), 0.5 * (pb[1] + pc[1]))
    return _intersect(s, (t[0] - s[0], t[1] - s[1]), n, (m[0] - n[0], m[1] - n[1]))


def fit_conic(x1, y1, x2, y2, x3, y3) -> tuple[float, float, float]:
    """Solve for the centred conic ``a x^2 + 2 b x y + c y^2 = 1`` through
    three points given relative to the centre."""
    m = np.array([
        [x1 * x1, 2.0 * x1 * y1, y1 * y1],
        [x2 * x2, 2.0 * x2 * y2, y2 * y2],
        [x3 * x3, 2.0 * x3 * y3, y3 * y3],
    ], dtype=np.float64)
    if abs(np.linalg.det(m)) < 1e-12:
        raise SingularSystem("points do not determine a centred conic")
    a, b, c = np.linalg.solve(m, np.ones(3))
    if a <= 0 or a * c - b * b <= 0:
        raise NotAnEllipse(f"a={a:g}, ac-b^2={a * c - b * b:g}")
    return float(a), float(b), float(c)


def conic_to_geometric(a: float, b: float, c: float,
                       center=(0.0, 0.0)) -> Ellipse:
    """Semi-axes and orientation of ``a x^2 + 2 b x y + c y^2 = 1``."""
    if a <= 0 or a * c - b * b <= 0:
        raise NotAnEllipse(f"a={a:g}, ac-b^2={a * c - b * b:g}")
    half = 0.5 * (a + c)
    rad = math.hypot(0.5 * (a - c), b)
    lam_small, lam_big = half - rad, half + rad
    if lam_small <= 0:
        raise NotAnEllipse("degenerate axis")
    if rad <= 1e-12 * lam_big:
        theta = 0.0
    else:
        # atan2 gives the direction of the larger eigenvalue; the long axis
        # is perpendicular to it
        theta = (0.5 * math.atan2(2.0 * b, a - c) + 0.5 * math.pi) % math.pi
    return Ellipse(float(center[0]), float(center[1]),
                   1.0 / math.sqrt(lam_small), 1.0 / math.sqrt(lam_big), theta)


def geometric_to_conic(e: Ellipse) -> tuple[float, float, float]:
    ct, st = math.cos(e.theta), math.sin(e.theta)
    ia, ib = 1.0 / (e.a * e.a), 1.0 / (e.b * e.b)
    return (ct * ct * ia + st * st * ib,
            ct * st * (ia - ib),
            st * st * ia + ct * ct * ib)


def ellipse_distance(points, e: Ellipse) -> np.ndarray:
    """First-order geometric distance of points to the ellipse.

    ``|Q(d) - 1| / |grad Q(d)|`` with ``Q`` the centred quadratic form and
    ``d`` the offset from the centre.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    a, b, c = geometric_to_conic(e)
    dx = pts[:, 0] - e.cx
    dy = pts[:, 1] - e.cy
    gx = a * dx + b * dy
    gy = b * dx + c * dy
    q = dx * gx + dy * gy
    grad = 2.0 * np.hypot(gx, gy)
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = np.abs(q - 1.0) / grad
    return np.where(grad > 0, dist, np.inf)


def ramanujan_perimeter(a: float, b: float) -> float:
    return math.pi * (3.0 * (a + b) - math.sqrt((3.0 * a + b) * (a + 3.0 * b)))


def verify_candidate(edges, e: Ellipse, eps: float = 1.5) -> float:
    """Fraction of the ellipse perimeter covered by edges within ``eps``."""
    pts = np.asarray(edges, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0:
        return 0.0
    hits = int(np.count_nonzero(ellipse_distance(pts, e) <= eps))
    return min(1.0, hits / ramanujan_perimeter(e.a, e.b))


def fit_ellipse_lsq(points) -> Ellipse:
    """Direct least-squares ellipse fit (Halir-Flusser form of Fitzgibbon's
    method). Raises :class:`NotAnEllipse` when no ellipse fits."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) < 6:
        raise NotAnEllipse("need at least six points")
    mean = pts.mean(axis=0)
    scale = np.sqrt(((pts - mean) ** 2).sum(axis=1).mean()) or 1.0
    x = (pts[:, 0] - mean[0]) / scale
    y = (pts[:, 1] - mean[1]) / scale
    d1 = np.column_stack([x * x, x * y, y * y])
    d2 = np.column_stack([x, y, np.ones_like(x)])
    s1, s2, s3 = d1.T @ d1, d1.T @ d2, d2.T @ d2
    try:
        t = -np.linalg.solve(s3, s2.T)
    except np.linalg.LinAlgError as exc:
        raise NotAnEllipse("singular scatter") from exc
    m = s1 + s2 @ t
    m = np.array([m[2] / 2.0, -m[1], m[0] / 2.0])
    _, vecs = np.linalg.eig(m)
    vecs = np.real(vecs)
    cond = 4.0 * vecs[0] * vecs[2] - vecs[1] ** 2
    good = np.flatnonzero(cond > 0)
    if len(good) == 0:
        raise NotAnEllipse("no elliptic solution")
    a1 = vecs[:, good[0]]
    A, B, C = a1
    D, E, F = t @ a1
    # conic A x^2 + B x y + C y^2 + D x + E y + F = 0 in normalised coordinates
    q = np.array([[A, B / 2.0], [B / 2.0, C]])
    try:
        ctr = np.linalg.solve(2.0 * q, [-D, -E])
    except np.linalg.LinAlgError as exc:
        raise NotAnEllipse("no centre") from exc
    k = -(F + 0.5 * (D * ctr[0] + E * ctr[1]))
    if k == 0:
        raise NotAnEllipse("degenerate conic")
    a, b2, c = A / k, B / k, C / k
    e = conic_to_geometric(a / scale**2, b2 / (2.0 * scale**2), c / scale**2)
    return replace(e, cx=float(ctr[0] * scale + mean[0]), cy=float(ctr[1] * scale + mean[1]))


def refine_ellipse(points, e: Ellipse, eps: float, rounds: int = 2) -> Ellipse:
    """Refit ``e`` to the points within ``eps`` of it.

    The refit is kept only while it moves by less than the ellipse's own
    size scale; otherwise the input is returned unchanged.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    cur = e
    for _ in range(rounds):
        inl = pts[ellipse_distance(pts, cur) <= eps]
        try:
            new = fit_ellipse_lsq(inl)
        except RhtError:
            break
        if (math.hypot(new.cx - cur.cx, new.cy - cur.cy) > 0.25 * cur.b
                or abs(new.a - cur.a) > 0.25 * cur.a
                or abs(new.b - cur.b) > 0.25 * cur.b):
            break
        cur = replace(cur, cx=new.cx, cy=new.cy, a=new.a, b=new.b, theta=new.theta)
    return cur


# --------------------------------------------------------------------------
# detector


class _Accumulator:
    """Flat list of parameter clusters with running means."""

    def __init__(self, cfg: RhtConfig):
        self.cfg = cfg
        self.clear()

    def clear(self):
        self.params = np.zeros((0, 5))
        self.counts = np.zeros(0, dtype=np.int64)

    def add(self, e: Ellipse) -> int:
        """Vote for ``e``; returns the index of the cell that received it."""
        cfg = self.cfg
        p = self.params
        if len(p):
            dc = np.hypot(p[:, 0] - e.cx, p[:, 1] - e.cy)
            dth = np.abs(p[:, 4] - e.theta)
            dth = np.minimum(dth, math.pi - dth)
            # orientation is meaningless for near-circles
            round_ = (p[:, 2] - p[:, 3] < cfg.axis_tol) & (e.a - e.b < cfg.axis_tol)
            ok = ((dc <= cfg.center_tol)
                  & (np.abs(p[:, 2] - e.a) <= cfg.axis_tol)
                  & (np.abs(p[:, 3] - e.b) <= cfg.axis_tol)
                  & (round_ | (dth <= cfg.theta_tol)))
            if ok.any():
                cand = np.flatnonzero(ok)
                i = int(cand[np.argmin(dc[cand])])
                n = self.counts[i]
                th = e.theta
                if th - p[i, 4] > math.pi / 2:
                    th -= math.pi
                elif p[i, 4] - th > math.pi / 2:
                    th += math.pi
                new = np.array([e.cx, e.cy, e.a, e.b, th])
                p[i] = (p[i] * n + new) / (n + 1)
                p[i, 4] %= math.pi
                self.counts[i] = n + 1
                return i
        self.params = np.vstack([p, [e.cx, e.cy, e.a, e.b, e.theta]])
        self.counts = np.append(self.counts, 1)
        return len(self.counts) - 1

    def drop(self, i: int):
        self.params = np.delete(self.params, i, axis=0)
        self.counts = np.delete(self.counts, i)

    def ellipse(self, i: int) -> Ellipse:
        cx, cy, a, b, th = self.params[i]
        return Ellipse(float(cx), float(cy), float(a), float(b), float(th),
                       score=int(self.counts[i]))


def hypothesis(pts: np.ndarray, tangents: np.ndarray, i: int, j: int, k: int) -> Ellipse:
    """Ellipse through edge points ``i, j, k`` using precomputed tangents."""
    pa, pb, pc = pts[i], pts[j], pts[k]
    ta = TangentLine(tuple(pa), tuple(tangents[i]))
    tb = TangentLine(tuple(pb), tuple(tangents[j]))
    tc = TangentLine(tuple(pc), tuple(tangents[k]))
    cx, cy = ellipse_center(pa, pb, pc, ta, tb, tc)
    coeffs = fit_conic(pa[0] - cx, pa[1] - cy, pb[0] - cx, pb[1] - cy,
                       pc[0] - cx, pc[1] - cy)
    return conic_to_geometric(*coeffs, center=(cx, cy))


def _bcross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _bintersect(p, u, q, v):
    """Batched line intersection; returns points and a validity flag."""
    nu = np.hypot(u[:, 0], u[:, 1])
    nv = np.hypot(v[:, 0], v[:, 1])
    den = _bcross(u, v)
    with np.errstate(divide="ignore", invalid="ignore"):
        ok = (nu > 0) & (nv > 0) & (np.abs(den) / (nu * nv) >= 1e-9)
        s = np.where(ok, _bcross(q - p, v) / np.where(ok, den, 1.0), 0.0)
    return p + s[:, None] * u, ok


def hypotheses_batch(pts: np.ndarray, tangents: np.ndarray, triples: np.ndarray,
                     tangent_tol: float | None = None):
    """Vectorised :func:`hypothesis` over rows of ``triples``.

    Returns ``(params, ok)`` with ``params`` rows ``(cx, cy, a, b, theta)``.
    Rows that would raise in the scalar path have ``ok`` False. When
    ``tangent_tol`` is given, rows whose conic disagrees with a measured
    tangent by more than that angle are also rejected.
    """
    A, B, C = (pts[triples[:, n]] for n in range(3))
    tA, tB, tC = (tangents[triples[:, n]] for n in range(3))
    ok = ~((A == B).all(1) | (B == C).all(1) | (A == C).all(1))
    s, ok1 = _bintersect(A, tA, B, tB)
    n, ok2 = _bintersect(C, tC, B, tB)
    t = 0.5 * (A + B)
    m = 0.5 * (B + C)
    ctr, ok3 = _bintersect(s, t - s, n, m - n)
    ok &= ok1 & ok2 & ok3

    rows = []
    for P in (A, B, C):
        d = P - ctr
        rows.append(np.stack([d[:, 0] ** 2, 2.0 * d[:, 0] * d[:, 1], d[:, 1] ** 2], axis=1))
    M = np.stack(rows, axis=1)
    det = np.linalg.det(M)
    ok &= np.abs(det) >= 1e-12
    M[~ok] = np.eye(3)
    abc = np.linalg.solve(M, np.ones((len(M), 3, 1)))[:, :, 0]
    a, b, c = abc[:, 0], abc[:, 1], abc[:, 2]
    ok &= (a > 0) & (a * c - b * b > 0)

    half = 0.5 * (a + c)
    rad = np.hypot(0.5 * (a - c), b)
    lam_small, lam_big = half - rad, half + rad
    ok &= lam_small > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        axis_a = 1.0 / np.sqrt(np.where(ok, lam_small, 1.0))
        axis_b = 1.0 / np.sqrt(np.where(ok, lam_big, 1.0))
    theta = np.where(rad <= 1e-12 * lam_big, 0.0,
                     (0.5 * np.arctan2(2.0 * b, a - c) + 0.5 * math.pi) % math.pi)

    if tangent_tol is not None:
        lim = math.sin(tangent_tol)
        for P, tP in ((A, tA), (B, tB), (C, tC)):
            d = P - ctr
            gx = a * d[:, 0] + b * d[:, 1]
            gy = b * d[:, 0] + c * d[:, 1]
            gn = np.hypot(gx, gy)
            with np.errstate(divide="ignore", invalid="ignore"):
                # tangent is perpendicular to the gradient of the form
                dev = np.abs(tP[:, 0] * gx + tP[:, 1] * gy) / gn
            ok &= gn > 0
            ok &= np.where(gn > 0, dev, np.inf) <= lim
    params = np.column_stack([ctr[:, 0], ctr[:, 1], axis_a, axis_b, theta])
    return params, ok


def _distinct_triples(rng, n: int, size: int) -> np.ndarray:
    """``size`` uniformly random triples of distinct indices below ``n``."""
    i = rng.integers(0, n, size=size)
    j = rng.integers(0, n - 1, size=size)
    k = rng.integers(0, n - 2, size=size)
    j = j + (j >= i)
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    k = k + (k >= lo)
    k = k + (k >= hi)
    return np.column_stack([i, j, k])


BATCH = 128


def rht_detect(edges, cfg: RhtConfig = RhtConfig()) -> list[Ellipse]:
    """Detect ellipses in an edge point set.

    Tangents are estimated once on the full input set. Samples are drawn in
    batches from the points still alive at the start of the batch; a sample
    that touches a point removed mid-batch is skipped but still counts as an
    iteration. Every emitted ellipse satisfies ``b >= min_axis``,
    ``a / b <= max_aspect``, ``score >= min_score`` and
    ``support >= min_support``. Results are sorted by support, highest first.
    """
    pts = np.asarray(edges, dtype=np.float64).reshape(-1, 2)
    if len(pts) < 3:
        return []
    rng = np.random.default_rng(cfg.rng_seed)
    tangents, has_tangent = _tangent_field(pts, cfg.tangent_radius)
    alive = np.ones(len(pts), dtype=bool)
    acc = _Accumulator(cfg)
    found: list[Ellipse] = []

    done = 0
    while done < cfg.max_iters:
        live = np.flatnonzero(alive)
        if len(live) < 3:
            break
        size = min(BATCH, cfg.max_iters - done)
        done += size
        triples = live[_distinct_triples(rng, len(live), size)]
        params, ok = hypotheses_batch(pts, tangents, triples, cfg.tangent_tol)
        ok &= has_tangent[triples].all(axis=1)
        ok &= (params[:, 3] >= cfg.min_axis) & (params[:, 2] <= cfg.max_aspect * params[:, 3])
        for row in np.flatnonzero(ok):
            if not alive[triples[row]].all():
                continue
            cx, cy, a, b, th = params[row]
            cell = acc.add(Ellipse(float(cx), float(cy), float(a), float(b), float(th)))
            if acc.counts[cell] < cfg.min_score:
                continue
            cur = pts[alive]
            cand = acc.ellipse(cell)
            support = verify_candidate(cur, cand, cfg.support_eps)
            if support < cfg.min_support:
                acc.drop(cell)
                continue
            fine = refine_ellipse(cur, cand, cfg.support_eps)
            fine_support = verify_candidate(cur, fine, cfg.support_eps)
            if (fine_support >= cfg.min_support and fine.b >= cfg.min_axis
                    and fine.a <= cfg.max_aspect * fine.b):
                cand, support = fine, fine_support
            found.append(replace(cand, support=support))
            idx = np.flatnonzero(alive)
            alive[idx[ellipse_distance(pts[idx], cand) <= cfg.support_eps]] = False
            acc.clear()

    found.sort(key=lambda e: -e.support)
    return found
