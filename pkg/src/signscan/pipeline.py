"""End-to-end detection: segmentation -> RHT -> texture/moment classifier."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .evaluation import DetectionRecord, is_match
from .features import FeatureVector, feature_vector, resize_binary
from .imagecore import Blob, connected_components, extract_edges
from .learn import SignClassifier, fit_classifier
from .rht import Ellipse, RhtConfig, geometric_to_conic, rht_detect
from .segmentation import Channel, SegmentationConfig, segment_mask
from .synth import SceneConfig, synth_scene


@dataclass(frozen=True)
class PipelineConfig:
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    rht: RhtConfig = field(default_factory=RhtConfig)
    channels: tuple[Channel, ...] = (Channel.RED, Channel.BLUE)
    threshold: float = 0.0
    suppress_nested: bool = True


@dataclass(frozen=True)
class Candidate:
    """An RHT ellipse together with the descriptor of its blob crop."""

    ellipse: Ellipse
    features: FeatureVector
    channel: Channel
    blob_index: int


def ellipse_bbox(e: Ellipse) -> tuple[float, float, float, float]:
    ct, st = math.cos(e.theta), math.sin(e.theta)
    hx = math.sqrt((e.a * ct) ** 2 + (e.b * st) ** 2)
    hy = math.sqrt((e.a * st) ** 2 + (e.b * ct) ** 2)
    return e.cx - hx, e.cy - hy, e.cx + hx, e.cy + hy


def candidate_blob(blob: Blob, e: Ellipse, margin: float = 1.5) -> Blob | None:
    """The part of ``blob`` inside the candidate's bounding box (plus margin)."""
    x0, y0, x1, y1 = ellipse_bbox(e)
    px = blob.pixels
    keep = ((px[:, 0] >= x0 - margin) & (px[:, 0] <= x1 + margin)
            & (px[:, 1] >= y0 - margin) & (px[:, 1] <= y1 + margin))
    if not keep.any():
        return None
    return Blob.from_pixels(px[keep])


def _center_inside(inner: Ellipse, outer: Ellipse) -> bool:
    a, b, c = geometric_to_conic(outer)
    dx, dy = inner.cx - outer.cx, inner.cy - outer.cy
    return a * dx * dx + 2.0 * b * dx * dy + c * dy * dy <= 1.0


def suppress_nested(ellipses: list[Ellipse]) -> list[Ellipse]:
    """Drop ellipses whose centre lies inside a larger ellipse of the same blob.

    Ring-shaped signs give one ellipse on the outer rim and more on the inner
    rim or the pictogram; only the outermost describes the sign. Order of
    the survivors follows the input.
    """
    keep: list[Ellipse] = []
    for e in sorted(ellipses, key=lambda e: -e.a):
        if not any(e.a < k.a and _center_inside(e, k) for k in keep):
            keep.append(e)
    return [e for e in ellipses if any(e is k for k in keep)]


def find_candidates(img: np.ndarray, cfg: PipelineConfig = PipelineConfig()) -> list[Candidate]:
    """All RHT ellipses of an image with their feature vectors.

    Blobs are numbered across channels in processing order; blob ``k`` runs
    RHT with seed ``rng_seed ^ k``.
    """
    out = []
    k = 0
    for channel in cfg.channels:
        mask = segment_mask(img, channel, cfg.segmentation)
        for blob in connected_components(mask, cfg.segmentation.min_area):
            edges = extract_edges(mask, blob)
            rcfg = replace(cfg.rht, rng_seed=cfg.rht.rng_seed ^ k)
            found = rht_detect(edges, rcfg)
            if cfg.suppress_nested:
                found = suppress_nested(found)
            for e in found:
                sub = candidate_blob(blob, e, cfg.rht.support_eps)
                if sub is None:
                    continue
                fv = feature_vector(resize_binary(mask, sub))
                out.append(Candidate(e, fv, channel, k))
            k += 1
    return out


def score_candidates(cands, image_id: str, classifier: SignClassifier | None,
                     threshold: float = 0.0) -> list[DetectionRecord]:
    """Classifier scores, or RHT support when ``classifier`` is None (every
    candidate is then accepted)."""
    if not cands:
        return []
    if classifier is None:
        return [DetectionRecord(image_id, c.ellipse, c.ellipse.support, True) for c in cands]
    scores = classifier.scores(np.array([c.features.as_array() for c in cands]))
    return [DetectionRecord(image_id, c.ellipse, float(s), bool(s >= threshold))
            for c, s in zip(cands, scores)]


def run_pipeline(img: np.ndarray, cfg: PipelineConfig = PipelineConfig(),
                 classifier: SignClassifier | None = None,
                 image_id: str = "image") -> list[DetectionRecord]:
    return score_candidates(find_candidates(img, cfg), image_id, classifier, cfg.threshold)


def label_candidates(cands, gts) -> np.ndarray:
    """+1 for the candidate that best explains each ground truth, -1 otherwise.

    Among candidates passing the match gate for a ground truth, the one
    whose long axis is closest to the true radius wins.
    """
    labels = -np.ones(len(cands), dtype=np.int64)
    for g in gts:
        best, best_err = -1, math.inf
        for i, c in enumerate(cands):
            if labels[i] > 0 or not is_match(c.ellipse, g):
                continue
            err = abs(max(c.ellipse.a, c.ellipse.b) / g.radius - 1.0)
            if err < best_err:
                best, best_err = i, err
        if best >= 0:
            labels[best] = 1
    return labels


def map_ordered(fn, items, workers: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool; order kept."""
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def scene_candidates(scene_cfgs, cfg: PipelineConfig = PipelineConfig(), workers: int = 1):
    """``[(image_id, candidates, gts), ...]`` for a list of scene configs."""
    def one(sc: SceneConfig):
        img, gts = synth_scene(sc)
        return f"scene_{sc.seed:05d}", find_candidates(img, cfg), gts
    return map_ordered(one, scene_cfgs, workers)


def training_set(scene_cfgs, cfg: PipelineConfig = PipelineConfig(), workers: int = 1):
    """Feature matrix and +/-1 labels from RHT candidates on synthetic scenes."""
    xs, ys = [], []
    for _, cands, gts in scene_candidates(scene_cfgs, cfg, workers):
        if not cands:
            continue
        xs.append(np.array([c.features.as_array() for c in cands]))
        ys.append(label_candidates(cands, gts))
    if not xs:
        return np.zeros((0, 6)), np.zeros(0, dtype=np.int64)
    return np.vstack(xs), np.concatenate(ys)


def train_on_scenes(scene_cfgs, cfg: PipelineConfig = PipelineConfig(), c_param: float = 10.0,
                    epochs: int = 200, variance_keep: float = 0.95, seed: int = 0,
                    workers: int = 1) -> SignClassifier:
    x, y = training_set(scene_cfgs, cfg, workers)
    return fit_classifier(x, y, c_param=c_param, epochs=epochs,
                          variance_keep=variance_keep, seed=seed)
