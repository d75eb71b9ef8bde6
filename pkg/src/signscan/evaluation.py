"""Detection bookkeeping: greedy matching, precision/recall, PR sweeps, record files."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

from .rht import Ellipse
from .synth import GroundTruth


class ImageIdMismatch(ValueError):
    pass


@dataclass(frozen=True)
class DetectionRecord:
    image_id: str
    ellipse: Ellipse
    svm_score: float
    accepted: bool


@dataclass(frozen=True)
class MatchCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "MatchCounts") -> "MatchCounts":
        return MatchCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def is_match(e: Ellipse, gt: GroundTruth, center_frac=0.5, size_range=(0.6, 1.4)) -> bool:
    d = math.hypot(e.cx - gt.cx, e.cy - gt.cy)
    ratio = max(e.a, e.b) / gt.radius
    return d <= center_frac * gt.radius and size_range[0] <= ratio <= size_range[1]


def _greedy(dets, gts):
    """Match detections to ground truths; returns per-detection gt index or -1."""
    by_image = defaultdict(list)
    for gi, g in enumerate(gts):
        by_image[g.image_id].append(gi)
    used = set()
    assign = [-1] * len(dets)
    # stable sort keeps input order among equal scores
    order = sorted(range(len(dets)), key=lambda i: -dets[i].svm_score)
    for di in order:
        d = dets[di]
        best, best_dist = -1, math.inf
        for gi in by_image.get(d.image_id, ()):
            if gi in used or not is_match(d.ellipse, gts[gi]):
                continue
            dist = math.hypot(d.ellipse.cx - gts[gi].cx, d.ellipse.cy - gts[gi].cy)
            if dist < best_dist:
                best, best_dist = gi, dist
        if best >= 0:
            used.add(best)
            assign[di] = best
    return assign


def match_detections(dets, gts, accepted_only: bool = True) -> MatchCounts:
    """Greedy score-ordered matching.

    A detection matches a still-free ground truth of the same image when its
    centre is within half the true radius and its long semi-axis is within
    [0.6, 1.4] of that radius; the closest such ground truth wins.
    """
    dets = [d for d in dets if d.accepted or not accepted_only]
    assign = _greedy(dets, list(gts))
    tp = sum(1 for a in assign if a >= 0)
    return MatchCounts(tp=tp, fp=len(dets) - tp, fn=len(gts) - tp)


def precision_recall(c: MatchCounts) -> tuple[float, float]:
    """``(precision, recall)``; an empty denominator gives 1."""
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 1.0
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 1.0
    return precision, recall


def pr_curve(dets, gts) -> list[tuple[float, float, float]]:
    """``(threshold, precision, recall)`` for every distinct score plus +inf,
    highest threshold first. A detection counts when its score >= threshold,
    regardless of its ``accepted`` flag.

    Greedy matching visits detections in descending score order, so the
    detections kept at a threshold are a prefix of that order and their
    assignments do not change as the threshold drops; one pass suffices.
    """
    dets = list(dets)
    gts = list(gts)
    assign = _greedy(dets, gts)
    scored = sorted(((d.svm_score, a >= 0) for d, a in zip(dets, assign)),
                    key=lambda sa: -sa[0])
    out = [(math.inf,) + precision_recall(MatchCounts(0, 0, len(gts)))]
    tp = n = 0
    for i, (score, hit) in enumerate(scored):
        tp += hit
        n += 1
        if i + 1 < len(scored) and scored[i + 1][0] == score:
            continue
        out.append((score,) + precision_recall(MatchCounts(tp, n - tp, len(gts) - tp)))
    return out


def interpolated_precision(curve, recall_level: float) -> float:
    """Best precision reached at recall >= ``recall_level`` (0 if never)."""
    vals = [p for _, p, r in curve if r >= recall_level - 1e-12]
    return max(vals) if vals else 0.0


def relabel(dets, threshold: float) -> list[DetectionRecord]:
    return [DetectionRecord(d.image_id, d.ellipse, d.svm_score, d.svm_score >= threshold)
            for d in dets]


# --------------------------------------------------------------------------
# text formats


def _num(v: float) -> str:
    return repr(float(v))


def format_detection(d: DetectionRecord) -> str:
    e = d.ellipse
    return "\t".join([d.image_id, _num(e.cx), _num(e.cy), _num(e.a), _num(e.b),
                      _num(e.theta), _num(d.svm_score), "1" if d.accepted else "0"])


def parse_detection(line: str) -> DetectionRecord:
    f = line.rstrip("\n").split("\t")
    if len(f) != 8:
        raise ValueError(f"detection line needs 8 fields, got {len(f)}")
    cx, cy, a, b, th, score = (float(v) for v in f[1:7])
    if f[7] not in ("0", "1"):
        raise ValueError("accepted flag must be 0 or 1")
    return DetectionRecord(f[0], Ellipse(cx, cy, a, b, th), score, f[7] == "1")


def format_ground_truth(g: GroundTruth) -> str:
    return "\t".join([g.image_id, _num(g.cx), _num(g.cy), _num(g.radius), g.shape, g.color])


def parse_ground_truth(line: str) -> GroundTruth:
    f = line.rstrip("\n").split("\t")
    if len(f) != 6:
        raise ValueError(f"ground-truth line needs 6 fields, got {len(f)}")
    return GroundTruth(f[0], float(f[1]), float(f[2]), float(f[3]), f[4], f[5])


def write_lines(path, lines) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def read_detections(path) -> list[DetectionRecord]:
    with open(path, encoding="utf-8") as fh:
        return [parse_detection(line) for line in fh if line.strip()]


def read_ground_truth(path) -> list[GroundTruth]:
    with open(path, encoding="utf-8") as fh:
        return [parse_ground_truth(line) for line in fh if line.strip()]


def check_image_ids(dets, gts) -> None:
    """Raise :class:`ImageIdMismatch` when detections name images absent
    from the ground truth."""
    known = {g.image_id for g in gts}
    extra = sorted({d.image_id for d in dets} - known)
    if extra:
        raise ImageIdMismatch(f"detections for images without ground truth: {extra[:5]}")


def write_pr_csv(path, curve) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("threshold,precision,recall\n")
        for t, p, r in curve:
            fh.write(f"{_num(t)},{_num(p)},{_num(r)}\n")

