import math

import numpy as np
import pytest

from signscan.evaluation import is_match, match_detections
from signscan.imagecore import Blob
from signscan.pipeline import (
    PipelineConfig, candidate_blob, ellipse_bbox, find_candidates, label_candidates,
    map_ordered, run_pipeline, scene_candidates, suppress_nested, training_set,
)
from signscan.rht import Ellipse
from signscan.segmentation import Channel
from signscan.synth import GroundTruth, LayoutFailure, SceneConfig, _Layout, synth_scene


# -- scenes ----------------------------------------------------------------------

def test_scene_deterministic():
    cfg = SceneConfig(seed=5)
    a, ga = synth_scene(cfg)
    b, gb = synth_scene(cfg)
    assert a.tobytes() == b.tobytes() and ga == gb
    assert a.shape == (480, 640, 3) and a.dtype == np.uint8


def test_scene_seeds_differ():
    assert synth_scene(SceneConfig(seed=1))[0].tobytes() != synth_scene(SceneConfig(seed=2))[0].tobytes()


def test_scene_ground_truth_valid():
    for s in range(30):
        cfg = SceneConfig(seed=s)
        _, gts = synth_scene(cfg)
        assert 1 <= len(gts) <= 3
        for g in gts:
            assert 10 <= g.radius <= 40
            assert g.radius <= g.cx <= cfg.width - g.radius
            assert g.radius <= g.cy <= cfg.height - g.radius
            assert (g.shape, g.color) in {("circle", "red"), ("octagon", "red"), ("circle", "blue")}
            assert g.image_id == f"scene_{s:05d}"
        for g, h in zip(gts, gts[1:]):
            assert math.hypot(g.cx - h.cx, g.cy - h.cy) > g.radius + h.radius


def test_distractors_only():
    img, gts = synth_scene(SceneConfig(n_signs=0, n_distractors=4, seed=3))
    assert gts == []
    assert (np.abs(img.astype(int) - img[0, 0]).sum(axis=2) > 100).any()


def test_noiseless_sign_pixels():
    img, (g,) = synth_scene(SceneConfig(n_signs=1, n_distractors=0, noise_level=0, seed=4))
    rim = img[int(round(g.cy)), int(round(g.cx - g.radius + 1.5))]
    assert rim[0] > 150 or rim[2] > 150


def test_layout_failure():
    layout = _Layout(np.random.default_rng(0), 100, 100)
    layout.place(45)
    with pytest.raises(LayoutFailure):
        layout.place(45)


@pytest.mark.parametrize("kw", [{"n_signs": 4}, {"noise_level": 2}, {"min_radius": 5},
                                {"width": 50}, {"n_distractors": -1}])
def test_scene_config_validation(kw):
    with pytest.raises(ValueError):
        SceneConfig(**kw)


def test_ground_truth_radius():
    with pytest.raises(ValueError):
        GroundTruth("x", 0, 0, 0, "circle", "red")


# -- pipeline pieces -----------------------------------------------------------------

def test_ellipse_bbox():
    assert ellipse_bbox(Ellipse(10, 20, 5, 3, 0)) == (5, 17, 15, 23)
    x0, y0, x1, y1 = ellipse_bbox(Ellipse(0, 0, 5, 3, math.pi / 2))
    assert (x0, x1, y0, y1) == pytest.approx((-3, 3, -5, 5))


def test_candidate_blob_crops():
    pix = [(x, y) for x in range(0, 40) for y in range(0, 10)]
    b = Blob.from_pixels(pix)
    sub = candidate_blob(b, Ellipse(5, 5, 4, 4), margin=1)
    assert sub.bbox == (0, 0, 10, 9)
    assert candidate_blob(b, Ellipse(100, 100, 4, 4)) is None


def test_suppress_nested():
    outer, inner, apart = Ellipse(0, 0, 20, 20), Ellipse(1, 0, 15, 15), Ellipse(60, 0, 10, 10)
    assert suppress_nested([inner, apart, outer]) == [apart, outer]


def test_label_candidates():
    class C:
        def __init__(self, e):
            self.ellipse = e
    g = [GroundTruth("a", 50, 50, 20, "circle", "red")]
    cands = [C(Ellipse(50, 50, 15, 15)), C(Ellipse(50, 50, 20, 19)), C(Ellipse(0, 0, 20, 20))]
    assert label_candidates(cands, g).tolist() == [-1, 1, -1]


def test_map_ordered():
    assert map_ordered(lambda v: v * v, range(20), workers=4) == [v * v for v in range(20)]


# -- end to end -------------------------------------------------------------------------

def test_blank_image():
    assert run_pipeline(np.full((120, 160, 3), 128, np.uint8)) == []


@pytest.mark.parametrize("seed", [4, 12, 31])
def test_noiseless_single_sign_rht(seed):
    img, (g,) = synth_scene(SceneConfig(n_signs=1, n_distractors=0, noise_level=0, seed=seed))
    recs = run_pipeline(img)
    assert recs and any(math.hypot(r.ellipse.cx - g.cx, r.ellipse.cy - g.cy) <= 2 for r in recs)


@pytest.mark.parametrize("seed", [4, 12, 31])
def test_noiseless_single_sign_classified(seed, small_classifier):
    img, gts = synth_scene(SceneConfig(n_signs=1, n_distractors=0, noise_level=0, seed=seed))
    accepted = [r for r in run_pipeline(img, classifier=small_classifier) if r.accepted]
    assert len(accepted) == 1 and is_match(accepted[0].ellipse, gts[0])


def test_classifier_cuts_false_records(small_classifier):
    fp_rht = fp_full = 0
    for seed in range(500, 506):
        img, gts = synth_scene(SceneConfig(n_distractors=8, seed=seed))
        fp_rht += match_detections(run_pipeline(img), gts).fp
        fp_full += match_detections(run_pipeline(img, classifier=small_classifier), gts).fp
    assert fp_rht >= 1 and fp_full < fp_rht


def test_channel_selection():
    img, _ = synth_scene(SceneConfig(n_signs=3, seed=8))
    both = find_candidates(img)
    red = find_candidates(img, PipelineConfig(channels=(Channel.RED,)))
    assert {c.channel for c in red} <= {Channel.RED}
    assert len(red) <= len(both)


def test_scene_candidates_thread_invariant():
    cfgs = [SceneConfig(seed=s) for s in range(3)]
    one = scene_candidates(cfgs, workers=1)
    many = scene_candidates(cfgs, workers=3)
    assert one == many


def test_training_set_shapes():
    x, y = training_set([SceneConfig(seed=s) for s in range(10000, 10003)])
    assert x.shape[1] == 6 and len(x) == len(y) and set(y.tolist()) <= {-1, 1}
    assert (y > 0).sum() >= 1
