"""A reduced run of the synthetic benchmark.

The full benchmark (200 test scenes, 200 training scenes) lives in
tests/test_acceptance.py. This script uses 40 of each so that it finishes in
about half a minute, then writes both precision/recall curves as CSV.

    python demos/03_benchmark.py [n_scenes]
"""

import sys

from signscan.evaluation import (
    interpolated_precision, match_detections, pr_curve, precision_recall, write_pr_csv,
)
from signscan.pipeline import scene_candidates, score_candidates, train_on_scenes
from signscan.synth import benchmark_configs

n = int(sys.argv[1]) if len(sys.argv) > 1 else 40

clf = train_on_scenes(benchmark_configs(range(10000, 10000 + n)))
print(f"classifier keeps {clf.pca.n_components} principal components")

full, base, gts = [], [], []
for image_id, cands, truth in scene_candidates(benchmark_configs(range(n))):
    full += score_candidates(cands, image_id, clf)
    base += score_candidates(cands, image_id, None)
    gts += truth

# %% Counts at the default threshold (score >= 0).
for name, dets in (("RHT only", base), ("RHT + texture", full)):
    c = match_detections(dets, gts)
    p, r = precision_recall(c)
    print(f"{name:14s} tp {c.tp:4d} fp {c.fp:4d} fn {c.fn:3d}   precision {p:.3f} recall {r:.3f}")

# %% Threshold sweeps. The baseline ranks by RHT support, the full detector by SVM score.
curves = {"rht": pr_curve(base, gts), "full": pr_curve(full, gts)}
for name, curve in curves.items():
    write_pr_csv(f"pr_{name}.csv", curve)
print("\nrecall  precision(RHT)  precision(full)")
for level in (0.5, 0.8, 0.9, 0.95):
    print(f"{level:5.2f}  {interpolated_precision(curves['rht'], level):14.3f}"
          f"  {interpolated_precision(curves['full'], level):15.3f}")
