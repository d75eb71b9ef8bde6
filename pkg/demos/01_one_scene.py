"""Walk a single synthetic scene through every stage of the detector.

Run from the repository root:  python demos/01_one_scene.py [outdir]
Images are written to ``outdir`` (default ./demo_out).
"""

import sys
from pathlib import Path

import numpy as np

from signscan import SceneConfig, synth_scene
from signscan.cli import annotate
from signscan.imagecore import extract_edges, write_image, write_mask
from signscan.pipeline import find_candidates, train_on_scenes
from signscan.rht import RhtConfig, rht_detect
from signscan.segmentation import enhance_color, segment, segment_mask
from signscan.synth import benchmark_configs

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

# %% A scene with three signs and a handful of coloured distractors.
img, truth = synth_scene(SceneConfig(seed=42, n_signs=3, n_distractors=6, noise_level=0.05))
write_image(out / "scene.png", img)
for g in truth:
    print(f"truth: {g.color:4s} {g.shape:7s} at ({g.cx:.0f}, {g.cy:.0f}) r={g.radius:.1f}")

# %% Colour enhancement turns "how red is this pixel" into one grey value.
# Neutral pixels (white, grey, black) land at zero whatever their brightness.
red = enhance_color(img, "red")
print(f"red response: mean {red.mean():.3f}, max {red.max():.3f}")
write_image(out / "red_response.png", np.repeat((255 * red).astype(np.uint8)[..., None], 3, axis=2))

# %% Threshold at mean + 4 std, clean up with open/close, keep big components.
mask = segment_mask(img, "red")
blobs = segment(img, "red")
write_mask(out / "red_mask.png", mask)
print(f"{len(blobs)} red blobs:", [b.bbox for b in blobs])

# %% Each blob's boundary pixels feed the randomized Hough transform.
for k, blob in enumerate(blobs):
    edges = extract_edges(mask, blob)
    found = rht_detect(edges, RhtConfig(rng_seed=k))
    for e in found:
        print(f"  blob {k}: ellipse ({e.cx:.1f}, {e.cy:.1f}) a={e.a:.1f} b={e.b:.1f} "
              f"support={e.support:.2f}")

# %% Everything above, for both channels, is find_candidates. Some candidates
# are distractors that happen to be round, which is what the classifier is for.
cands = find_candidates(img)
print(f"{len(cands)} candidates over both channels")

clf = train_on_scenes(benchmark_configs(range(10000, 10040)))
kept = []
for c in cands:
    score, label = clf.decide(c.features.as_array())
    print(f"  {c.channel.value:4s} ({c.ellipse.cx:5.1f}, {c.ellipse.cy:5.1f}) score {score:+.2f}")
    if label > 0:
        kept.append(c.ellipse)

write_image(out / "detections.png", annotate(img, kept))
print(f"kept {len(kept)} of {len(cands)}; images in {out}/")
