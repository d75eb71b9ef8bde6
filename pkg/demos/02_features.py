"""What the texture and moment features see.

A sign rim seen through its binary mask is a ring; a distractor is usually a
solid blob or a bar. The six numbers per candidate separate the two.
"""

import numpy as np

from signscan.features import compute_glcm, feature_vector, haralick_features, pseudo_zernike

n = 32
yy, xx = np.mgrid[0:n, 0:n]
r = np.hypot(xx - (n - 1) / 2, yy - (n - 1) / 2)

shapes = {
    "ring": (r <= 15.5) & (r >= 11),
    "disc": r <= 15.5,
    "bar": (abs(yy - 15.5) < 4),
    "checker": (xx + yy) % 2 == 1,
}

print(f"{'':8s}{'hom':>8s}{'corr':>8s}{'var':>8s}{'dvar':>8s}{'|Z00|':>8s}{'|Z10|':>8s}")
for name, patch in shapes.items():
    print(f"{name:8s}" + "".join(f"{v:8.3f}" for v in feature_vector(patch).as_array()))

# %% The GLCM of a binary patch is a 2x2 table of neighbour-pair frequencies.
# On a checkerboard, horizontal and vertical neighbours always differ:
g = compute_glcm(shapes["checker"], offsets=[(1, 0), (0, 1)])
print("\ncheckerboard GLCM (axis offsets only):\n", g)
print("Haralick:", haralick_features(g))

# %% Moment magnitudes ignore 90-degree turns, which matters for octagons.
oct_like = shapes["ring"] & (abs(xx - yy) < 26)
for k in range(4):
    z = [abs(pseudo_zernike(np.rot90(oct_like, k), n_, m)) for n_, m in ((0, 0), (1, 0), (1, 1))]
    print(f"rot {90 * k:3d}: " + "  ".join(f"{v:.6f}" for v in z))
