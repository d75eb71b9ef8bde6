import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from signscan.segmentation import (
    Channel, SegmentationConfig, adaptive_threshold, enhance_color, segment, segment_mask,
)


def enhance_oracle(img, channel):
    h, w, _ = img.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            r, g, b = (int(v) for v in img[y, x])
            s = r + g + b
            if s == 0:
                continue
            d = min(r - g, r - b) if channel == "red" else min(b - g, b - r)
            out[y, x] = max(0.0, d / s)
    return out


def _px(rgb):
    return np.array([[rgb]], dtype=np.uint8)


def test_enhance_examples():
    assert enhance_color(_px((255, 0, 0)), Channel.RED)[0, 0] == 1.0
    assert abs(enhance_color(_px((200, 100, 50)), "red")[0, 0] - 100 / 350) < 1e-15
    for g in (0, 1, 77, 255):
        for ch in Channel:
            assert enhance_color(_px((g, g, g)), ch)[0, 0] == 0


def test_enhance_blue_saturated():
    assert enhance_color(_px((0, 0, 200)), Channel.BLUE)[0, 0] == 1.0
    assert enhance_color(_px((0, 0, 200)), Channel.RED)[0, 0] == 0.0


@given(arrays(np.uint8, (4, 5, 3)), st.sampled_from(["red", "blue"]))
@settings(max_examples=100, deadline=None)
def test_enhance_matches_oracle(img, ch):
    got = enhance_color(img, ch)
    np.testing.assert_allclose(got, enhance_oracle(img, ch), rtol=0, atol=1e-15)
    assert ((got >= 0) & (got <= 1)).all()


def test_threshold_constant_image():
    assert not adaptive_threshold(np.full((6, 6), 0.3), 4).any()


def test_threshold_single_bright_pixel():
    g = np.zeros(100)
    g[37] = 1.0
    m = adaptive_threshold(g.reshape(10, 10), 4.0)
    assert m.sum() == 1 and m.reshape(-1)[37]


def test_threshold_two_values():
    g = np.array([0.0, 1.0] * 50).reshape(10, 10)
    assert not adaptive_threshold(g, 4.0).any()


@given(arrays(np.float64, (7, 7), elements=st.floats(0, 1)), st.floats(0.1, 5))
@settings(max_examples=100, deadline=None)
def test_threshold_is_mu_plus_alpha_sigma(g, alpha):
    t = g.mean() + alpha * g.std()
    np.testing.assert_array_equal(adaptive_threshold(g, alpha), g > t)


def _scene(extra_speck=False):
    img = np.full((200, 200, 3), 128, np.uint8)
    yy, xx = np.mgrid[0:200, 0:200]
    disk = (xx - 90) ** 2 + (yy - 110) ** 2 <= 20**2
    img[disk] = (220, 30, 30)
    if extra_speck:
        img[20:22, 160:162] = (220, 30, 30)
    return img


def test_segment_gray_image():
    assert segment(np.full((50, 50, 3), 90, np.uint8), Channel.RED) == []


@pytest.mark.parametrize("speck", [False, True])
def test_segment_one_disk(speck):
    blobs = segment(_scene(speck), Channel.RED)
    assert len(blobs) == 1
    x0, y0, x1, y1 = blobs[0].bbox
    r = SegmentationConfig().morph_radius
    assert abs(x0 - 70) <= r and abs(x1 - 110) <= r
    assert abs(y0 - 90) <= r and abs(y1 - 130) <= r


def test_segment_blue_channel_ignores_red():
    assert segment(_scene(), Channel.BLUE) == []


def test_segment_mask_is_cleaned():
    img = _scene()
    img[5, 5] = (255, 0, 0)
    m = segment_mask(img, Channel.RED)
    assert not m[5, 5] and m[110, 90]


def test_config_validation():
    for kw in ({"alpha": 0}, {"morph_radius": 0}, {"min_area": 0}):
        with pytest.raises(ValueError):
            SegmentationConfig(**kw)
