import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from signscan.imagecore import (
    Blob, connected_components, extract_edges, morph_filter, read_image, read_mask,
    write_image, write_mask,
)


def flood_fill_components(mask):
    """Reference labelling: explicit stack flood fill over 8-neighbours."""
    h, w = mask.shape
    seen = np.zeros_like(mask, dtype=bool)
    comps = []
    for y in range(h):
        for x in range(w):
            if not mask[y, x] or seen[y, x]:
                continue
            stack, comp = [(x, y)], []
            seen[y, x] = True
            while stack:
                cx, cy = stack.pop()
                comp.append((cx, cy))
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        nx, ny = cx + dx, cy + dy
                        if 0 <= nx < w and 0 <= ny < h and mask[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            stack.append((nx, ny))
            comps.append(frozenset(comp))
    return comps


def sweep(mask, op, r):
    """Reference erosion/dilation by looping over the square element."""
    h, w = mask.shape

    def erode(m):
        out = np.zeros_like(m)
        for y in range(h):
            for x in range(w):
                out[y, x] = all(
                    0 <= y + dy < h and 0 <= x + dx < w and m[y + dy, x + dx]
                    for dy in range(-r, r + 1) for dx in range(-r, r + 1))
        return out

    def dilate(m):
        out = np.zeros_like(m)
        for y in range(h):
            for x in range(w):
                out[y, x] = any(
                    0 <= y + dy < h and 0 <= x + dx < w and m[y + dy, x + dx]
                    for dy in range(-r, r + 1) for dx in range(-r, r + 1))
        return out

    if op == "open":
        return dilate(erode(mask))
    # closing: dilation may reach beyond the frame, so work on a padded copy
    pad = np.pad(mask, r)
    hh, ww = pad.shape
    dil = np.zeros_like(pad)
    for y in range(hh):
        for x in range(ww):
            dil[y, x] = any(
                0 <= y + dy < hh and 0 <= x + dx < ww and pad[y + dy, x + dx]
                for dy in range(-r, r + 1) for dx in range(-r, r + 1))
    ero = np.zeros_like(pad)
    for y in range(hh):
        for x in range(ww):
            ero[y, x] = all(
                0 <= y + dy < hh and 0 <= x + dx < ww and dil[y + dy, x + dx]
                for dy in range(-r, r + 1) for dx in range(-r, r + 1))
    return ero[r:-r, r:-r]


def edge_oracle(mask, blob):
    h, w = mask.shape
    out = set()
    for x, y in blob.pixels:
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                nx, ny = x + dx, y + dy
                if not (0 <= nx < w and 0 <= ny < h) or not mask[ny, nx]:
                    out.add((int(x), int(y)))
    return out


masks = arrays(bool, st.tuples(st.integers(3, 14), st.integers(3, 14)))


# -- connected components ---------------------------------------------------

def test_empty_mask_has_no_components():
    assert connected_components(np.zeros((8, 8), bool), min_area=1) == []


def test_single_square():
    m = np.zeros((10, 10), bool)
    m[2:5, 3:6] = True
    (b,) = connected_components(m, min_area=1)
    assert b.area == 9
    assert b.bbox == (3, 2, 5, 4)


def test_two_squares_split_by_column():
    m = np.zeros((6, 9), bool)
    m[1:4, 1:4] = True
    m[1:4, 5:8] = True
    blobs = connected_components(m, min_area=1)
    got = {frozenset(map(tuple, b.pixels.tolist())) for b in blobs}
    assert got == set(flood_fill_components(m))
    assert len(blobs) == 2


def test_diagonal_pixels_are_connected():
    m = np.eye(5, dtype=bool)
    assert len(connected_components(m, min_area=1)) == 1


def test_min_area_filters():
    m = np.zeros((10, 10), bool)
    m[0:2, 0:2] = True
    m[5:9, 5:9] = True
    blobs = connected_components(m, min_area=5)
    assert [b.area for b in blobs] == [16]


@given(masks, st.integers(1, 6))
@settings(max_examples=60, deadline=None)
def test_components_partition_foreground(m, min_area):
    blobs = connected_components(m, min_area)
    expect = {c for c in flood_fill_components(m) if len(c) >= min_area}
    got = [frozenset(map(tuple, b.pixels.tolist())) for b in blobs]
    assert len(got) == len(set(got))
    assert set(got) == expect
    for b in blobs:
        xs, ys = b.pixels[:, 0], b.pixels[:, 1]
        assert b.bbox == (xs.min(), ys.min(), xs.max(), ys.max())


# -- morphology --------------------------------------------------------------

def test_full_mask_opens_to_itself():
    m = np.ones((10, 10), bool)
    assert morph_filter(m, "open", 1).all()


def test_opening_removes_speck():
    m = np.zeros((9, 9), bool)
    m[4, 4] = True
    assert not morph_filter(m, "open", 1).any()


def test_closing_fills_hole():
    m = np.ones((9, 9), bool)
    m[4, 4] = False
    assert morph_filter(m, "close", 1).all()
    m2 = np.ones((9, 9), bool)
    m2[0, 3] = False
    assert morph_filter(m2, "close", 1).all()


def test_bad_radius_and_op():
    m = np.zeros((4, 4), bool)
    with pytest.raises(ValueError):
        morph_filter(m, "open", 0)
    with pytest.raises(ValueError):
        morph_filter(m, "erode", 1)


@given(masks, st.sampled_from(["open", "close"]), st.integers(1, 2))
@settings(max_examples=40, deadline=None)
def test_morph_matches_sweep(m, op, r):
    np.testing.assert_array_equal(morph_filter(m, op, r), sweep(m, op, r))


@given(masks, st.sampled_from(["open", "close"]))
@settings(max_examples=60, deadline=None)
def test_morph_idempotent(m, op):
    once = morph_filter(m, op, 1)
    np.testing.assert_array_equal(morph_filter(once, op, 1), once)


# -- edges ---------------------------------------------------------------------

def test_single_pixel_edge():
    m = np.zeros((5, 5), bool)
    m[2, 2] = True
    (b,) = connected_components(m, 1)
    assert extract_edges(m, b).tolist() == [[2, 2]]


def test_square_perimeter():
    m = np.zeros((9, 9), bool)
    m[2:7, 2:7] = True
    (b,) = connected_components(m, 1)
    e = extract_edges(m, b)
    assert len(e) == 16
    assert set(map(tuple, e.tolist())) == edge_oracle(m, b)


def test_disk_edge_count():
    r = 10
    yy, xx = np.mgrid[0:41, 0:41]
    m = (xx - 20) ** 2 + (yy - 20) ** 2 <= r * r
    (b,) = connected_components(m, 1)
    n = len(extract_edges(m, b))
    assert 2 * math.pi * r * 0.8 <= n <= 2 * math.pi * r * 1.3


def test_blob_touching_frame_has_border_edges():
    m = np.ones((6, 6), bool)
    (b,) = connected_components(m, 1)
    assert len(extract_edges(m, b)) == 20


@given(masks)
@settings(max_examples=60, deadline=None)
def test_edges_match_oracle_and_are_subset(m):
    for b in connected_components(m, 1):
        e = extract_edges(m, b)
        pts = set(map(tuple, e.tolist()))
        assert len(pts) == len(e)
        assert pts <= set(map(tuple, b.pixels.tolist()))
        assert pts == edge_oracle(m, b)


def test_blob_from_pixels():
    b = Blob.from_pixels([(3, 4), (5, 2)])
    assert b.bbox == (3, 2, 5, 4)
    assert b.local_mask().shape == (3, 3)
    with pytest.raises(ValueError):
        Blob.from_pixels([])


# -- I/O -------------------------------------------------------------------------

def test_png_and_ppm_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, size=(7, 5, 3), dtype=np.uint8)
    for name in ("a.png", "a.ppm"):
        write_image(tmp_path / name, img)
        np.testing.assert_array_equal(read_image(tmp_path / name), img)
    assert (tmp_path / "a.ppm").read_bytes().startswith(b"P6")


def test_mask_png(tmp_path):
    m = np.zeros((4, 6), bool)
    m[1, 2] = True
    write_mask(tmp_path / "m.png", m)
    from PIL import Image
    with Image.open(tmp_path / "m.png") as im:
        assert im.mode == "L"
        assert set(np.unique(np.asarray(im))) == {0, 255}
    np.testing.assert_array_equal(read_mask(tmp_path / "m.png"), m)
