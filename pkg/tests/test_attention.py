import numpy as np
import pytest

from vptiler.attention import build_viewport_map, equalize, normalize
from vptiler.errors import EmptyInputError, GeometryError
from vptiler.projection import FovMask, FrameGeometry

GEOM = FrameGeometry(width=40, height=20, grid_rows=4, grid_cols=8)


def make_mask(bits):
    return FovMask(geometry=GEOM, bits=bits, center=(0.0, 0.0))


def blank(value=False):
    return np.full((GEOM.height, GEOM.width), value, dtype=bool)


def test_single_mask_mean_is_identity():
    bits = blank()
    bits[2:5, 3:9] = True
    amap = build_viewport_map([make_mask(bits)], GEOM)
    assert set(np.unique(amap.raw)) == {0.0, 1.0}
    assert (amap.raw == bits).all()
    assert amap.user_count == 1


def test_identical_masks_mean_unchanged():
    bits = blank()
    bits[1:4, 1:6] = True
    amap = build_viewport_map([make_mask(bits)] * 20, GEOM)
    assert (amap.raw == bits).all()


def test_disjoint_masks_half_weight():
    a, b = blank(), blank()
    a[0:3, 0:5] = True
    b[10:13, 20:25] = True
    amap = build_viewport_map([make_mask(a), make_mask(b)], GEOM)
    assert (amap.raw[a] == 0.5).all()
    assert (amap.raw[b] == 0.5).all()
    assert (amap.raw[~(a | b)] == 0.0).all()


def test_empty_mask_list_rejected():
    with pytest.raises(EmptyInputError):
        build_viewport_map([], GEOM)


def test_geometry_mismatch_rejected():
    other = FrameGeometry(width=20, height=10, grid_rows=2, grid_cols=4)
    small = FovMask(geometry=other, bits=np.zeros((10, 20), dtype=bool), center=(0, 0))
    big = make_mask(blank(True))
    with pytest.raises(GeometryError):
        build_viewport_map([big, small], GEOM)


def test_equalize_binary_stays_binary():
    raw = np.zeros((6, 6))
    raw[2:4, 2:4] = 1.0
    norm = equalize(raw)
    assert set(np.unique(norm)) == {0.0, 1.0}
    assert (norm == raw).all()


def test_equalize_four_levels_equally_spaced():
    # hand evaluation: levels 64, 128, 255 in equal counts over the support;
    # cdf = n, 2n, 3n with cdf_min = n maps them to 0, 1/2, 1
    raw = np.zeros((3, 4))
    raw[0, :] = 0.25
    raw[1, :] = 0.5
    raw[2, :] = 1.0
    norm = equalize(raw)
    assert sorted(np.unique(norm)) == pytest.approx([0.0, 0.5, 1.0])
    assert (norm[2, :] == 1.0).all()


def test_equalize_keeps_zero_pixels_zero():
    raw = np.zeros((4, 4))
    raw[0, 0] = 0.3
    raw[0, 1] = 0.9
    norm = equalize(raw)
    assert (norm[raw == 0.0] == 0.0).all()
    assert norm.max() == 1.0


def test_equalize_all_zero_is_all_zero():
    assert (equalize(np.zeros((5, 5))) == 0.0).all()


def test_normalize_monotone_and_level_preserving():
    rng = np.random.default_rng(3)
    raw = np.round(rng.uniform(0.0, 1.0, size=(16, 16)) * 20) / 20
    norm = equalize(raw)
    flat_raw = raw.ravel()
    flat_norm = norm.ravel()
    order = np.argsort(flat_raw, kind="stable")
    assert (np.diff(flat_norm[order]) >= -1e-12).all()
    for level in np.unique(flat_raw):
        values = flat_norm[flat_raw == level]
        assert np.ptp(values) == 0.0


def test_normalize_preserves_argmax_set():
    rng = np.random.default_rng(4)
    raw = rng.uniform(0.0, 1.0, size=(12, 12))
    norm = equalize(raw)
    assert (np.flatnonzero(raw == raw.max()) == np.flatnonzero(norm == norm.max())).all()


def test_normalize_idempotent_on_binary():
    raw = np.zeros((8, 8))
    raw[1:5, 2:6] = 1.0
    once = equalize(raw)
    twice = equalize(once)
    assert (once == twice).all()


def test_normalize_fills_field():
    bits = blank()
    bits[0:5, 0:5] = True
    amap = normalize(build_viewport_map([make_mask(bits)], GEOM))
    assert amap.norm is not None
    assert amap.norm.max() == 1.0
