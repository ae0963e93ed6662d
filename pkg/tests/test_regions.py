import numpy as np
import pytest

from vptiler.attention import equalize
from vptiler.errors import CoverageError, EmptyInputError
from vptiler.projection import FrameGeometry, fov_mask, grid_occupancy, split_limits
from vptiler.rectpart import Rect
from vptiler.regions import (
    cells_pixel_mask,
    connected_blobs,
    determine_threshold,
    extract_buffer_inputs,
    extract_oov,
    finer_threshold,
    rasterize_to_grid,
    select_blobs,
    tiles_pixel_mask,
)

GEOM = FrameGeometry(width=40, height=20, grid_rows=4, grid_cols=8)


def raster(shape=(10, 10)):
    return np.zeros(shape, dtype=bool)


# -- determine_threshold -------------------------------------------------------


def test_all_candidates_pass_returns_largest():
    norm = np.zeros((10, 10))
    norm[2:8, 2:8] = 1.0
    mask = norm > 0
    res = determine_threshold(norm, [mask] * 3, (0.4, 0.5, 0.6, 0.7))
    assert res.chosen == 0.7
    assert all(v == pytest.approx(100.0) for v in res.coverage_by_candidate.values())


def test_first_candidate_failing_returns_smallest():
    # threshold support covers 62% of the single user's mask at every level
    norm = np.zeros((1, 100))
    norm[0, :62] = 1.0
    mask = np.zeros((1, 100), dtype=bool)
    mask[0, :100] = True
    res = determine_threshold(norm, [mask], (0.4, 0.5, 0.6, 0.7))
    assert res.chosen == 0.4
    assert res.coverage_by_candidate[0.4] == pytest.approx(62.0)
    assert res.per_user_coverage == (pytest.approx(62.0),)


def test_two_user_case_backs_off_to_previous():
    # norm levels: 0.55 ring passes 0.4/0.5 thresholds, fails at 0.6.
    # direct pixel counting: at 0.4 and 0.5 the thresholded map covers all
    # 40 user pixels; at 0.6 it covers 24 of 40 -> 60% < 80 -> back off to 0.5
    norm = np.zeros((10, 10))
    norm[0:4, 0:10] = 0.55
    norm[0:4, 0:6] = 0.95
    u1 = raster()
    u1[0:4, 0:10] = True
    u2 = raster()
    u2[0:4, 0:10] = True
    res = determine_threshold(norm, [u1, u2], (0.4, 0.5, 0.6, 0.7))
    assert res.coverage_by_candidate[0.4] == pytest.approx(100.0)
    assert res.coverage_by_candidate[0.5] == pytest.approx(100.0)
    assert res.coverage_by_candidate[0.6] == pytest.approx(60.0)
    assert res.chosen == 0.5
    assert res.per_user_coverage == (pytest.approx(100.0), pytest.approx(100.0))


def test_coverage_non_increasing_in_candidate():
    rng = np.random.default_rng(9)
    norm = equalize(np.round(rng.uniform(0, 1, (30, 30)) * 10) / 10)
    masks = [rng.uniform(0, 1, (30, 30)) > 0.5 for _ in range(5)]
    res = determine_threshold(norm, masks, (0.1, 0.3, 0.5, 0.7, 0.9), target=-1.0)
    values = [res.coverage_by_candidate[c] for c in sorted(res.coverage_by_candidate)]
    assert all(a >= b - 1e-9 for a, b in zip(values, values[1:]))


def test_empty_user_mask_is_error_naming_user():
    norm = np.ones((5, 5))
    ok = np.ones((5, 5), dtype=bool)
    with pytest.raises(CoverageError, match="user 1"):
        determine_threshold(norm, [ok, raster((5, 5))], (0.4,))


def test_empty_user_mask_convention_for_buffer():
    norm = np.ones((5, 5))
    ok = np.ones((5, 5), dtype=bool)
    res = determine_threshold(
        norm, [ok, raster((5, 5))], (0.1, 0.2), empty_mask_coverage=100.0
    )
    assert res.chosen == 0.2
    assert res.per_user_coverage[1] == 100.0


def test_candidates_must_ascend():
    with pytest.raises(EmptyInputError):
        determine_threshold(np.ones((2, 2)), [np.ones((2, 2), dtype=bool)], (0.5, 0.4))


# -- blob selection -------------------------------------------------------------


def blob_mask(*rects, shape=(12, 12)):
    out = np.zeros(shape, dtype=bool)
    for r0, c0, h, w in rects:
        out[r0 : r0 + h, c0 : c0 + w] = True
    return out


def test_single_blob_kept_whole():
    mask = blob_mask((2, 2, 3, 3))
    assert (select_blobs(mask, 95.0) == mask).all()


def test_small_blob_dropped_at_96_4():
    mask = blob_mask((0, 0, 8, 12), (10, 0, 1, 4))  # sizes 96 and 4
    sel = select_blobs(mask, 95.0)
    assert sel.sum() == 96
    assert not sel[10].any()


def test_three_blobs_60_30_10_all_kept():
    mask = blob_mask((0, 0, 6, 10), (7, 0, 3, 10), (11, 0, 1, 10), shape=(12, 12))
    assert mask.sum() == 100
    sel = select_blobs(mask, 95.0)
    assert sel.sum() == 100


def test_blob_order_size_then_anchor():
    mask = blob_mask((0, 0, 2, 2), (0, 4, 2, 2), (4, 0, 3, 3), shape=(8, 8))
    blobs = connected_blobs(mask)
    assert [b.size for b in blobs] == [9, 4, 4]
    assert blobs[1].anchor < blobs[2].anchor


def test_select_blobs_empty_is_error():
    with pytest.raises(EmptyInputError):
        select_blobs(raster(), 95.0)


# -- finer threshold ------------------------------------------------------------


def test_finer_on_binary_keeps_support():
    norm = np.zeros((6, 6))
    norm[1:4, 1:4] = 1.0
    blob = norm > 0
    assert (finer_threshold(norm, blob, 0.9) == blob).all()


def test_finer_on_uniform_half_is_empty():
    norm = np.full((6, 6), 0.5)
    blob = np.ones((6, 6), dtype=bool)
    assert not finer_threshold(norm, blob, 0.9).any()


def test_finer_two_plateau_keeps_core():
    norm = np.zeros((8, 8))
    norm[1:7, 1:7] = 0.6
    norm[3:5, 3:5] = 0.95
    blob = norm > 0
    out = finer_threshold(norm, blob, 0.9)
    expect = np.zeros_like(out)
    expect[3:5, 3:5] = True
    assert (out == expect).all()


# -- rasterization ----------------------------------------------------------------


def test_rasterize_single_pixel():
    bits = np.zeros((GEOM.height, GEOM.width), dtype=bool)
    bits[7, 11] = True
    grid = rasterize_to_grid(bits, GEOM)
    assert grid.sum() == 1
    assert grid[7 // GEOM.cell_height, 11 // GEOM.cell_width]


def test_rasterize_full_frame():
    bits = np.ones((GEOM.height, GEOM.width), dtype=bool)
    assert rasterize_to_grid(bits, GEOM).all()


def test_rasterize_equatorial_fov_bbox_6x6():
    geom = FrameGeometry()
    bits = fov_mask((0.0, 0.0), geom=geom).bits
    grid = rasterize_to_grid(bits, geom)
    rows = np.flatnonzero(grid.any(axis=1))
    cols = np.flatnonzero(grid.any(axis=0))
    assert rows[-1] - rows[0] + 1 == 6
    assert cols[-1] - cols[0] + 1 == 6


def test_cells_pixel_mask_roundtrip():
    grid = np.zeros((GEOM.grid_rows, GEOM.grid_cols), dtype=bool)
    grid[1, 3] = True
    bits = cells_pixel_mask(grid, GEOM)
    assert bits.sum() == GEOM.cell_height * GEOM.cell_width
    assert (grid_occupancy(bits, GEOM) == grid).all()


# -- buffer extraction and out-of-view -------------------------------------------


def test_buffer_zeroed_under_full_cover():
    raw = np.full((GEOM.height, GEOM.width), 0.5)
    users = [np.ones_like(raw, dtype=bool)]
    full = [Rect(0, 0, GEOM.grid_rows, GEOM.grid_cols)]
    residual, res_users = extract_buffer_inputs(raw, users, full, GEOM)
    assert not residual.any()
    assert not res_users[0].any()


def test_buffer_identity_without_tiles():
    raw = np.full((GEOM.height, GEOM.width), 0.25)
    users = [np.ones_like(raw, dtype=bool)]
    residual, res_users = extract_buffer_inputs(raw, users, [], GEOM)
    assert (residual == raw).all()
    assert (res_users[0] == users[0]).all()


def test_buffer_halves_covered_user():
    raw = np.full((GEOM.height, GEOM.width), 1.0)
    user = np.zeros_like(raw, dtype=bool)
    user[:, : GEOM.width // 2] = True  # left half = cols 0..3 of 8
    tile = [Rect(0, 0, GEOM.grid_rows, GEOM.grid_cols // 4)]  # covers cols 0..1
    residual, res_users = extract_buffer_inputs(raw, [user], tile, GEOM)
    assert res_users[0].sum() == user.sum() // 2
    assert residual[:, : GEOM.width // 4].sum() == 0


def test_oov_complement_counts():
    assert extract_oov([], GEOM).sum() == GEOM.grid_rows * GEOM.grid_cols
    full = [Rect(0, 0, GEOM.grid_rows, GEOM.grid_cols)]
    assert extract_oov(full, GEOM).sum() == 0
    some = [Rect(0, 0, 2, 3), Rect(2, 3, 1, 1)]
    assert extract_oov(some, GEOM).sum() == GEOM.grid_rows * GEOM.grid_cols - 7


def test_tiles_pixel_mask_area():
    tiles = [Rect(0, 0, 1, 2)]
    mask = tiles_pixel_mask(tiles, GEOM)
    assert mask.sum() == 2 * GEOM.cell_height * GEOM.cell_width


# -- superset property --------------------------------------------------------------


def test_rasterization_is_superset():
    rng = np.random.default_rng(2)
    bits = rng.uniform(0, 1, (GEOM.height, GEOM.width)) > 0.97
    grid = rasterize_to_grid(bits, GEOM)
    blown = cells_pixel_mask(grid, GEOM)
    assert (blown | ~bits).all()  # every set pixel lies in an active cell
