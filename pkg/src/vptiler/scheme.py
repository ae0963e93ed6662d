"""Per-keyframe tile derivation: regions in, a full-frame tile cover out.

Stage order per keyframe:

1. average user masks, equalize, pick the attention threshold;
2. rasterize the thresholded map to the cell grid, keep the dominant
   blobs, seed the fine region at the higher threshold;
3. expand each fine component to a rectangle inside its blob, partition
   the blob remainders (holes allowed), remove any overlaps;
4. repeat threshold + blobs on the residual attention for the buffer;
5. everything still uncovered becomes the out-of-view region;
6. split tiles that exceed the latitude-dependent size limits.

The result is validated to tile the frame exactly.
"""

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import attention, regions
from .errors import SchemeError
from .projection import DEFAULT_FOV, FrameGeometry, fov_mask, split_limits
from .rectpart import Rect, RectilinearRegion, partition, regions_from_cells
from .traces import sample_keyframes

FORMAT_VERSION = 1

REGION_FOV_FINE = "fov_fine"
REGION_FOV = "fov"
REGION_BUFFER = "buffer"
REGION_OOV = "oov"
REGION_ORDER = (REGION_FOV_FINE, REGION_FOV, REGION_BUFFER, REGION_OOV)


@dataclass(frozen=True)
class ThresholdParams:
    candidates: tuple = regions.THRESHOLD_CANDIDATES
    buffer_candidates: tuple = regions.BUFFER_CANDIDATES
    finer: float = regions.FINER_THRESHOLD
    coverage_target: float = regions.COVERAGE_TARGET
    blob_keep: float = regions.BLOB_KEEP


@dataclass(frozen=True)
class DerivedTile:
    rect: Rect
    region: str
    mean_intensity: float = 0.0
    pixel_area: int = 0


@dataclass(frozen=True)
class TileScheme:
    keyframe_time: float
    gamma: float
    alpha: float
    beta: float  # None when the frame produced no buffer region
    th_f: float
    tiles: tuple


@dataclass(frozen=True)
class VideoScheme:
    video_id: str
    geometry: FrameGeometry
    gamma: float
    keyframes: tuple


@dataclass
class StageClock:
    """Accumulates wall-clock seconds per pipeline stage."""

    stages: dict = field(default_factory=dict)

    def add(self, stage, seconds):
        self.stages[stage] = self.stages.get(stage, 0.0) + seconds


class _timed:
    def __init__(self, clock, stage):
        self.clock = clock
        self.stage = stage

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        if self.clock is not None:
            self.clock.add(self.stage, time.perf_counter() - self.t0)
        return False


def expand_fovf(finer_components, blob_cells, occupied=()):
    """Grow each fine component's bounding box into a maximal rectangle.

    Components are processed largest first.  A side stops growing when
    the next line of cells would leave the blob or enter a rectangle
    placed earlier; `occupied` seeds that constraint with rectangles
    from other blobs.
    """
    comps = sorted(finer_components, key=lambda c: (-len(c), min(c)))
    occupied_cells = set()
    for rect in occupied:
        occupied_cells.update(rect.cells())
    rects = []
    for comp in comps:
        rect = _expand_one(comp, blob_cells, occupied_cells)
        rects.append(rect)
        occupied_cells.update(rect.cells())
    return rects


def _expand_one(comp, blob_cells, occupied_cells):
    rows = [r for r, _ in comp]
    cols = [c for _, c in comp]
    r0, r1 = min(rows), max(rows) + 1
    c0, c1 = min(cols), max(cols) + 1

    def strip_ok(cells):
        return all(c in blob_cells and c not in occupied_cells for c in cells)

    active = {"left", "right", "up", "down"}
    while active:
        for side in ("left", "right", "up", "down"):
            if side not in active:
                continue
            if side == "left":
                strip = [(r, c0 - 1) for r in range(r0, r1)]
            elif side == "right":
                strip = [(r, c1) for r in range(r0, r1)]
            elif side == "up":
                strip = [(r0 - 1, c) for c in range(c0, c1)]
            else:
                strip = [(r1, c) for c in range(c0, c1)]
            if strip_ok(strip):
                if side == "left":
                    c0 -= 1
                elif side == "right":
                    c1 += 1
                elif side == "up":
                    r0 -= 1
                else:
                    r1 += 1
            else:
                active.discard(side)
    return Rect(r0, c0, r1 - r0, c1 - c0)


def partition_fov_with_holes(blob_cells, fovf_rects):
    """Fine rectangles plus a partition of what the blob has left."""
    tiles = [DerivedTile(rect=r, region=REGION_FOV_FINE) for r in fovf_rects]
    remainder = set(blob_cells)
    for rect in fovf_rects:
        remainder -= rect.cell_set()
    for region in regions_from_cells(remainder):
        for rect in partition(region):
            tiles.append(DerivedTile(rect=rect, region=REGION_FOV))
    return tiles


def _tile_sort_key(tile):
    return (tile.rect.row0, tile.rect.col0, tile.rect.h, tile.rect.w, tile.region)


def remove_overlaps(tiles):
    """Clip overlapping tiles, always carving the smaller of a pair.

    Pairs are resolved in descending order of the larger tile's area
    (area ties fall back to rectangle position); non-rectangular
    remainders are re-partitioned.  Tiles fully contained in a larger
    one disappear.
    """
    tiles = sorted(tiles, key=_tile_sort_key)
    while True:
        pair = _first_overlap(tiles)
        if pair is None:
            return tiles
        larger, smaller = pair
        inter = larger.rect.intersection(smaller.rect)
        remainder = smaller.rect.cell_set() - inter.cell_set()
        tiles.remove(smaller)
        for region in regions_from_cells(remainder):
            for rect in partition(region):
                tiles.append(replace(smaller, rect=rect))
        tiles.sort(key=_tile_sort_key)


def _first_overlap(tiles):
    best = None
    for i in range(len(tiles)):
        for j in range(i + 1, len(tiles)):
            a, b = tiles[i], tiles[j]
            if a.rect.intersection(b.rect) is None:
                continue
            if (a.rect.area, _tile_sort_key(b)) > (b.rect.area, _tile_sort_key(a)):
                larger, smaller = a, b
            else:
                larger, smaller = b, a
            key = (-larger.rect.area, _tile_sort_key(larger), _tile_sort_key(smaller))
            if best is None or key < best[0]:
                best = (key, larger, smaller)
    if best is None:
        return None
    return best[1], best[2]


def _chunk_cuts(lo, hi, step, center):
    cuts = set()
    if lo < center < hi:
        c = center
        while c > lo:
            if c < hi:
                cuts.add(c)
            c -= step
        c = center + step
        while c < hi:
            if c > lo:
                cuts.add(c)
            c += step
    elif lo >= center:
        c = lo + step
        while c < hi:
            cuts.add(c)
            c += step
    else:
        c = hi - step
        while c > lo:
            cuts.add(c)
            c -= step
    bounds = [lo] + sorted(cuts) + [hi]
    return list(zip(bounds, bounds[1:]))


def _tile_limits(rect, limits, gamma):
    mid_row = rect.row0 + (rect.h - 1) // 2
    vmax = max(1, math.ceil(gamma * limits.vt_max[mid_row]))
    hmax = max(1, math.ceil(gamma * limits.ht_max[mid_row]))
    return vmax, hmax


def split_large(tiles, limits, gamma, geom):
    """Chunk oversized tiles outward from the frame center lines.

    Each tile is checked against the limits at its own center row;
    split pieces re-enter the queue because their centers move.
    """
    if not 0.0 < gamma <= 1.0:
        raise SchemeError(f"gamma must lie in (0, 1], got {gamma}")
    center_col = geom.grid_cols // 2
    center_row = geom.grid_rows // 2
    out = []
    queue = list(tiles)
    while queue:
        tile = queue.pop(0)
        rect = tile.rect
        vmax, hmax = _tile_limits(rect, limits, gamma)
        if rect.h <= vmax and rect.w <= hmax:
            out.append(tile)
            continue
        col_spans = (
            _chunk_cuts(rect.col0, rect.col1, hmax, center_col)
            if rect.w > hmax
            else [(rect.col0, rect.col1)]
        )
        row_spans = (
            _chunk_cuts(rect.row0, rect.row1, vmax, center_row)
            if rect.h > vmax
            else [(rect.row0, rect.row1)]
        )
        for rr0, rr1 in row_spans:
            for cc0, cc1 in col_spans:
                queue.append(replace(tile, rect=Rect(rr0, cc0, rr1 - rr0, cc1 - cc0)))
    return sorted(out, key=_tile_sort_key)


def validate_cover(tiles, geom, stage):
    seen = np.zeros((geom.grid_rows, geom.grid_cols), dtype=bool)
    for tile in tiles:
        r = tile.rect
        if r.row0 < 0 or r.col0 < 0 or r.row1 > geom.grid_rows or r.col1 > geom.grid_cols:
            raise SchemeError(f"{stage}: tile {r} exceeds the grid")
        block = seen[r.row0 : r.row1, r.col0 : r.col1]
        if block.any():
            raise SchemeError(f"{stage}: tile {r} overlaps an earlier tile")
        seen[r.row0 : r.row1, r.col0 : r.col1] = True
    if not seen.all():
        raise SchemeError(f"{stage}: tiles do not cover the full grid")


@dataclass(frozen=True)
class KeyframeRegions:
    """Pre-split tiles for one keyframe, shared by all gamma values."""

    tiles: tuple
    alpha: float
    beta: float
    norm: np.ndarray


def derive_keyframe_regions(masks, geom, params=ThresholdParams(), clock=None):
    """Run thresholding + partitioning for one keyframe (gamma-free part)."""
    with _timed(clock, "pre.fov"):
        amap = attention.normalize(attention.build_viewport_map(masks, geom))
        user_bits = [m.bits for m in masks]
        search = regions.determine_threshold(
            amap.norm, user_bits, params.candidates, params.coverage_target
        )
        alpha = search.chosen
        alpha_px = amap.norm >= alpha
        alpha_grid = regions.rasterize_to_grid(alpha_px, geom)
        fov_grid = regions.select_blobs(alpha_grid, params.blob_keep)
        finer_px = regions.finer_threshold(
            amap.norm, regions.cells_pixel_mask(fov_grid, geom), params.finer
        )
        finer_grid = regions.rasterize_to_grid(finer_px, geom)

    with _timed(clock, "part.fov"):
        tiles = _partition_fov(fov_grid, finer_grid)
        tiles = remove_overlaps(tiles)

    with _timed(clock, "pre.buf"):
        buf_raw, buf_users = regions.extract_buffer_inputs(
            amap.raw, user_bits, tiles, geom
        )
        beta = None
        buf_grid = None
        if buf_raw.any():
            buf_norm = attention.equalize(buf_raw)
            buf_search = regions.determine_threshold(
                buf_norm,
                buf_users,
                params.buffer_candidates,
                params.coverage_target,
                empty_mask_coverage=100.0,
            )
            beta = buf_search.chosen
            buf_px = buf_norm >= beta
            if buf_px.any():
                buf_grid = regions.select_blobs(
                    regions.rasterize_to_grid(buf_px, geom), params.blob_keep
                )

    with _timed(clock, "part.buf"):
        if buf_grid is not None:
            for region in regions_from_cells(_grid_cells(buf_grid)):
                for rect in partition(region):
                    tiles.append(DerivedTile(rect=rect, region=REGION_BUFFER))

    with _timed(clock, "pre.oov"):
        oov_grid = regions.extract_oov(tiles, geom)

    with _timed(clock, "part.oov"):
        for region in regions_from_cells(_grid_cells(oov_grid)):
            for rect in partition(region):
                tiles.append(DerivedTile(rect=rect, region=REGION_OOV))

    tiles = remove_overlaps(tiles)
    validate_cover(tiles, geom, "region assembly")
    return KeyframeRegions(
        tiles=tuple(sorted(tiles, key=_tile_sort_key)),
        alpha=alpha,
        beta=beta,
        norm=amap.norm,
    )


def _grid_cells(grid):
    return [(int(r), int(c)) for r, c in zip(*np.nonzero(grid))]


def _partition_fov(fov_grid, finer_grid):
    blobs = [reg.cells for reg in regions_from_cells(_grid_cells(fov_grid))]
    finer_comps = []  # (component cells, owning blob cells)
    for comp_region in regions_from_cells(_grid_cells(finer_grid)):
        comp = comp_region.cells
        owner = next(b for b in blobs if min(comp) in b)
        finer_comps.append((comp, owner))
    finer_comps.sort(key=lambda cb: (-len(cb[0]), min(cb[0])))

    rects_by_blob = {id(b): [] for b in blobs}
    placed = []
    for comp, owner in finer_comps:
        rect = expand_fovf([comp], owner, occupied=placed)[0]
        placed.append(rect)
        rects_by_blob[id(owner)].append(rect)

    tiles = []
    for blob in blobs:
        tiles.extend(partition_fov_with_holes(blob, rects_by_blob[id(blob)]))
    return tiles


def finalize_scheme(kf_regions, gamma, limits, geom, keyframe_time, params=ThresholdParams(), clock=None):
    """Apply the gamma-scaled size limits and attach tile statistics."""
    with _timed(clock, "post"):
        tiles = split_large(list(kf_regions.tiles), limits, gamma, geom)
        tiles = [_with_stats(t, kf_regions.norm, geom) for t in tiles]
        validate_cover(tiles, geom, "post-processing")
        for tile in tiles:
            vmax, hmax = _tile_limits(tile.rect, limits, gamma)
            if tile.rect.h > vmax or tile.rect.w > hmax:
                raise SchemeError(f"post-processing: tile {tile.rect} exceeds its size limit")
    return TileScheme(
        keyframe_time=keyframe_time,
        gamma=gamma,
        alpha=kf_regions.alpha,
        beta=kf_regions.beta,
        th_f=params.finer,
        tiles=tuple(tiles),
    )


def _with_stats(tile, norm, geom):
    r = tile.rect
    ch, cw = geom.cell_height, geom.cell_width
    block = norm[r.row0 * ch : r.row1 * ch, r.col0 * cw : r.col1 * cw]
    return replace(
        tile,
        mean_intensity=float(block.mean()),
        pixel_area=int(block.size),
    )


def build_scheme(masks, geom, gamma=1.0, keyframe_time=0.0, params=ThresholdParams(),
                 limits=None, fov=None, clock=None):
    """Full single-keyframe pipeline: user masks to a validated TileScheme."""
    if limits is None:
        limits = split_limits(geom) if fov is None else split_limits(geom, fov)
    kf = derive_keyframe_regions(masks, geom, params, clock)
    return finalize_scheme(kf, gamma, limits, geom, keyframe_time, params, clock)


def keyframe_masks(traces, geom, fov=DEFAULT_FOV, gap=0.5, user_ids=None):
    """Per keyframe, the FoV masks of the chosen users, in user-id order."""
    if user_ids is None:
        user_ids = traces.user_ids
    out = []
    for kf in sample_keyframes(traces, gap):
        masks = [
            fov_mask((kf.samples[uid].yaw, kf.samples[uid].pitch), fov, geom)
            for uid in user_ids
        ]
        out.append((kf.t, masks))
    return out


def build_video_schemes(traces, geom, gammas=(1.0,), params=ThresholdParams(),
                        fov=DEFAULT_FOV, gap=0.5, build_users=None):
    """One VideoScheme per gamma; the region pipeline runs once per keyframe."""
    limits = split_limits(geom, fov)
    per_gamma = {g: [] for g in gammas}
    for t, masks in keyframe_masks(traces, geom, fov, gap, build_users):
        kf_regions = derive_keyframe_regions(masks, geom, params)
        for gamma in gammas:
            per_gamma[gamma].append(
                finalize_scheme(kf_regions, gamma, limits, geom, t, params)
            )
    return {
        gamma: VideoScheme(
            video_id=traces.video_id,
            geometry=geom,
            gamma=gamma,
            keyframes=tuple(keyframes),
        )
        for gamma, keyframes in per_gamma.items()
    }


def scheme_to_dict(video_scheme):
    geom = video_scheme.geometry
    return {
        "format_version": FORMAT_VERSION,
        "video_id": video_scheme.video_id,
        "geometry": {
            "width": geom.width,
            "height": geom.height,
            "grid_rows": geom.grid_rows,
            "grid_cols": geom.grid_cols,
        },
        "gamma": video_scheme.gamma,
        "keyframes": [
            {
                "t": kf.keyframe_time,
                "alpha": kf.alpha,
                "beta": kf.beta,
                "th_f": kf.th_f,
                "tiles": [
                    {
                        "r0": t.rect.row0,
                        "c0": t.rect.col0,
                        "h": t.rect.h,
                        "w": t.rect.w,
                        "region": t.region,
                        "mean_intensity": round(t.mean_intensity, 6),
                    }
                    for t in kf.tiles
                ],
            }
            for kf in video_scheme.keyframes
        ],
    }


def scheme_from_dict(doc):
    geom = FrameGeometry(
        width=doc["geometry"]["width"],
        height=doc["geometry"]["height"],
        grid_rows=doc["geometry"]["grid_rows"],
        grid_cols=doc["geometry"]["grid_cols"],
    )
    keyframes = []
    for kf in doc["keyframes"]:
        tiles = tuple(
            DerivedTile(
                rect=Rect(t["r0"], t["c0"], t["h"], t["w"]),
                region=t["region"],
                mean_intensity=t["mean_intensity"],
                pixel_area=t["h"] * t["w"] * geom.cell_height * geom.cell_width,
            )
            for t in kf["tiles"]
        )
        keyframes.append(
            TileScheme(
                keyframe_time=kf["t"],
                gamma=doc["gamma"],
                alpha=kf["alpha"],
                beta=kf["beta"],
                th_f=kf["th_f"],
                tiles=tiles,
            )
        )
    return VideoScheme(
        video_id=doc["video_id"],
        geometry=geom,
        gamma=doc["gamma"],
        keyframes=tuple(keyframes),
    )
