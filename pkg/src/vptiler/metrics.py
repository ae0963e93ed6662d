"""Scheme evaluation: redundancy, distributions, volume proxy, timing."""

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .errors import CoverageError, EmptyInputError
from .projection import FrameGeometry, fov_mask, split_limits
from .rectpart import Rect
from .scheme import (
    REGION_OOV,
    REGION_ORDER,
    DerivedTile,
    StageClock,
    ThresholdParams,
    TileScheme,
    VideoScheme,
    derive_keyframe_regions,
    finalize_scheme,
)
from .traces import sample_keyframes


@dataclass(frozen=True)
class RedundancyReport:
    n_t: int
    n_fov: int
    redundancy_pct: float


@dataclass(frozen=True)
class DistributionReport:
    tile_counts: dict  # region -> mean count per keyframe
    tile_sizes: dict  # region -> mean size in basic tiles
    vp_share: dict  # region -> mean percent of user FoV under that region
    tile_overlap: dict  # region -> mean fraction of tile area inside the FoV
    total_tiles: float


@dataclass(frozen=True)
class TimingReport:
    stage_means: dict  # stage -> seconds
    stage_stds: dict
    end_to_end_mean: float
    end_to_end_std: float
    keyframe_count: int


def _tile_pixel_slice(tile, geom):
    r = tile.rect
    ch, cw = geom.cell_height, geom.cell_width
    return slice(r.row0 * ch, r.row1 * ch), slice(r.col0 * cw, r.col1 * cw)


def select_tiles(scheme, fov, geom=None):
    """Tiles whose pixel footprint meets the FoV mask in >= 1 pixel."""
    if geom is None:
        geom = fov.geometry
    picked = []
    for tile in scheme.tiles:
        rs, cs = _tile_pixel_slice(tile, geom)
        if fov.bits[rs, cs].any():
            picked.append(tile)
    return picked


def pixel_redundancy(selected, fov, geom=None):
    """Transmitted-over-needed pixel ratio for one user viewport."""
    if geom is None:
        geom = fov.geometry
    n_fov = fov.pixel_count
    if n_fov == 0:
        raise CoverageError("FoV mask has no pixels; redundancy undefined")
    area = geom.cell_height * geom.cell_width
    n_t = sum(t.rect.area * area for t in selected)
    return RedundancyReport(
        n_t=n_t,
        n_fov=n_fov,
        redundancy_pct=100.0 * (n_t - n_fov) / n_fov,
    )


def fixed_grid_scheme(rows, cols, geom):
    """Uniform rows x cols baseline over the same pixel frame."""
    grid_geom = FrameGeometry(
        width=geom.width, height=geom.height, grid_rows=rows, grid_cols=cols
    )
    tiles = tuple(
        DerivedTile(
            rect=Rect(r, c, 1, 1),
            region=REGION_OOV,
            mean_intensity=0.0,
            pixel_area=grid_geom.cell_height * grid_geom.cell_width,
        )
        for r in range(rows)
        for c in range(cols)
    )
    keyframe = TileScheme(
        keyframe_time=0.0, gamma=1.0, alpha=0.0, beta=None, th_f=0.0, tiles=tiles
    )
    return VideoScheme(
        video_id=f"fixed-{rows}x{cols}",
        geometry=grid_geom,
        gamma=1.0,
        keyframes=(keyframe,),
    )


def scheme_keyframe_at(video_scheme, t, tol=1e-6):
    for kf in video_scheme.keyframes:
        if abs(kf.keyframe_time - t) <= tol:
            return kf
    return None


def _keyframe_for(video_scheme, t):
    kf = scheme_keyframe_at(video_scheme, t)
    if kf is not None:
        return kf
    if len(video_scheme.keyframes) == 1:
        return video_scheme.keyframes[0]  # static baseline scheme
    raise EmptyInputError(f"no keyframe at t={t} in {video_scheme.video_id}")


def pixel_volume_proxy(video_scheme, traces, user_ids=None, gap=0.5, fov=(100.0, 100.0)):
    """Selected-tile pixel totals per user per keyframe, plus aggregates."""
    geom = video_scheme.geometry
    if user_ids is None:
        user_ids = traces.user_ids
    keyframes = sample_keyframes(traces, gap)
    area = geom.cell_height * geom.cell_width
    per_user = {uid: [] for uid in user_ids}
    for kf in keyframes:
        scheme = _keyframe_for(video_scheme, kf.t)
        for uid in user_ids:
            s = kf.samples[uid]
            mask = fov_mask((s.yaw, s.pitch), fov, geom)
            selected = select_tiles(scheme, mask, geom)
            per_user[uid].append(sum(t.rect.area * area for t in selected))
    totals = [sum(v) for v in per_user.values()]
    return {
        "per_user": per_user,
        "mean_total": statistics.fmean(totals),
        "max_total": max(totals),
        "keyframes": [kf.t for kf in keyframes],
    }


def distribution_stats(video_scheme, traces=None, user_ids=None, gap=0.5, fov=(100.0, 100.0)):
    """Tile counts/sizes per region; viewport overlap stats when traces given."""
    geom = video_scheme.geometry
    counts = {region: [] for region in REGION_ORDER}
    sizes = {region: [] for region in REGION_ORDER}
    for kf in video_scheme.keyframes:
        per_kf = {region: 0 for region in REGION_ORDER}
        for tile in kf.tiles:
            per_kf[tile.region] += 1
            sizes[tile.region].append(tile.rect.area)
        for region in REGION_ORDER:
            counts[region].append(per_kf[region])

    vp_share = {region: [] for region in REGION_ORDER}
    tile_overlap = {region: [] for region in REGION_ORDER}
    if traces is not None:
        if user_ids is None:
            user_ids = traces.user_ids
        for kf_samples in sample_keyframes(traces, gap):
            scheme = _keyframe_for(video_scheme, kf_samples.t)
            for uid in user_ids:
                s = kf_samples.samples[uid]
                mask = fov_mask((s.yaw, s.pitch), fov, geom)
                fov_total = mask.pixel_count
                if fov_total == 0:
                    continue
                shares = {region: 0 for region in REGION_ORDER}
                for tile in scheme.tiles:
                    rs, cs = _tile_pixel_slice(tile, geom)
                    inter = int(mask.bits[rs, cs].sum())
                    if inter == 0:
                        continue
                    shares[tile.region] += inter
                    tile_overlap[tile.region].append(
                        inter / (tile.rect.area * geom.cell_height * geom.cell_width)
                    )
                for region in REGION_ORDER:
                    vp_share[region].append(100.0 * shares[region] / fov_total)

    def _mean(values):
        return statistics.fmean(values) if values else 0.0

    return DistributionReport(
        tile_counts={r: _mean(v) for r, v in counts.items()},
        tile_sizes={r: _mean(v) for r, v in sizes.items()},
        vp_share={r: _mean(v) for r, v in vp_share.items()},
        tile_overlap={r: _mean(v) for r, v in tile_overlap.items()},
        total_tiles=_mean(
            [sum(vals) for vals in zip(*(counts[r] for r in REGION_ORDER))]
        ),
    )


def time_pipeline(masks_by_keyframe, geom, gamma=1.0, params=ThresholdParams(), fov=(100.0, 100.0)):
    """Build every keyframe once, recording per-stage wall-clock time."""
    limits = split_limits(geom, fov)
    per_stage = {}
    end_to_end = []
    keyframe_times = sorted(masks_by_keyframe)
    for t in keyframe_times:
        clock = StageClock()
        t0 = time.perf_counter()
        kf = derive_keyframe_regions(masks_by_keyframe[t], geom, params, clock)
        finalize_scheme(kf, gamma, limits, geom, t, params, clock)
        end_to_end.append(time.perf_counter() - t0)
        for stage, seconds in clock.stages.items():
            per_stage.setdefault(stage, []).append(seconds)

    def _stats(values):
        mean = statistics.fmean(values)
        std = statistics.pstdev(values) if len(values) > 1 else 0.0
        return mean, std

    stage_means, stage_stds = {}, {}
    for stage, values in sorted(per_stage.items()):
        stage_means[stage], stage_stds[stage] = _stats(values)
    e_mean, e_std = _stats(end_to_end)
    return TimingReport(
        stage_means=stage_means,
        stage_stds=stage_stds,
        end_to_end_mean=e_mean,
        end_to_end_std=e_std,
        keyframe_count=len(end_to_end),
    )
