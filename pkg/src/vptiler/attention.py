"""Averaged viewport maps and their histogram-equalized normal form."""

from dataclasses import dataclass, replace

import numpy as np

from .errors import EmptyInputError, GeometryError
from .projection import FrameGeometry


@dataclass(frozen=True)
class AttentionMap:
    geometry: FrameGeometry
    raw: np.ndarray  # H x W mean of user masks, in [0, 1]
    norm: np.ndarray  # H x W equalized map, or None until normalize()
    user_count: int


def build_viewport_map(masks, geom=None):
    """Average per-user binary masks into one attention raster."""
    if not masks:
        raise EmptyInputError("need at least one viewport mask")
    if geom is None:
        geom = masks[0].geometry
    for m in masks:
        if m.geometry != geom:
            raise GeometryError(
                f"mask geometry {m.geometry} does not match {geom}"
            )
    stack = np.stack([m.bits for m in masks])
    raw = stack.mean(axis=0, dtype=np.float64)
    return AttentionMap(geometry=geom, raw=raw, norm=None, user_count=len(masks))


def equalize(raw):
    """Histogram-equalize a [0, 1] raster over its nonzero support.

    The raster is quantized to 8-bit levels and the cumulative histogram
    is computed over nonzero pixels only; zero pixels stay exactly 0.
    The background covers most of the frame, so including it would
    compress all foreground contrast into the top of the range.
    """
    raw = np.asarray(raw, dtype=np.float64)
    support = raw > 0.0
    norm = np.zeros_like(raw)
    n = int(support.sum())
    if n == 0:
        return norm
    levels = np.rint(raw * 255.0).astype(np.int64)
    hist = np.bincount(levels[support], minlength=256)
    cdf = np.cumsum(hist)
    occupied = np.flatnonzero(hist)
    cdf_min = int(cdf[occupied[0]])
    if n == cdf_min:
        # single occupied level: map it straight to 1
        mapping = np.ones(256)
    else:
        mapping = (cdf - cdf_min) / (n - cdf_min)
    norm[support] = mapping[levels[support]]
    return norm


def normalize(amap):
    """Fill the equalized map; a monotone transform of the raw raster."""
    if amap.raw is None:
        raise EmptyInputError("attention map has no raw raster")
    return replace(amap, norm=equalize(amap.raw))
