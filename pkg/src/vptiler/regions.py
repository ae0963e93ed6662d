"""Hierarchical thresholding: attention regions on the basic-tile grid.

The search loops below generalize the paper-style coverage checks: walk
an ascending candidate list, measure per-user viewport coverage of the
thresholded map, and back off to the previous candidate once mean
coverage drops under the target.
"""

from dataclasses import dataclass

import numpy as np

from .errors import CoverageError, EmptyInputError, GeometryError
from .projection import grid_occupancy

THRESHOLD_CANDIDATES = (0.4, 0.5, 0.6, 0.7)
BUFFER_CANDIDATES = (0.1, 0.2, 0.3, 0.4)
FINER_THRESHOLD = 0.9
COVERAGE_TARGET = 80.0
BLOB_KEEP = 95.0


@dataclass(frozen=True)
class ThresholdSearchResult:
    chosen: float
    coverage_by_candidate: dict  # candidate -> mean coverage percent
    per_user_coverage: tuple  # percents at the chosen candidate


@dataclass(frozen=True)
class Blob:
    cells: frozenset  # of (row, col)

    @property
    def size(self):
        return len(self.cells)

    @property
    def anchor(self):
        return min(self.cells)


def determine_threshold(
    norm_map,
    user_masks,
    candidates=THRESHOLD_CANDIDATES,
    target=COVERAGE_TARGET,
    empty_mask_coverage=None,
):
    """Pick the largest candidate whose mean user coverage stays >= target.

    Walks candidates in ascending order; on the first failure returns the
    previous candidate, or the smallest candidate if the first one already
    fails.  `empty_mask_coverage` supplies the coverage percent credited to
    a user whose mask has no set pixels (used for the buffer stage, where a
    fully tiled-over viewport has nothing left to cover); without it such a
    mask is an error.
    """
    if not candidates:
        raise EmptyInputError("candidate list is empty")
    cand = [float(c) for c in candidates]
    if sorted(cand) != cand:
        raise EmptyInputError(f"candidates must ascend, got {candidates}")
    if not user_masks:
        raise EmptyInputError("need at least one user mask")

    stack = np.stack([np.asarray(m, dtype=bool) for m in user_masks])
    areas = stack.sum(axis=(1, 2))
    empty = areas == 0
    if empty.any() and empty_mask_coverage is None:
        raise CoverageError(
            f"user {int(np.flatnonzero(empty)[0])} has an empty viewport mask"
        )
    safe_areas = np.where(empty, 1, areas)

    coverage_by_candidate = {}
    prev = None  # (candidate, per-user coverages)
    for alpha in cand:
        thresholded = norm_map >= alpha
        inter = (stack & thresholded).sum(axis=(1, 2))
        s_user = 100.0 * inter / safe_areas
        if empty_mask_coverage is not None:
            s_user = np.where(empty, empty_mask_coverage, s_user)
        s_avg = float(s_user.mean())
        coverage_by_candidate[alpha] = s_avg
        if s_avg < target:
            if prev is None:
                chosen, per_user = alpha, s_user
            else:
                chosen, per_user = prev
            return ThresholdSearchResult(
                chosen=chosen,
                coverage_by_candidate=coverage_by_candidate,
                per_user_coverage=tuple(float(x) for x in per_user),
            )
        prev = (alpha, s_user)
    chosen, per_user = prev
    return ThresholdSearchResult(
        chosen=chosen,
        coverage_by_candidate=coverage_by_candidate,
        per_user_coverage=tuple(float(x) for x in per_user),
    )


def connected_blobs(mask):
    """4-connected components of a boolean grid, largest first.

    Ties in size break toward the component whose smallest (row, col)
    cell is lexicographically least, keeping selection deterministic.
    """
    mask = np.asarray(mask, dtype=bool)
    seen = np.zeros_like(mask)
    blobs = []
    rows, cols = mask.shape
    for r0, c0 in zip(*np.nonzero(mask)):
        if seen[r0, c0]:
            continue
        stack = [(int(r0), int(c0))]
        seen[r0, c0] = True
        cells = []
        while stack:
            r, c = stack.pop()
            cells.append((r, c))
            for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if 0 <= rr < rows and 0 <= cc < cols and mask[rr, cc] and not seen[rr, cc]:
                    seen[rr, cc] = True
                    stack.append((rr, cc))
        blobs.append(Blob(cells=frozenset(cells)))
    blobs.sort(key=lambda b: (-b.size, b.anchor))
    return blobs


def select_blobs(mask, keep=BLOB_KEEP):
    """Keep the largest components until `keep` percent of area is covered."""
    mask = np.asarray(mask, dtype=bool)
    total = int(mask.sum())
    if total == 0:
        raise EmptyInputError("blob selection on an empty mask")
    union = np.zeros_like(mask)
    kept = 0
    for blob in connected_blobs(mask):
        for r, c in blob.cells:
            union[r, c] = True
        kept += blob.size
        if 100.0 * kept / total >= keep:
            break
    return union


def finer_threshold(norm_map, blob_mask, th_f=FINER_THRESHOLD):
    """High-attention seed pixels inside the selected blob support."""
    return (np.asarray(norm_map) >= th_f) & np.asarray(blob_mask, dtype=bool)


def rasterize_to_grid(mask, geom):
    """Superset rasterization: a cell is active iff it holds a set pixel."""
    return grid_occupancy(np.asarray(mask, dtype=bool), geom)


def cells_pixel_mask(cellgrid, geom):
    """Blow a cell grid back up to its pixel footprint."""
    cellgrid = np.asarray(cellgrid, dtype=bool)
    return np.repeat(
        np.repeat(cellgrid, geom.cell_height, axis=0), geom.cell_width, axis=1
    )


def tiles_pixel_mask(tiles, geom):
    """Pixel footprint of a collection of tiles (rects in cell units)."""
    out = np.zeros((geom.height, geom.width), dtype=bool)
    ch, cw = geom.cell_height, geom.cell_width
    for tile in tiles:
        r = tile.rect if hasattr(tile, "rect") else tile
        out[r.row0 * ch : (r.row0 + r.h) * ch, r.col0 * cw : (r.col0 + r.w) * cw] = True
    return out


def tiles_cell_mask(tiles, geom):
    out = np.zeros((geom.grid_rows, geom.grid_cols), dtype=bool)
    for tile in tiles:
        r = tile.rect if hasattr(tile, "rect") else tile
        out[r.row0 : r.row0 + r.h, r.col0 : r.col0 + r.w] = True
    return out


def extract_buffer_inputs(vm_raw, user_masks, prior_tiles, geom):
    """Zero out everything under the already-derived tiles.

    Returns the residual attention raster and the per-user residual
    masks; these feed the buffer threshold search.
    """
    covered = tiles_pixel_mask(prior_tiles, geom)
    if vm_raw.shape != covered.shape:
        raise GeometryError("attention raster does not match geometry")
    residual = np.where(covered, 0.0, vm_raw)
    residual_users = [np.asarray(m, dtype=bool) & ~covered for m in user_masks]
    return residual, residual_users


def extract_oov(prior_tiles, geom):
    """Grid cells not covered by any prior tile."""
    return ~tiles_cell_mask(prior_tiles, geom)
