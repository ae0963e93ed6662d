"""Equirectangular frame geometry and binary field-of-view masks.

A frame pixel (m, n) with 0 <= m < H, 0 <= n < W maps to
latitude  = 90 - (m + 0.5) * 180 / H   (degrees, +90 at the top row)
longitude = -180 + (n + 0.5) * 360 / W (degrees).

Field-of-view membership uses a rectilinear-camera test: a pixel is
visible iff its unit direction, expressed in the viewing frame (forward
axis toward the viewport center, up along the local meridian), satisfies
z > 0, |atan2(x_right, z)| <= h/2 and |atan2(y_up, z)| <= v/2.  This
reproduces the characteristic polar stretching of viewports on the
equirectangular frame.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import GeometryError

DEFAULT_FOV = (100.0, 100.0)


@dataclass(frozen=True)
class FrameGeometry:
    """Pixel raster size plus the basic-tile grid overlaid on it."""

    width: int = 960
    height: int = 480
    grid_rows: int = 10
    grid_cols: int = 20

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise GeometryError("frame size must be positive")
        if self.grid_rows <= 0 or self.grid_cols <= 0:
            raise GeometryError("grid must be positive")
        if self.height % self.grid_rows != 0:
            raise GeometryError(
                f"height {self.height} not divisible by {self.grid_rows} grid rows"
            )
        if self.width % self.grid_cols != 0:
            raise GeometryError(
                f"width {self.width} not divisible by {self.grid_cols} grid cols"
            )

    @property
    def cell_height(self):
        return self.height // self.grid_rows

    @property
    def cell_width(self):
        return self.width // self.grid_cols

    def pixel_latitudes(self):
        m = np.arange(self.height) + 0.5
        return 90.0 - m * (180.0 / self.height)

    def pixel_longitudes(self):
        n = np.arange(self.width) + 0.5
        return -180.0 + n * (360.0 / self.width)

    def row_center_latitude(self, grid_row):
        """Latitude of the vertical center of one grid row band."""
        if not 0 <= grid_row < self.grid_rows:
            raise GeometryError(f"grid row {grid_row} out of range")
        return 90.0 - (grid_row + 0.5) * (180.0 / self.grid_rows)


@dataclass(frozen=True)
class FovMask:
    """Binary raster marking the pixels inside one user's viewport."""

    geometry: FrameGeometry
    bits: np.ndarray
    center: tuple

    @property
    def pixel_count(self):
        return int(self.bits.sum())

    def to_gray(self):
        return np.where(self.bits, 255, 0).astype(np.uint8)


@dataclass(frozen=True)
class SplitLimits:
    """Per-grid-row maximum tile extents, in basic-tile units."""

    vt_max: tuple
    ht_max: tuple


def normalize_yaw(yaw):
    """Wrap a yaw angle into [-180, 180)."""
    return (float(yaw) + 180.0) % 360.0 - 180.0


@lru_cache(maxsize=8)
def _sphere_components(geom):
    lat = np.radians(geom.pixel_latitudes())
    lon = np.radians(geom.pixel_longitudes())
    return (
        np.cos(lat)[:, None],  # (H, 1)
        np.sin(lat)[:, None],
        np.cos(lon)[None, :],  # (1, W)
        np.sin(lon)[None, :],
    )


def _viewing_frame(yaw_deg, pitch_deg):
    yaw = np.radians(yaw_deg)
    pitch = np.radians(pitch_deg)
    fwd = np.array(
        [np.cos(pitch) * np.cos(yaw), np.cos(pitch) * np.sin(yaw), np.sin(pitch)]
    )
    up = np.array(
        [-np.sin(pitch) * np.cos(yaw), -np.sin(pitch) * np.sin(yaw), np.cos(pitch)]
    )
    right = np.cross(up, fwd)
    return fwd, up, right


def fov_mask(center, fov=DEFAULT_FOV, geom=FrameGeometry()):
    """Rasterize the viewport centered at (yaw, pitch) degrees.

    The yaw is wrapped into [-180, 180) first so that masks are
    bit-identical under full turns.
    """
    h_deg, v_deg = fov
    if not (0.0 < h_deg < 180.0 and 0.0 < v_deg < 180.0):
        raise GeometryError(f"fov angles must lie in (0, 180), got {fov}")
    yaw = normalize_yaw(center[0])
    pitch = float(center[1])
    if not -90.0 <= pitch <= 90.0:
        raise GeometryError(f"pitch {pitch} outside [-90, 90]")

    cos_lat, sin_lat, cos_lon, sin_lon = _sphere_components(geom)
    fwd, up, right = _viewing_frame(yaw, pitch)

    def dot(v):
        # direction components are separable in latitude and longitude
        return cos_lat * (v[0] * cos_lon + v[1] * sin_lon) + sin_lat * v[2]

    z = dot(fwd)
    x = dot(right)
    y = dot(up)
    half_h = np.radians(h_deg) / 2.0
    half_v = np.radians(v_deg) / 2.0
    bits = (
        (z > 0.0)
        & (np.abs(np.arctan2(x, z)) <= half_h)
        & (np.abs(np.arctan2(y, z)) <= half_v)
    )
    return FovMask(geometry=geom, bits=bits, center=(yaw, pitch))


def grid_occupancy(bits, geom):
    """Mark every grid cell containing at least one set pixel."""
    if bits.shape != (geom.height, geom.width):
        raise GeometryError(
            f"raster shape {bits.shape} does not match geometry "
            f"{(geom.height, geom.width)}"
        )
    blocks = bits.reshape(
        geom.grid_rows, geom.cell_height, geom.grid_cols, geom.cell_width
    )
    return blocks.any(axis=(1, 3))


@lru_cache(maxsize=32)
def split_limits(geom=FrameGeometry(), fov=DEFAULT_FOV):
    """Maximum tile width/height per grid row, from viewport bounding boxes.

    For each grid row a viewport is placed at (yaw=0, pitch=row center
    latitude); the tight bounding box of the grid cells its mask touches
    gives the row's limits.
    """
    vt, ht = [], []
    for r in range(geom.grid_rows):
        mask = fov_mask((0.0, geom.row_center_latitude(r)), fov, geom)
        cells = grid_occupancy(mask.bits, geom)
        rows = np.flatnonzero(cells.any(axis=1))
        cols = np.flatnonzero(cells.any(axis=0))
        vt.append(int(rows[-1] - rows[0] + 1))
        ht.append(int(cols[-1] - cols[0] + 1))
    return SplitLimits(vt_max=tuple(vt), ht_max=tuple(ht))
