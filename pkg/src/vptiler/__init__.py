"""Viewport-aware adaptive tiling of 360-degree video frames."""

from .attention import AttentionMap, build_viewport_map, equalize, normalize
from .errors import (
    CoverageError,
    EmptyInputError,
    GeometryError,
    MissingUserError,
    RegionError,
    SchemeError,
    TraceError,
    VptilerError,
)
from .metrics import (
    DistributionReport,
    RedundancyReport,
    TimingReport,
    distribution_stats,
    fixed_grid_scheme,
    pixel_redundancy,
    pixel_volume_proxy,
    select_tiles,
    time_pipeline,
)
from .projection import (
    DEFAULT_FOV,
    FovMask,
    FrameGeometry,
    SplitLimits,
    fov_mask,
    normalize_yaw,
    split_limits,
)
from .rectpart import (
    Chord,
    Rect,
    RectilinearRegion,
    build_chords,
    concave_vertices,
    max_independent_chords,
    partition,
    regions_from_cells,
)
from .regions import (
    Blob,
    ThresholdSearchResult,
    connected_blobs,
    determine_threshold,
    extract_buffer_inputs,
    extract_oov,
    finer_threshold,
    rasterize_to_grid,
    select_blobs,
)
from .scheme import (
    DerivedTile,
    ThresholdParams,
    TileScheme,
    VideoScheme,
    build_scheme,
    build_video_schemes,
    expand_fovf,
    partition_fov_with_holes,
    remove_overlaps,
    scheme_from_dict,
    scheme_to_dict,
    split_large,
)
from .synth import SCENARIOS, generate_traces
from .traces import (
    Keyframe,
    TraceSet,
    ViewportSample,
    parse_traces,
    sample_keyframes,
    write_traces,
)

__version__ = "0.1.0"
