"""Run configuration: defaults, flat key=value files, flag overrides."""

from dataclasses import dataclass, fields, replace

from .errors import VptilerError
from .projection import FrameGeometry


@dataclass(frozen=True)
class RunConfig:
    frame_width: int = 960
    frame_height: int = 480
    grid_rows: int = 10
    grid_cols: int = 20
    fov_h: float = 100.0
    fov_v: float = 100.0
    gammas: tuple = (1.0, 0.5, 0.25)
    th_candidates: tuple = (0.4, 0.5, 0.6, 0.7)
    th_buf_candidates: tuple = (0.1, 0.2, 0.3, 0.4)
    th_finer: float = 0.9
    coverage_target: float = 80.0
    blob_keep: float = 95.0
    keyframe_gap: float = 0.5
    trace_dir: str = ""
    out_dir: str = "out"
    jobs: int = 1
    seed: int = 0

    @property
    def geometry(self):
        return FrameGeometry(
            width=self.frame_width,
            height=self.frame_height,
            grid_rows=self.grid_rows,
            grid_cols=self.grid_cols,
        )

    @property
    def fov(self):
        return (self.fov_h, self.fov_v)


def _format_value(value):
    if isinstance(value, tuple):
        return ",".join(repr(v) for v in value)
    return str(value)


def _parse_value(field_type, raw):
    raw = raw.strip()
    if field_type is int:
        return int(raw)
    if field_type is float:
        return float(raw)
    if field_type is tuple:
        if not raw:
            return ()
        return tuple(float(part) for part in raw.split(","))
    return raw


def save_config(config, path):
    with open(path, "w") as fh:
        for f in fields(config):
            fh.write(f"{f.name} = {_format_value(getattr(config, f.name))}\n")


def load_config(path, base=None):
    """Read a key=value config file on top of `base` (or the defaults)."""
    config = base if base is not None else RunConfig()
    by_name = {f.name: f.type for f in fields(config)}
    type_map = {"int": int, "float": float, "tuple": tuple, "str": str}
    overrides = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise VptilerError(f"{path}:{line_no}: expected key = value")
            key, raw = line.split("=", 1)
            key = key.strip()
            if key not in by_name:
                raise VptilerError(f"{path}:{line_no}: unknown config key {key!r}")
            ftype = by_name[key]
            if isinstance(ftype, str):
                ftype = type_map.get(ftype, str)
            overrides[key] = _parse_value(ftype, raw)
    return replace(config, **overrides)


def apply_overrides(config, **kwargs):
    """Override the fields whose value is not None."""
    updates = {k: v for k, v in kwargs.items() if v is not None}
    return replace(config, **updates) if updates else config
