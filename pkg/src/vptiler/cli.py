"""Command line front end: synth, tile, eval, render, bench."""

import argparse
import concurrent.futures
import json
import os
import statistics
import sys

import numpy as np

from . import pgm, report
from .config import RunConfig, apply_overrides, load_config
from .errors import VptilerError
from .metrics import (
    distribution_stats,
    fixed_grid_scheme,
    pixel_redundancy,
    select_tiles,
    time_pipeline,
)
from .projection import fov_mask
from .regions import tiles_pixel_mask
from .scheme import (
    FORMAT_VERSION,
    REGION_BUFFER,
    REGION_FOV,
    REGION_FOV_FINE,
    REGION_OOV,
    REGION_ORDER,
    ThresholdParams,
    build_video_schemes,
    keyframe_masks,
    scheme_from_dict,
    scheme_to_dict,
)
from .synth import SCENARIOS, generate_traces
from .traces import parse_traces, sample_keyframes, write_traces

REGION_GRAY = {
    REGION_FOV_FINE: 230,
    REGION_FOV: 180,
    REGION_BUFFER: 120,
    REGION_OOV: 60,
}


def _parse_pair(text, sep, what, cast=int):
    parts = text.lower().split(sep)
    if len(parts) != 2:
        raise VptilerError(f"expected {what} as A{sep}B, got {text!r}")
    return cast(parts[0]), cast(parts[1])


def _parse_floats(text):
    return tuple(float(p) for p in text.split(",") if p.strip())


def _parse_users(text):
    """Comma list with ranges: '0-4,7' -> (0, 1, 2, 3, 4, 7)."""
    ids = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            ids.extend(range(int(lo), int(hi) + 1))
        else:
            ids.append(int(part))
    return tuple(dict.fromkeys(ids))


def _load_run_config(args):
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config, cfg)
    overrides = {}
    if getattr(args, "frame_size", None):
        overrides["frame_width"], overrides["frame_height"] = _parse_pair(
            args.frame_size, "x", "frame size"
        )
    if getattr(args, "grid", None):
        overrides["grid_rows"], overrides["grid_cols"] = _parse_pair(
            args.grid, "x", "grid"
        )
    if getattr(args, "fov", None):
        fh, fv = _parse_pair(args.fov, "x", "fov", cast=float)
        overrides["fov_h"], overrides["fov_v"] = fh, fv
    if getattr(args, "gamma", None):
        overrides["gammas"] = _parse_floats(args.gamma)
    if getattr(args, "th_candidates", None):
        overrides["th_candidates"] = _parse_floats(args.th_candidates)
    if getattr(args, "th_buf_candidates", None):
        overrides["th_buf_candidates"] = _parse_floats(args.th_buf_candidates)
    simple = {
        "th_finer": "th_finer",
        "coverage_target": "coverage_target",
        "blob_keep": "blob_keep",
        "gap": "keyframe_gap",
        "trace_dir": "trace_dir",
        "out": "out_dir",
        "jobs": "jobs",
        "seed": "seed",
    }
    for arg_name, field in simple.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            overrides[field] = value
    return apply_overrides(cfg, **overrides)


def _params(cfg):
    return ThresholdParams(
        candidates=cfg.th_candidates,
        buffer_candidates=cfg.th_buf_candidates,
        finer=cfg.th_finer,
        coverage_target=cfg.coverage_target,
        blob_keep=cfg.blob_keep,
    )


def _gamma_tag(gamma):
    return f"{gamma:g}"


def cmd_synth(args):
    cfg = _load_run_config(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    scenarios = SCENARIOS if args.scenario == "all" else (args.scenario,)
    for scenario in scenarios:
        traces = generate_traces(
            scenario,
            users=args.users,
            duration=args.duration,
            rate=args.rate,
            seed=cfg.seed,
        )
        path = os.path.join(cfg.out_dir, f"{traces.video_id}.csv")
        write_traces(traces, path)
        print(f"wrote {path} ({len(traces.users)} users, {traces.duration:.1f}s)")
    return 0


def _trace_files(trace_dir):
    if not os.path.isdir(trace_dir):
        raise VptilerError(f"trace directory {trace_dir!r} does not exist")
    files = sorted(
        os.path.join(trace_dir, name)
        for name in os.listdir(trace_dir)
        if name.endswith(".csv")
    )
    if not files:
        raise VptilerError(f"no .csv trace files in {trace_dir!r}")
    return files


def _tile_one(job):
    path, cfg_dict, build_users = job
    cfg = RunConfig(**cfg_dict)
    traces = parse_traces(path)
    users = build_users if build_users else None
    schemes = build_video_schemes(
        traces,
        cfg.geometry,
        gammas=cfg.gammas,
        params=_params(cfg),
        fov=cfg.fov,
        gap=cfg.keyframe_gap,
        build_users=users,
    )
    docs = []
    for gamma in cfg.gammas:
        doc = scheme_to_dict(schemes[gamma])
        doc["build_users"] = list(users) if users else sorted(traces.users)
        docs.append((f"{traces.video_id}_g{_gamma_tag(gamma)}.json", doc))
    return docs


def cmd_tile(args):
    cfg = _load_run_config(args)
    files = _trace_files(cfg.trace_dir)
    build_users = _parse_users(args.build_users) if args.build_users else ()
    jobs = [(path, cfg.__dict__.copy(), build_users) for path in files]

    results = []
    if cfg.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_tile_one, jobs))
    else:
        results = [_tile_one(job) for job in jobs]

    # all videos built successfully; only now touch the output directory
    os.makedirs(cfg.out_dir, exist_ok=True)
    for docs in results:
        for name, doc in docs:
            path = os.path.join(cfg.out_dir, name)
            report.write_json(doc, path)
            print(f"wrote {path} ({len(doc['keyframes'])} keyframes)")
    return 0


def _load_schemes(paths):
    schemes = []
    for path in paths:
        with open(path) as fh:
            doc = json.load(fh)
        if doc.get("format_version") != FORMAT_VERSION:
            raise VptilerError(f"{path}: unsupported format_version")
        schemes.append((path, scheme_from_dict(doc), doc.get("build_users")))
    return schemes


def _scheme_paths(arg):
    if os.path.isdir(arg):
        paths = sorted(
            os.path.join(arg, n) for n in os.listdir(arg) if n.endswith(".json")
        )
        if not paths:
            raise VptilerError(f"no scheme files in {arg!r}")
        return paths
    return [arg]


def cmd_eval(args):
    cfg = _load_run_config(args)
    holdout = _parse_users(args.holdout) if args.holdout else ()
    if not holdout:
        raise VptilerError("eval needs a non-empty --holdout user list")
    entries = _load_schemes(_scheme_paths(args.schemes))

    by_video = {}
    for path, scheme, build_users in entries:
        by_video.setdefault(scheme.video_id, []).append((path, scheme, build_users))

    os.makedirs(cfg.out_dir, exist_ok=True)
    baselines = [
        _parse_pair(b, "x", "baseline grid") for b in args.baselines.split(",") if b
    ]
    exit_code = 0
    for video_id, items in sorted(by_video.items()):
        trace_path = os.path.join(cfg.trace_dir, f"{video_id}.csv")
        if not os.path.exists(trace_path):
            raise VptilerError(f"no trace file for scheme video {video_id!r} at {trace_path}")
        traces = parse_traces(trace_path)
        missing = [u for u in holdout if u not in traces.users]
        if missing:
            raise VptilerError(f"holdout users {missing} not present in {trace_path}")
        for _, _, build_users in items:
            if build_users and set(build_users) & set(holdout):
                raise VptilerError(
                    f"holdout users overlap the build users of {video_id}"
                )
        _eval_video(video_id, items, traces, holdout, baselines, cfg, args)
    return exit_code


def _eval_video(video_id, items, traces, holdout, baselines, cfg, args):
    geom = cfg.geometry
    keyframes = sample_keyframes(traces, cfg.keyframe_gap)
    holdout_masks = {
        kf.t: {
            uid: fov_mask(
                (kf.samples[uid].yaw, kf.samples[uid].pitch), cfg.fov, geom
            )
            for uid in holdout
        }
        for kf in keyframes
    }

    def mean_redundancy(video_scheme):
        values = []
        volume = []
        for kf in video_scheme.keyframes:
            masks = holdout_masks.get(kf.keyframe_time)
            if masks is None:
                continue
            for mask in masks.values():
                selected = select_tiles(kf, mask, video_scheme.geometry)
                rep = pixel_redundancy(selected, mask, video_scheme.geometry)
                values.append(rep.redundancy_pct)
                volume.append(rep.n_t)
        return statistics.fmean(values), statistics.fmean(volume)

    schemes_report = {}
    adaptive = {}
    for path, scheme, _ in sorted(items, key=lambda it: -it[1].gamma):
        name = f"adaptive-g{_gamma_tag(scheme.gamma)}"
        red, vol = mean_redundancy(scheme)
        tiles_mean = statistics.fmean(len(kf.tiles) for kf in scheme.keyframes)
        schemes_report[name] = {
            "gamma": scheme.gamma,
            "mean_redundancy_pct": round(red, 3),
            "mean_selected_pixels": round(vol, 1),
            "mean_tiles": round(tiles_mean, 2),
            "source": os.path.basename(path),
        }
        adaptive[name] = scheme

    for rows, cols in baselines:
        base = fixed_grid_scheme(rows, cols, geom)
        red, vol = _baseline_redundancy(base, holdout_masks)
        schemes_report[base.video_id] = {
            "gamma": None,
            "mean_redundancy_pct": round(red, 3),
            "mean_selected_pixels": round(vol, 1),
            "mean_tiles": rows * cols,
            "source": "uniform grid",
        }

    savings = {}
    for name, entry in schemes_report.items():
        if not name.startswith("adaptive"):
            continue
        for rows, cols in baselines:
            base_name = f"fixed-{rows}x{cols}"
            base_red = schemes_report[base_name]["mean_redundancy_pct"]
            if base_red > 0:
                saving = 100.0 * (base_red - entry["mean_redundancy_pct"]) / base_red
                savings[f"{name}_vs_{base_name}"] = round(saving, 3)

    distribution = {}
    coverage = {}
    for name, scheme in adaptive.items():
        dist = distribution_stats(scheme, traces, user_ids=holdout, gap=cfg.keyframe_gap, fov=cfg.fov)
        distribution[name] = {
            "tile_counts": {r: round(v, 3) for r, v in dist.tile_counts.items()},
            "tile_sizes": {r: round(v, 3) for r, v in dist.tile_sizes.items()},
            "vp_share_pct": {r: round(v, 3) for r, v in dist.vp_share.items()},
            "tile_overlap_frac": {r: round(v, 4) for r, v in dist.tile_overlap.items()},
            "total_tiles": round(dist.total_tiles, 3),
        }
        coverage[name] = _coverage_entry(scheme, holdout_masks)

    doc = {
        "format_version": FORMAT_VERSION,
        "video_id": video_id,
        "holdout_users": list(holdout),
        "schemes": schemes_report,
        "relative_pixel_saving_pct": savings,
        "distribution": distribution,
        "coverage": coverage,
    }
    out_json = os.path.join(cfg.out_dir, f"{video_id}_report.json")
    report.write_json(doc, out_json)
    print(f"wrote {out_json}")

    if args.report_csv:
        rows = []
        for name, entry in schemes_report.items():
            rows.append(
                [
                    video_id,
                    name,
                    entry["gamma"] if entry["gamma"] is not None else "",
                    entry["mean_redundancy_pct"],
                    entry["mean_selected_pixels"],
                    entry["mean_tiles"],
                ]
            )
        out_csv = os.path.join(cfg.out_dir, f"{video_id}_report.csv")
        report.write_csv(
            out_csv,
            ["video_id", "scheme", "gamma", "mean_redundancy_pct",
             "mean_selected_pixels", "mean_tiles"],
            rows,
        )
        print(f"wrote {out_csv}")

    _eval_figures(video_id, adaptive, schemes_report, traces, holdout, cfg)


def _coverage_entry(video_scheme, holdout_masks):
    geom = video_scheme.geometry
    per_kf = []
    for kf in video_scheme.keyframes:
        masks = holdout_masks.get(kf.keyframe_time)
        if masks is None:
            continue
        fov_tiles = [t for t in kf.tiles if t.region in (REGION_FOV_FINE, REGION_FOV)]
        footprint = tiles_pixel_mask(fov_tiles, geom)
        covs = []
        for mask in masks.values():
            total = mask.pixel_count
            covs.append(100.0 * int((mask.bits & footprint).sum()) / total)
        per_kf.append(
            {
                "t": kf.keyframe_time,
                "alpha": kf.alpha,
                "beta": kf.beta,
                "mean_fov_coverage_pct": round(statistics.fmean(covs), 3),
            }
        )
    return per_kf


def _baseline_redundancy(base_scheme, holdout_masks):
    values, volume = [], []
    kf = base_scheme.keyframes[0]
    for masks in holdout_masks.values():
        for mask in masks.values():
            selected = select_tiles(kf, mask, base_scheme.geometry)
            rep = pixel_redundancy(selected, mask, base_scheme.geometry)
            values.append(rep.redundancy_pct)
            volume.append(rep.n_t)
    return statistics.fmean(values), statistics.fmean(volume)


def _eval_figures(video_id, adaptive, schemes_report, traces, holdout, cfg):
    red = {name: entry["mean_redundancy_pct"] for name, entry in schemes_report.items()}
    report.fig_redundancy(
        red, os.path.join(cfg.out_dir, f"{video_id}_redundancy.png"),
        title=f"{video_id}: mean pixel redundancy",
    )
    if not adaptive:
        return
    name, scheme = sorted(adaptive.items())[0]
    times = [kf.keyframe_time for kf in scheme.keyframes]
    counts = {r: [] for r in REGION_ORDER}
    sizes = {r: [] for r in REGION_ORDER}
    for kf in scheme.keyframes:
        for region in REGION_ORDER:
            tiles = [t for t in kf.tiles if t.region == region]
            counts[region].append(len(tiles))
            sizes[region].append(
                statistics.fmean(t.rect.area for t in tiles) if tiles else 0.0
            )
    dist = distribution_stats(scheme, traces, user_ids=holdout, gap=cfg.keyframe_gap, fov=cfg.fov)
    report.fig_distribution(
        times, counts, sizes, dist.vp_share,
        os.path.join(cfg.out_dir, f"{video_id}_distribution.png"),
    )


def cmd_render(args):
    cfg = _load_run_config(args)
    with open(args.scheme) as fh:
        doc = json.load(fh)
    scheme = scheme_from_dict(doc)
    geom = scheme.geometry
    target = None
    for kf in scheme.keyframes:
        if abs(kf.keyframe_time - args.time) <= 1e-6:
            target = kf
            break
    if target is None:
        available = ", ".join(f"{kf.keyframe_time:g}" for kf in scheme.keyframes[:20])
        raise VptilerError(
            f"no keyframe at t={args.time:g}; available times start with: {available}"
        )

    gray = np.zeros((geom.height, geom.width), dtype=np.uint8)
    ch, cw = geom.cell_height, geom.cell_width
    for tile in target.tiles:
        r = tile.rect
        gray[r.row0 * ch : r.row1 * ch, r.col0 * cw : r.col1 * cw] = REGION_GRAY[
            tile.region
        ]

    if args.user is not None:
        if not cfg.trace_dir:
            raise VptilerError("--user needs --trace-dir for the user's trace")
        traces = parse_traces(os.path.join(cfg.trace_dir, f"{scheme.video_id}.csv"))
        keyframes = sample_keyframes(traces, cfg.keyframe_gap)
        sample = None
        for kf in keyframes:
            if abs(kf.t - args.time) <= 1e-6:
                sample = kf.samples.get(args.user)
        if sample is None:
            raise VptilerError(f"user {args.user} has no sample at t={args.time:g}")
        mask = fov_mask((sample.yaw, sample.pitch), cfg.fov, geom)
        outline = _mask_outline(mask.bits)
        rgb = np.stack([gray, gray, gray], axis=-1)
        rgb[outline] = (255, 0, 0)
        pgm.write_ppm(args.out, rgb)
    else:
        pgm.write_pgm(args.out, gray)
    print(f"wrote {args.out}")
    return 0


def _mask_outline(bits):
    interior = (
        np.roll(bits, 1, 0)
        & np.roll(bits, -1, 0)
        & np.roll(bits, 1, 1)
        & np.roll(bits, -1, 1)
    )
    return bits & ~interior


def cmd_bench(args):
    cfg = _load_run_config(args)
    traces = generate_traces(
        args.scenario, users=args.users, duration=args.duration, seed=cfg.seed
    )
    geom = cfg.geometry
    masks = {t: m for t, m in keyframe_masks(traces, geom, cfg.fov, cfg.keyframe_gap)}
    timing = time_pipeline(masks, geom, gamma=args.gamma_value, params=_params(cfg), fov=cfg.fov)
    doc = {
        "format_version": FORMAT_VERSION,
        "scenario": args.scenario,
        "keyframes": timing.keyframe_count,
        "gamma": args.gamma_value,
        "stage_seconds_mean": {k: round(v, 6) for k, v in timing.stage_means.items()},
        "stage_seconds_std": {k: round(v, 6) for k, v in timing.stage_stds.items()},
        "end_to_end_mean": round(timing.end_to_end_mean, 6),
        "end_to_end_std": round(timing.end_to_end_std, 6),
    }
    os.makedirs(cfg.out_dir, exist_ok=True)
    out_json = os.path.join(cfg.out_dir, "bench.json")
    report.write_json(doc, out_json)
    report.fig_timing(timing, os.path.join(cfg.out_dir, "bench_timing.png"))
    print(
        f"end-to-end per keyframe: {timing.end_to_end_mean*1e3:.1f} "
        f"(+/- {timing.end_to_end_std*1e3:.1f}) ms over {timing.keyframe_count} keyframes"
    )
    print(f"wrote {out_json}")
    return 0


def _add_common(parser, *, trace_dir=False):
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--frame-size", help="internal raster WxH (default 960x480)")
    parser.add_argument("--grid", help="basic tile grid RxC (default 10x20)")
    parser.add_argument("--fov", help="viewport extent HxV degrees (default 100x100)")
    parser.add_argument("--gap", type=float, help="keyframe gap seconds (default 0.5)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="random seed")
    if trace_dir:
        parser.add_argument("--trace-dir", help="directory of <video_id>.csv traces")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="vptiler",
        description="Viewport-aware adaptive tiling of 360-degree video frames",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic gaze traces")
    p.add_argument("--scenario", default="all", choices=SCENARIOS + ("all",))
    p.add_argument("--users", type=int, default=30)
    p.add_argument("--duration", type=float, default=10.0)
    p.add_argument("--rate", type=float, default=30.0)
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("tile", help="derive tile schemes from traces")
    _add_common(p, trace_dir=True)
    p.add_argument("--gamma", help="comma list of gamma values (default 1.0,0.5,0.25)")
    p.add_argument("--th-candidates", help="attention threshold candidates")
    p.add_argument("--th-buf-candidates", help="buffer threshold candidates")
    p.add_argument("--th-finer", type=float, help="fine-region threshold (default 0.9)")
    p.add_argument("--coverage-target", type=float, help="percent coverage target (default 80)")
    p.add_argument("--blob-keep", type=float, help="percent blob area to keep (default 95)")
    p.add_argument("--build-users", help="users to build from, e.g. 0-19 (default all)")
    p.add_argument("--jobs", type=int, help="parallel videos (default 1)")
    p.set_defaults(func=cmd_tile)

    p = sub.add_parser("eval", help="evaluate schemes against holdout users")
    _add_common(p, trace_dir=True)
    p.add_argument("--schemes", required=True, help="scheme JSON file or directory")
    p.add_argument("--holdout", required=True, help="holdout user list, e.g. 20-29")
    p.add_argument("--baselines", default="4x6,6x6,10x20", help="fixed grids to compare")
    p.add_argument("--report-csv", action="store_true", help="also emit CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("render", help="render one keyframe's tile map")
    p.add_argument("--scheme", required=True, help="scheme JSON file")
    p.add_argument("--time", type=float, required=True, help="keyframe time")
    p.add_argument("--user", type=int, help="overlay this user's FoV outline")
    p.add_argument("--out", required=True, help="output image (.pgm, .ppm with --user)")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--trace-dir", help="directory of <video_id>.csv traces")
    p.add_argument("--fov", help="viewport extent HxV degrees (default 100x100)")
    p.add_argument("--gap", type=float, help="keyframe gap seconds (default 0.5)")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("bench", help="time the pipeline stage by stage")
    p.add_argument("--scenario", default="static", choices=SCENARIOS)
    p.add_argument("--users", type=int, default=20)
    p.add_argument("--duration", type=float, default=5.0)
    p.add_argument("--gamma-value", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VptilerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
