"""Report artifacts: JSON/CSV emission plus matplotlib figure rendering."""

import csv
import json
import os
import tempfile

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .scheme import REGION_ORDER

REGION_COLORS = {
    "fov_fine": "#c0392b",
    "fov": "#e67e22",
    "buffer": "#2980b9",
    "oov": "#7f8c8d",
}


def write_atomic(path, data):
    """Write bytes (or text) with a same-directory temp + rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(doc, path):
    write_atomic(path, json.dumps(doc, indent=2, sort_keys=False) + "\n")


def write_csv(path, header, rows):
    out = []
    writer_target = _ListWriter(out)
    writer = csv.writer(writer_target)
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    write_atomic(path, "".join(out))


class _ListWriter:
    def __init__(self, sink):
        self.sink = sink

    def write(self, text):
        self.sink.append(text)


def fig_redundancy(redundancy_by_scheme, path, title="Mean pixel redundancy"):
    names = list(redundancy_by_scheme)
    values = [redundancy_by_scheme[n] for n in names]
    fig, ax = plt.subplots(figsize=(6, 3.2))
    bars = ax.bar(range(len(names)), values, color="#34495e")
    for bar, v in zip(bars, values):
        ax.text(bar.get_x() + bar.get_width() / 2, v, f"{v:.0f}%", ha="center", va="bottom", fontsize=8)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("% redundancy")
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def fig_distribution(times, counts_by_region, sizes_by_region, vp_share, path):
    fig, axes = plt.subplots(1, 3, figsize=(10, 3))
    for region in REGION_ORDER:
        axes[0].plot(times, counts_by_region[region], label=region, color=REGION_COLORS[region])
        axes[1].plot(times, sizes_by_region[region], label=region, color=REGION_COLORS[region])
    axes[0].set_title("tiles per region", fontsize=9)
    axes[0].set_xlabel("keyframe (s)")
    axes[1].set_title("mean tile size (BTs)", fontsize=9)
    axes[1].set_xlabel("keyframe (s)")
    axes[2].bar(
        range(len(REGION_ORDER)),
        [vp_share[r] for r in REGION_ORDER],
        color=[REGION_COLORS[r] for r in REGION_ORDER],
    )
    axes[2].set_xticks(range(len(REGION_ORDER)))
    axes[2].set_xticklabels(REGION_ORDER, rotation=20, fontsize=8)
    axes[2].set_title("% user VP per region", fontsize=9)
    axes[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def fig_timing(timing, path):
    """Stacked per-stage bars plus the end-to-end mean line."""
    stages = list(timing.stage_means)
    fig, ax = plt.subplots(figsize=(6, 3.2))
    bottom = 0.0
    for stage in stages:
        v = timing.stage_means[stage] * 1e3
        ax.bar([0], [v], bottom=[bottom], label=stage, width=0.4)
        bottom += v
    ax.axhline(timing.end_to_end_mean * 1e3, color="black", linestyle="--", linewidth=1,
               label="end-to-end mean")
    ax.set_xticks([])
    ax.set_ylabel("ms per keyframe")
    ax.set_title("pipeline stage dissection", fontsize=10)
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
