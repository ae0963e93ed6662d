"""Head-orientation trace ingest and keyframe selection.

Traces are CSV files with a `user_id,t,yaw,pitch` header.  Yaw is
normalized into [-180, 180) on ingest; pitch outside [-90, 90] is an
error.  Duplicate (user, t) rows collapse to the last occurrence.
"""

import bisect
import csv
import math
from dataclasses import dataclass

from .errors import EmptyInputError, MissingUserError, TraceError
from .projection import normalize_yaw


@dataclass(frozen=True)
class ViewportSample:
    user_id: int
    t: float
    yaw: float
    pitch: float


@dataclass(frozen=True)
class TraceSet:
    video_id: str
    duration: float
    users: dict  # user_id -> tuple[ViewportSample, ...], sorted by t

    @property
    def user_ids(self):
        return sorted(self.users)


@dataclass(frozen=True)
class Keyframe:
    t: float
    samples: dict  # user_id -> ViewportSample


def _parse_row(row, line_no):
    if len(row) != 4:
        raise TraceError(f"expected 4 fields, got {len(row)}", line=line_no)
    try:
        user_id = int(row[0])
        t = float(row[1])
        yaw = float(row[2])
        pitch = float(row[3])
    except ValueError as exc:
        raise TraceError(f"malformed value ({exc})", line=line_no) from None
    if t < 0.0:
        raise TraceError(f"negative timestamp {t}", line=line_no)
    if not -90.0 <= pitch <= 90.0:
        raise TraceError(f"pitch {pitch} outside [-90, 90]", line=line_no)
    return ViewportSample(user_id=user_id, t=t, yaw=normalize_yaw(yaw), pitch=pitch)


def parse_traces(path, video_id=None):
    """Read one trace CSV into a TraceSet grouped and sorted by user."""
    if video_id is None:
        video_id = str(path).rsplit("/", 1)[-1].rsplit(".", 1)[0]
    per_user = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"trace file {path} is empty") from None
        if [h.strip().lower() for h in header] != ["user_id", "t", "yaw", "pitch"]:
            raise TraceError(f"bad header {header!r} in {path}", line=1)
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            sample = _parse_row(row, line_no)
            per_user.setdefault(sample.user_id, {})[sample.t] = sample
    if not per_user:
        raise EmptyInputError(f"trace file {path} has no samples")
    users = {}
    duration = 0.0
    for uid in sorted(per_user):
        samples = tuple(per_user[uid][t] for t in sorted(per_user[uid]))
        users[uid] = samples
        duration = max(duration, samples[-1].t)
    _check_coverage(users, duration, path)
    return TraceSet(video_id=video_id, duration=duration, users=users)


def _check_coverage(users, duration, path):
    # every user must span [0, duration] to within one sampling interval
    for uid, samples in users.items():
        if len(samples) < 2:
            continue
        gaps = [b.t - a.t for a, b in zip(samples, samples[1:])]
        gaps.sort()
        interval = gaps[len(gaps) // 2]
        if samples[0].t > interval or samples[-1].t < duration - interval:
            raise TraceError(
                f"user {uid} covers [{samples[0].t}, {samples[-1].t}] "
                f"but the trace spans [0, {duration}] ({path})"
            )


def write_traces(traces, path):
    """Serialize a TraceSet back to the CSV trace format."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "t", "yaw", "pitch"])
        for uid in traces.user_ids:
            for s in traces.users[uid]:
                writer.writerow([uid, repr(s.t), repr(s.yaw), repr(s.pitch)])


def keyframe_times(duration, gap):
    if gap <= 0.0:
        raise TraceError(f"keyframe gap must be positive, got {gap}")
    count = int(math.floor(duration / gap + 1e-9)) + 1
    return [k * gap for k in range(count)]


def sample_keyframes(traces, gap=0.5):
    """Pick, per keyframe time, each user's nearest sample (ties -> earlier)."""
    if not traces.users:
        raise EmptyInputError("trace set has no users")
    for uid, samples in traces.users.items():
        if not samples:
            raise MissingUserError(f"user {uid} has no samples")
    times = {uid: [s.t for s in samples] for uid, samples in traces.users.items()}
    keyframes = []
    for t in keyframe_times(traces.duration, gap):
        chosen = {}
        for uid, samples in traces.users.items():
            ts = times[uid]
            i = bisect.bisect_left(ts, t)
            if i == 0:
                chosen[uid] = samples[0]
            elif i == len(ts):
                chosen[uid] = samples[-1]
            else:
                before, after = samples[i - 1], samples[i]
                if t - before.t <= after.t - t:
                    chosen[uid] = before
                else:
                    chosen[uid] = after
        keyframes.append(Keyframe(t=t, samples=chosen))
    return keyframes
