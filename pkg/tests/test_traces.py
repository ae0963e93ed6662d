import math

import pytest

from vptiler.errors import EmptyInputError, MissingUserError, TraceError
from vptiler.traces import (
    TraceSet,
    ViewportSample,
    keyframe_times,
    parse_traces,
    sample_keyframes,
    write_traces,
)


def write_csv(path, rows, header="user_id,t,yaw,pitch"):
    path.write_text(header + "\n" + "\n".join(rows) + ("\n" if rows else ""))


def test_single_row_identity(tmp_path):
    p = tmp_path / "v.csv"
    write_csv(p, ["0,0.0,0.0,0.0"])
    ts = parse_traces(p)
    assert ts.video_id == "v"
    assert list(ts.users) == [0]
    (sample,) = ts.users[0]
    assert (sample.t, sample.yaw, sample.pitch) == (0.0, 0.0, 0.0)


def test_yaw_wraparound(tmp_path):
    p = tmp_path / "v.csv"
    write_csv(p, ["0,0.0,185.0,0.0", "0,1.0,-185.0,10.0", "0,2.0,180.0,0.0"])
    ts = parse_traces(p)
    yaws = [s.yaw for s in ts.users[0]]
    assert yaws == [-175.0, 175.0, -180.0]


def test_duplicate_rows_collapse_to_last(tmp_path):
    p = tmp_path / "v.csv"
    write_csv(p, ["0,0.0,10.0,0.0", "0,1.0,20.0,0.0", "0,1.0,30.0,5.0"])
    ts = parse_traces(p)
    assert [s.yaw for s in ts.users[0]] == [10.0, 30.0]
    assert [s.t for s in ts.users[0]] == [0.0, 1.0]


def test_malformed_row_reports_line(tmp_path):
    p = tmp_path / "v.csv"
    write_csv(p, ["0,0.0,0.0,0.0", "0,not-a-number,0.0,0.0"])
    with pytest.raises(TraceError, match="line 3"):
        parse_traces(p)


def test_pitch_out_of_range_is_error(tmp_path):
    p = tmp_path / "v.csv"
    write_csv(p, ["0,0.0,0.0,95.0"])
    with pytest.raises(TraceError, match="pitch"):
        parse_traces(p)


def test_empty_file_is_error(tmp_path):
    p = tmp_path / "v.csv"
    p.write_text("")
    with pytest.raises(EmptyInputError):
        parse_traces(p)
    p.write_text("user_id,t,yaw,pitch\n")
    with pytest.raises(EmptyInputError):
        parse_traces(p)


def test_synthetic_20_users_30hz(tmp_path):
    rows = []
    for uid in range(20):
        for k in range(1800):
            rows.append(f"{uid},{k / 30.0},{(uid * 7) % 360 - 180},{uid - 10}")
    p = tmp_path / "big.csv"
    write_csv(p, rows)
    ts = parse_traces(p)
    assert len(ts.users) == 20
    for samples in ts.users.values():
        assert len(samples) == 1800
        assert all(a.t < b.t for a, b in zip(samples, samples[1:]))


def test_roundtrip_is_fixed_point(tmp_path):
    p = tmp_path / "v.csv"
    write_csv(p, ["0,0.0,185.0,3.5", "0,0.5,12.25,-4.125", "1,0.0,-7.0,0.0", "1,0.5,-8.0,1.0"])
    ts = parse_traces(p)
    q = tmp_path / "v2.csv"
    write_traces(ts, q)
    ts2 = parse_traces(q, video_id=ts.video_id)
    assert ts2 == ts
    r = tmp_path / "v3.csv"
    write_traces(ts2, r)
    assert q.read_text() == r.read_text()


def make_trace(duration=60.0, rate=30.0, users=1):
    data = {}
    n = int(duration * rate) + 1
    for uid in range(users):
        data[uid] = tuple(
            ViewportSample(uid, k / rate, 0.0, 0.0)
            for k in range(n)
        )
    return TraceSet(video_id="t", duration=duration, users=data)


def test_keyframe_count_formula():
    for gap_tenths in range(1, 21):
        gap = gap_tenths / 10.0
        n = len(keyframe_times(60.0, gap))
        assert n == math.floor(60.0 / gap) + 1, gap


def test_keyframe_count_default_gap():
    ts = make_trace(duration=60.0)
    assert len(sample_keyframes(ts, 0.5)) == 121


def test_nearest_sample_tie_breaks_earlier():
    samples = tuple(
        ViewportSample(0, round(k * 0.033, 6), float(k), 0.0)
        for k in range(40)
    )
    ts = TraceSet(video_id="t", duration=samples[-1].t, users={0: samples})
    kfs = sample_keyframes(ts, 0.5)
    chosen = kfs[1].samples[0]
    assert chosen.t == pytest.approx(0.495)  # 0.495 beats 0.528 for t=0.5
    # exact tie: sample at 0.4 and 0.6 around keyframe 0.5 -> earlier wins
    two = tuple(
        ViewportSample(0, t, t, 0.0) for t in (0.0, 0.4, 0.6)
    )
    ts2 = TraceSet(video_id="t", duration=0.6, users={0: two})
    assert sample_keyframes(ts2, 0.5)[1].samples[0].t == 0.4


def test_doubled_gap_subsamples():
    ts = make_trace(duration=10.0)
    fine = sample_keyframes(ts, 0.5)
    coarse = sample_keyframes(ts, 1.0)
    assert [kf.t for kf in coarse] == [kf.t for kf in fine][::2]


def test_missing_user_error():
    ts = TraceSet(video_id="t", duration=1.0, users={0: ()})
    with pytest.raises(MissingUserError):
        sample_keyframes(ts, 0.5)


def test_gap_must_be_positive():
    ts = make_trace(duration=1.0)
    with pytest.raises(TraceError):
        sample_keyframes(ts, 0.0)
