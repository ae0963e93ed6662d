"""Seeded synthetic gaze scenarios for desk-scale runs and tests."""

import numpy as np

from .errors import EmptyInputError
from .projection import normalize_yaw
from .traces import TraceSet, ViewportSample

SCENARIOS = ("static", "slow-pan", "two-cluster", "random-walk")


def generate_traces(
    scenario,
    users=30,
    duration=60.0,
    rate=30.0,
    seed=0,
    center=(0.0, 0.0),
    video_id=None,
):
    """Build a TraceSet following one of the scripted gaze scenarios.

    static      every user fixates center plus a constant jitter <= 5 deg
    slow-pan    the fixation drifts 10 deg/s in yaw
    two-cluster users split between two fixation centers 120 deg apart
    random-walk per-user gaussian walk, 2 deg steps
    """
    if scenario not in SCENARIOS:
        raise EmptyInputError(
            f"unknown scenario {scenario!r}; choose one of {', '.join(SCENARIOS)}"
        )
    if users < 1:
        raise EmptyInputError("need at least one user")
    rng = np.random.default_rng(seed)
    n_samples = int(round(duration * rate)) + 1
    times = np.arange(n_samples) / rate

    user_samples = {}
    for uid in range(users):
        jitter_yaw = rng.uniform(-5.0, 5.0)
        jitter_pitch = rng.uniform(-5.0, 5.0)
        if scenario == "static":
            yaw = np.full(n_samples, center[0] + jitter_yaw)
            pitch = np.full(n_samples, center[1] + jitter_pitch)
        elif scenario == "slow-pan":
            yaw = center[0] + jitter_yaw + 10.0 * times
            pitch = np.full(n_samples, center[1] + jitter_pitch)
        elif scenario == "two-cluster":
            base = (-60.0, 0.0) if uid % 2 == 0 else (60.0, 10.0)
            yaw = np.full(n_samples, base[0] + jitter_yaw)
            pitch = np.full(n_samples, base[1] + jitter_pitch)
        else:  # random-walk
            yaw_steps = rng.normal(0.0, 2.0, n_samples)
            pitch_steps = rng.normal(0.0, 1.0, n_samples)
            yaw = center[0] + jitter_yaw + np.cumsum(yaw_steps)
            pitch = center[1] + jitter_pitch + np.cumsum(pitch_steps)
        pitch = np.clip(pitch, -90.0, 90.0)
        samples = tuple(
            ViewportSample(
                user_id=uid,
                t=float(t),
                yaw=normalize_yaw(float(y)),
                pitch=float(p),
            )
            for t, y, p in zip(times, yaw, pitch)
        )
        user_samples[uid] = samples

    if video_id is None:
        video_id = f"synth-{scenario}"
    return TraceSet(video_id=video_id, duration=float(times[-1]), users=user_samples)
