"""Pause and turn detection from accelerometer and gyroscope streams.

Pauses are intervals where the windowed standard deviation of the
acceleration magnitude stays under a threshold: the magnitude is
orientation-invariant and the std ignores the gravity offset, so the
walker's ~2 s protocol stops stand out sharply against gait oscillation.

Turns are intervals where the integrated gyroscope rate about the
vertical axis accumulates a large angle.  Positive angles are left turns
(right-hand rule about the upward axis).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MissingSensor, SpanTooShort
from .instance import ACCELEROMETER, GYROSCOPE, Instance
from .timeline import (
    UniformSeries,
    resample_linear,
    sliding_windows,
    to_timeline,
    window_std,
)

MIN_WALK_MS = 1000  # walking segments shorter than this are dropped


@dataclass(frozen=True)
class PauseInterval:
    t_start_ms: float
    t_end_ms: float
    mean_std: float  # mean windowed std of accel magnitude inside the interval

    @property
    def duration_ms(self) -> float:
        return self.t_end_ms - self.t_start_ms


@dataclass(frozen=True)
class TurnEvent:
    t_start_ms: float
    t_end_ms: float
    angle_deg: float  # signed; positive = left turn
    axis: str


@dataclass
class SegmentationParams:
    win_ms: float = 1000.0
    stride_ms: float = 100.0
    pause_std_threshold: float = 0.35  # m/s^2
    min_pause_ms: float = 1000.0
    merge_gap_ms: float = 300.0
    turn_axis: str = "auto"            # "auto" | "x" | "y" | "z"
    turn_window_ms: float = 3000.0
    min_turn_deg: float = 60.0

    def __post_init__(self):
        for name in ("win_ms", "stride_ms", "pause_std_threshold",
                     "min_pause_ms", "merge_gap_ms", "turn_window_ms",
                     "min_turn_deg"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be positive and finite")
        if self.turn_axis not in ("auto", "x", "y", "z"):
            raise ValueError("turn_axis must be 'auto', 'x', 'y' or 'z'")


def accel_magnitude(series: UniformSeries) -> UniformSeries:
    """Per-sample Euclidean norm of a 3-axis series."""
    if not len(series):
        raise ValueError("empty series")
    mag = np.sqrt(np.sum(series.values ** 2, axis=1))
    return UniformSeries(series.t0_ms, series.dt_ms, mag.reshape(-1, 1))


def _analysis_rate(inst: Instance, series) -> float:
    rate = inst.metadata.sensor_rate_hz
    if rate > 0:
        return rate
    t = series.times_ms
    span_s = (float(t[-1]) - float(t[0])) / 1000.0
    return (len(t) - 1) / span_s if span_s > 0 else 1.0


def _merge_spans(spans: list[tuple[float, float]], gap_ms: float):
    """Union of spans, joining those separated by less than gap_ms."""
    merged: list[list[float]] = []
    for a, b in sorted(spans):
        if merged and a - merged[-1][1] < gap_ms:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


def detect_pauses(inst: Instance, params: SegmentationParams | None = None
                  ) -> list[PauseInterval]:
    """Disjoint, time-ordered stationary intervals of the walk."""
    params = params or SegmentationParams()
    inst = to_timeline(inst)
    acc = inst.sensors3.get(ACCELEROMETER)
    if acc is None or len(acc) < 2:
        raise MissingSensor(ACCELEROMETER)
    t = acc.times_ms
    if float(t[-1]) - float(t[0]) < 2 * params.win_ms:
        raise SpanTooShort(
            f"accelerometer span {float(t[-1]) - float(t[0]):.0f} ms "
            f"< {2 * params.win_ms:.0f} ms")

    uniform = resample_linear(acc, _analysis_rate(inst, acc))
    mag = accel_magnitude(uniform)
    centers, stds, half = window_std(mag, params.win_ms, params.stride_ms)

    quiet = stds < params.pause_std_threshold
    spans = [(c - half, c + half) for c, ok in zip(centers, quiet) if ok]
    intervals = []
    for a, b in _merge_spans(spans, params.merge_gap_ms):
        if b - a < params.min_pause_ms:
            continue
        inside = (centers >= a) & (centers <= b) & quiet
        mean_std = float(np.mean(stds[inside])) if np.any(inside) else float("nan")
        intervals.append(PauseInterval(a, b, mean_std))
    return intervals


def split_by_pauses(inst: Instance, params: SegmentationParams | None = None
                    ) -> list[tuple[float, float]]:
    """Walking segments: the complement of pauses over the sensed span."""
    params = params or SegmentationParams()
    pauses = detect_pauses(inst, params)
    acc = to_timeline(inst).sensors3[ACCELEROMETER]
    t0, t1 = float(acc.times_ms[0]), float(acc.times_ms[-1])
    segments = []
    cursor = t0
    for p in pauses:
        if p.t_start_ms - cursor >= MIN_WALK_MS:
            segments.append((cursor, p.t_start_ms))
        cursor = max(cursor, p.t_end_ms)
    if t1 - cursor >= MIN_WALK_MS:
        segments.append((cursor, t1))
    return segments


def _pick_turn_axis(uniform: UniformSeries, rate_hz: float) -> int:
    """Axis with maximal low-frequency energy (sustained rotation).

    A one-second moving average suppresses gait-frequency wobble; the
    heading axis keeps its slow turn-rate plateaus.
    """
    w = max(int(round(rate_hz)), 1)
    kernel = np.ones(w) / w
    energies = []
    for k in range(uniform.channels):
        smooth = np.convolve(uniform.values[:, k], kernel, mode="valid")
        energies.append(float(np.mean(smooth ** 2)))
    return int(np.argmax(energies))


def detect_turns(inst: Instance, params: SegmentationParams | None = None
                 ) -> list[TurnEvent]:
    """Turn events from integrated gyroscope rate about the vertical axis.

    A sliding window flags spans whose net rotation reaches
    min_turn_deg; overlapping flagged windows merge into one event whose
    angle is the integral over the merged span.
    """
    params = params or SegmentationParams()
    inst = to_timeline(inst)
    gyr = inst.sensors3.get(GYROSCOPE)
    if gyr is None or len(gyr) < 2:
        raise MissingSensor(GYROSCOPE)

    rate = _analysis_rate(inst, gyr)
    uniform = resample_linear(gyr, rate)
    if params.turn_axis == "auto":
        axis = _pick_turn_axis(uniform, rate)
    else:
        axis = "xyz".index(params.turn_axis)

    omega = uniform.values[:, axis]  # rad/s
    dt_s = uniform.dt_ms / 1000.0
    # Cumulative trapezoid integral; cum[i] = rotation from sample 0 to i.
    cum = np.concatenate(([0.0], np.cumsum((omega[1:] + omega[:-1]) * dt_s / 2)))

    win = min(params.turn_window_ms, uniform.span_ms)
    w = int(round(win / uniform.dt_ms)) + 1
    if w > len(uniform):
        return []
    stride = max(int(round(params.stride_ms / uniform.dt_ms)), 1)
    starts = np.arange(0, len(uniform) - w + 1, stride)
    swept_deg = np.degrees(cum[starts + w - 1] - cum[starts])

    spans = [(int(i), int(i + w - 1)) for i, a in zip(starts, swept_deg)
             if abs(a) >= params.min_turn_deg]
    events = []
    for i0, i1 in _merge_spans(spans, gap_ms=1):
        i0, i1 = int(i0), int(i1)
        angle = float(np.degrees(cum[i1] - cum[i0]))
        if abs(angle) < params.min_turn_deg:
            continue
        events.append(TurnEvent(
            t_start_ms=uniform.t0_ms + i0 * uniform.dt_ms,
            t_end_ms=uniform.t0_ms + i1 * uniform.dt_ms,
            angle_deg=angle,
            axis="xyz"[axis],
        ))
    return events


def pause_to_dict(p: PauseInterval) -> dict:
    return {"t_start_ms": p.t_start_ms, "t_end_ms": p.t_end_ms,
            "mean_std": p.mean_std}


def turn_to_dict(t: TurnEvent) -> dict:
    return {"t_start_ms": t.t_start_ms, "t_end_ms": t.t_end_ms,
            "angle_deg": t.angle_deg, "axis": t.axis}
