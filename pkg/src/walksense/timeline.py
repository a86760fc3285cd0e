"""Common wall-clock timeline: clock alignment, slicing, resampling, windows.

IMU samples carry boot-relative nanosecond timestamps while GPS and
battery rows are already wall-clock milliseconds.  The metadata boot
anchor (elapsed_nanos, epoch_ms) makes the mapping affine:

    t_epoch_ms(raw) = anchor.epoch_ms + (raw - anchor.elapsed_nanos) / 1e6

All intervals in this package are half-open [t0, t1) so adjacent cuts
partition exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import EmptyInterval, MissingAnchor, TooFewSamples, WindowTooLarge
from .instance import BootAnchor, Instance, SensorSeries


@dataclass(frozen=True)
class Timeline:
    origin_epoch_ms: int
    boot_anchor: BootAnchor

    def epoch_ms(self, raw_nanos: np.ndarray) -> np.ndarray:
        a = self.boot_anchor
        return a.epoch_ms + (raw_nanos.astype(np.float64) - a.elapsed_nanos) / 1e6


@dataclass
class UniformSeries:
    """Values on a regular millisecond grid, one column per channel."""

    t0_ms: float
    dt_ms: float
    values: np.ndarray  # shape (n, k)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def channels(self) -> int:
        return self.values.shape[1]

    @property
    def times_ms(self) -> np.ndarray:
        return self.t0_ms + self.dt_ms * np.arange(len(self.values))

    @property
    def span_ms(self) -> float:
        return self.dt_ms * max(len(self.values) - 1, 0)


def timeline_of(inst: Instance) -> Timeline:
    anchor = inst.metadata.boot_anchor
    if anchor is None:
        raise MissingAnchor(f"instance {inst.instance_id!r} has no boot_anchor")
    return Timeline(inst.metadata.start_epoch_ms, anchor)


def to_timeline(inst: Instance) -> Instance:
    """Return a copy whose sensor series carry wall-clock t_epoch_ms.

    GPS and battery timestamps are untouched; ordering is preserved since
    the clock mapping is affine and increasing.  Idempotent.
    """
    tl = timeline_of(inst)
    if all(s.t_epoch_ms is not None for s in inst.all_sensor_series()):
        return inst

    def normalize(group: dict[str, SensorSeries]) -> dict[str, SensorSeries]:
        out = {}
        for name, s in group.items():
            out[name] = replace(s, t_epoch_ms=tl.epoch_ms(s.t_raw_nanos))
        return out

    return replace(inst,
                   sensors3=normalize(inst.sensors3),
                   sensors1=normalize(inst.sensors1),
                   sensors_u3=normalize(inst.sensors_u3))


def slice_series(series, t0_ms: float, t1_ms: float):
    """Samples with t0_ms <= t < t1_ms, order preserved.

    Works on any series exposing .times_ms and .take (sensor, GPS,
    battery).  Slices over [a,b) and [b,c) partition the slice over [a,c).
    """
    if t0_ms >= t1_ms:
        raise EmptyInterval(f"t0 {t0_ms} >= t1 {t1_ms}")
    times = series.times_ms
    i0 = int(np.searchsorted(times, t0_ms, side="left"))
    i1 = int(np.searchsorted(times, t1_ms, side="left"))
    return series.take(slice(i0, i1))


def resample_linear(series: SensorSeries, rate_hz: float) -> UniformSeries:
    """Linear interpolation of a sensor series onto a uniform grid.

    The grid runs from the first to the last timestamp at 1000/rate_hz ms
    steps; no extrapolation beyond the endpoints.  Linear signals are
    reproduced exactly, and resampling a uniform series at its native
    rate is the identity.
    """
    if rate_hz <= 0:
        raise ValueError("rate_hz must be positive")
    times = series.times_ms
    if len(times) < 2:
        raise TooFewSamples(f"series {series.name!r} has {len(times)} samples")
    dt = 1000.0 / rate_hz
    t0 = float(times[0])
    span = float(times[-1]) - t0
    n = int(np.floor(span / dt + 1e-9)) + 1
    grid = t0 + dt * np.arange(n)
    out = np.empty((n, series.values.shape[1]))
    for k in range(series.values.shape[1]):
        out[:, k] = np.interp(grid, times, series.values[:, k])
    return UniformSeries(t0_ms=t0, dt_ms=dt, values=out)


def sliding_windows(series: UniformSeries, win_ms: float, stride_ms: float):
    """Views over fully-contained windows.

    Yields (t_center_ms, values_view) with the count
    floor((span - win)/stride) + 1 for span >= win.  Window and stride are
    rounded to whole sample counts.
    """
    dt = series.dt_ms
    if win_ms < dt or stride_ms < dt:
        raise ValueError("win_ms and stride_ms must be >= dt_ms")
    w = int(round(win_ms / dt)) + 1          # samples per window, inclusive span
    s = max(int(round(stride_ms / dt)), 1)
    n = len(series)
    if w > n:
        raise WindowTooLarge(f"window {win_ms} ms exceeds span {series.span_ms} ms")
    count = (n - w) // s + 1
    for i in range(count):
        start = i * s
        center = series.t0_ms + (start + (w - 1) / 2.0) * dt
        yield center, series.values[start:start + w]


def window_std(series: UniformSeries, win_ms: float, stride_ms: float):
    """Population standard deviation per sliding window, channel 0.

    Returns (centers_ms, stds, half_width_ms); the half width is the
    window's reach on either side of its center.
    """
    dt = series.dt_ms
    w = int(round(win_ms / dt)) + 1
    centers, stds = [], []
    for center, view in sliding_windows(series, win_ms, stride_ms):
        centers.append(center)
        stds.append(float(np.std(view[:, 0])))
    half = (w - 1) * dt / 2.0
    return np.asarray(centers), np.asarray(stds), half
