"""On-disk instance layout: typed model, parsers, validator and writer.

An instance is one recorded walk, stored as a directory of up to seven files:

    consumption.csv                 battery level over time
    gps.csv                         WGS84 fixes
    metadata.json                   device and recording settings
    sensors.one.csv                 one-axis sensor samples
    sensors.three.csv               three-axis sensor samples (IMU)
    sensors.three.uncalibrated.csv  three-axis samples with bias estimates
    video.mp4                       chest-mounted camera footage (optional)

CSV files are comma-delimited UTF-8 with LF line endings and a required
header.  IMU timestamps are nanoseconds since device boot; GPS and battery
timestamps are wall-clock milliseconds.  The metadata boot anchor maps the
two clocks onto one timeline (see timeline module).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import (
    IoFailure,
    MalformedCsv,
    MalformedJson,
    MissingMetadata,
    SchemaMismatch,
)

METADATA_FILE = "metadata.json"
SENSORS3_FILE = "sensors.three.csv"
SENSORS1_FILE = "sensors.one.csv"
SENSORS_U3_FILE = "sensors.three.uncalibrated.csv"
GPS_FILE = "gps.csv"
BATTERY_FILE = "consumption.csv"
VIDEO_FILE = "video.mp4"
ANNOTATIONS_FILE = "annotations.json"

SENSORS3_HEADER = ["timestamp_nanos", "sensor_name", "accuracy", "x", "y", "z"]
SENSORS1_HEADER = ["timestamp_nanos", "sensor_name", "accuracy", "value"]
SENSORS_U3_HEADER = SENSORS3_HEADER + ["bias_x", "bias_y", "bias_z"]
GPS_HEADER = ["timestamp_ms", "latitude", "longitude", "accuracy_m"]
BATTERY_HEADER = ["timestamp_ms", "battery_pct", "charging"]

# Canonical IMU stream names used by the validator and analyses.
ACCELEROMETER = "accelerometer"
GYROSCOPE = "gyroscope"
MAGNETOMETER = "magnetometer"
REQUIRED_IMU = (ACCELEROMETER, GYROSCOPE, MAGNETOMETER)

MIN_RESOLUTION = (1280, 720)  # minimum camera resolution under profile "paper"
RATE_TOLERANCE = 0.20         # observed vs declared sensor rate, +/-20%


@dataclass(frozen=True)
class BootAnchor:
    """A (nanoseconds-since-boot, wall-clock ms) pair captured at start."""

    elapsed_nanos: int
    epoch_ms: int


@dataclass
class InstanceMetadata:
    instance_id: str
    device_model: str = ""
    os_version: str = ""
    app_version: str = ""
    camera_resolution: tuple[int, int] = (0, 0)
    video_fps: float = 0.0
    sensor_rate_hz: float = 0.0
    gps_rate_hz: float = 0.0
    start_epoch_ms: int = 0
    stop_epoch_ms: int = 0
    boot_anchor: BootAnchor | None = None
    mount_angle_deg: float = 0.0
    orientation: str = "landscape"
    facility: str = ""
    city: str = ""
    country: str = ""
    extra: dict = field(default_factory=dict)  # unknown JSON keys, preserved


@dataclass(frozen=True)
class SensorSample3:
    t_raw_nanos: int
    sensor_name: str
    accuracy: int
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class SensorSample1:
    t_raw_nanos: int
    sensor_name: str
    accuracy: int
    value: float


@dataclass(frozen=True)
class SensorSampleU3:
    t_raw_nanos: int
    sensor_name: str
    accuracy: int
    x: float
    y: float
    z: float
    bias_x: float
    bias_y: float
    bias_z: float


@dataclass
class SensorSeries:
    """Columnar store of samples from one named sensor.

    values has shape (n, k) with k = 1 or 3.  bias is (n, 3) for
    uncalibrated streams, else None.  t_epoch_ms is filled in by
    timeline.to_timeline and is None straight after load.
    """

    name: str
    t_raw_nanos: np.ndarray
    accuracy: np.ndarray
    values: np.ndarray
    bias: np.ndarray | None = None
    t_epoch_ms: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.t_raw_nanos)

    @property
    def axes(self) -> int:
        return self.values.shape[1]

    @property
    def times_ms(self) -> np.ndarray:
        if self.t_epoch_ms is None:
            raise ValueError(f"series {self.name!r} is not on the wall-clock "
                             "timeline yet; call timeline.to_timeline first")
        return self.t_epoch_ms

    def sample(self, i: int):
        t = int(self.t_raw_nanos[i])
        acc = int(self.accuracy[i])
        if self.bias is not None:
            return SensorSampleU3(t, self.name, acc, *map(float, self.values[i]),
                                  *map(float, self.bias[i]))
        if self.axes == 1:
            return SensorSample1(t, self.name, acc, float(self.values[i, 0]))
        return SensorSample3(t, self.name, acc, *map(float, self.values[i]))

    def take(self, sel) -> "SensorSeries":
        """Return a sub-series selected by slice or index array."""
        return SensorSeries(
            name=self.name,
            t_raw_nanos=self.t_raw_nanos[sel],
            accuracy=self.accuracy[sel],
            values=self.values[sel],
            bias=None if self.bias is None else self.bias[sel],
            t_epoch_ms=None if self.t_epoch_ms is None else self.t_epoch_ms[sel],
        )


@dataclass
class GpsFix:
    t_epoch_ms: int
    lat: float
    lon: float
    accuracy_m: float


@dataclass
class GpsTrack:
    t_epoch_ms: np.ndarray
    lat: np.ndarray
    lon: np.ndarray
    accuracy_m: np.ndarray

    def __len__(self) -> int:
        return len(self.t_epoch_ms)

    @property
    def times_ms(self) -> np.ndarray:
        return self.t_epoch_ms

    def fix(self, i: int) -> GpsFix:
        return GpsFix(int(self.t_epoch_ms[i]), float(self.lat[i]),
                      float(self.lon[i]), float(self.accuracy_m[i]))

    def take(self, sel) -> "GpsTrack":
        return GpsTrack(self.t_epoch_ms[sel], self.lat[sel],
                        self.lon[sel], self.accuracy_m[sel])

    @staticmethod
    def empty() -> "GpsTrack":
        return GpsTrack(np.empty(0, np.int64), np.empty(0), np.empty(0),
                        np.empty(0))


@dataclass
class BatterySample:
    t_epoch_ms: int
    battery_pct: float
    charging: bool


@dataclass
class BatterySeries:
    t_epoch_ms: np.ndarray
    battery_pct: np.ndarray
    charging: np.ndarray

    def __len__(self) -> int:
        return len(self.t_epoch_ms)

    @property
    def times_ms(self) -> np.ndarray:
        return self.t_epoch_ms

    def take(self, sel) -> "BatterySeries":
        return BatterySeries(self.t_epoch_ms[sel], self.battery_pct[sel],
                             self.charging[sel])

    @staticmethod
    def empty() -> "BatterySeries":
        return BatterySeries(np.empty(0, np.int64), np.empty(0),
                             np.empty(0, bool))


@dataclass
class Instance:
    """One recorded walk with all streams, immutable by convention."""

    metadata: InstanceMetadata
    sensors3: dict[str, SensorSeries]
    sensors1: dict[str, SensorSeries]
    sensors_u3: dict[str, SensorSeries]
    gps: GpsTrack
    battery: BatterySeries
    video_path: Path | None = None
    path: Path | None = None
    load_notes: list[str] = field(default_factory=list)

    @property
    def instance_id(self) -> str:
        return self.metadata.instance_id

    @property
    def sensor_only(self) -> bool:
        return self.video_path is None

    def all_sensor_series(self) -> Iterator[SensorSeries]:
        for group in (self.sensors3, self.sensors1, self.sensors_u3):
            yield from group.values()


@dataclass
class LoadOptions:
    require_video: bool = False


# --- parsing -----------------------------------------------------------------


def _parse_int(text: str, file: str, line: int, col: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise MalformedCsv(file, line, f"column {col!r}: {text!r} is not an integer")


def _parse_float(text: str, file: str, line: int, col: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise MalformedCsv(file, line, f"column {col!r}: {text!r} is not a number")


def _parse_bool(text: str, file: str, line: int, col: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1"):
        return True
    if t in ("false", "0"):
        return False
    raise MalformedCsv(file, line, f"column {col!r}: {text!r} is not a boolean")


def _read_rows(path: Path, header: list[str]) -> list[list[str]]:
    """Read a CSV file, enforce its header, and return raw data rows."""
    name = path.name
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            found = next(reader)
        except StopIteration:
            raise SchemaMismatch(name, header, [])
        if [c.strip() for c in found] != header:
            raise SchemaMismatch(name, header, found)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue  # tolerate a trailing blank line
            if len(row) != len(header):
                raise MalformedCsv(name, lineno,
                                   f"expected {len(header)} fields, found {len(row)}")
            rows.append(row)
    return rows


def _group_sensor_rows(path: Path, header: list[str], with_bias: bool,
                       axes: int, notes: list[str]) -> dict[str, SensorSeries]:
    """Parse one sensors.*.csv file into per-sensor columnar series.

    Rows are grouped by sensor_name; each series is stable-sorted by
    timestamp so that equal timestamps keep their file order.  A note is
    recorded if any series arrived out of order.
    """
    rows = _read_rows(path, header)
    name = path.name
    by_sensor: dict[str, dict[str, list]] = {}
    for lineno, row in zip(range(2, len(rows) + 2), rows):
        t = _parse_int(row[0], name, lineno, header[0])
        sensor = row[1].strip()
        if not sensor:
            raise MalformedCsv(name, lineno, "empty sensor_name")
        acc = _parse_int(row[2], name, lineno, header[2])
        vals = [_parse_float(row[3 + i], name, lineno, header[3 + i])
                for i in range(axes)]
        bias = None
        if with_bias:
            bias = [_parse_float(row[3 + axes + i], name, lineno,
                                 header[3 + axes + i]) for i in range(3)]
        bucket = by_sensor.setdefault(
            sensor, {"t": [], "acc": [], "vals": [], "bias": []})
        bucket["t"].append(t)
        bucket["acc"].append(acc)
        bucket["vals"].append(vals)
        if bias is not None:
            bucket["bias"].append(bias)

    out: dict[str, SensorSeries] = {}
    unsorted = False
    for sensor, b in by_sensor.items():
        t = np.asarray(b["t"], np.int64)
        acc = np.asarray(b["acc"], np.int32)
        vals = np.asarray(b["vals"], np.float64).reshape(len(t), axes)
        biases = (np.asarray(b["bias"], np.float64).reshape(len(t), 3)
                  if with_bias else None)
        if np.any(np.diff(t) < 0):
            unsorted = True
            order = np.argsort(t, kind="stable")
            t, acc, vals = t[order], acc[order], vals[order]
            if biases is not None:
                biases = biases[order]
        out[sensor] = SensorSeries(sensor, t, acc, vals, biases)
    if unsorted:
        notes.append(f"unsorted: {name}")
    return out


def _load_gps(path: Path, notes: list[str]) -> GpsTrack:
    rows = _read_rows(path, GPS_HEADER)
    name = path.name
    t, lat, lon, acc = [], [], [], []
    for lineno, row in zip(range(2, len(rows) + 2), rows):
        t.append(_parse_int(row[0], name, lineno, "timestamp_ms"))
        lat.append(_parse_float(row[1], name, lineno, "latitude"))
        lon.append(_parse_float(row[2], name, lineno, "longitude"))
        acc.append(_parse_float(row[3], name, lineno, "accuracy_m"))
    ta = np.asarray(t, np.int64)
    track = GpsTrack(ta, np.asarray(lat), np.asarray(lon), np.asarray(acc))
    if np.any(np.diff(ta) < 0):
        notes.append(f"unsorted: {name}")
        order = np.argsort(ta, kind="stable")
        track = track.take(order)
    return track


def _load_battery(path: Path, notes: list[str]) -> BatterySeries:
    rows = _read_rows(path, BATTERY_HEADER)
    name = path.name
    t, pct, chg = [], [], []
    for lineno, row in zip(range(2, len(rows) + 2), rows):
        t.append(_parse_int(row[0], name, lineno, "timestamp_ms"))
        pct.append(_parse_float(row[1], name, lineno, "battery_pct"))
        chg.append(_parse_bool(row[2], name, lineno, "charging"))
    ta = np.asarray(t, np.int64)
    series = BatterySeries(ta, np.asarray(pct), np.asarray(chg, bool))
    if np.any(np.diff(ta) < 0):
        notes.append(f"unsorted: {name}")
        series = series.take(np.argsort(ta, kind="stable"))
    return series


_METADATA_KEYS = {
    "device_model", "os_version", "app_version", "camera_resolution",
    "video_fps", "sensor_rate_hz", "gps_rate_hz", "start_epoch_ms",
    "stop_epoch_ms", "boot_anchor", "mount_angle_deg", "orientation",
    "facility", "city", "country",
}


def _load_metadata(path: Path, instance_id: str) -> InstanceMetadata:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedJson(str(exc))
    if not isinstance(raw, dict):
        raise MalformedJson("top-level value must be an object")

    def need(key, kind, default=None):
        if key not in raw:
            if default is None:
                raise MalformedJson(f"missing key: {key}")
            return default
        value = raw[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
            raise MalformedJson(f"key {key!r} has wrong type")
        return value

    res = raw.get("camera_resolution", [0, 0])
    if (not isinstance(res, (list, tuple)) or len(res) != 2
            or not all(isinstance(v, int) for v in res)):
        raise MalformedJson("camera_resolution must be [width, height]")

    anchor = None
    if raw.get("boot_anchor") is not None:
        a = raw["boot_anchor"]
        if (not isinstance(a, dict) or "elapsed_nanos" not in a
                or "epoch_ms" not in a):
            raise MalformedJson("boot_anchor must carry elapsed_nanos and epoch_ms")
        anchor = BootAnchor(int(a["elapsed_nanos"]), int(a["epoch_ms"]))

    orientation = need("orientation", str, "landscape")
    if orientation not in ("landscape", "portrait"):
        raise MalformedJson("orientation must be 'landscape' or 'portrait'")

    return InstanceMetadata(
        instance_id=instance_id,
        device_model=need("device_model", str, ""),
        os_version=need("os_version", str, ""),
        app_version=need("app_version", str, ""),
        camera_resolution=(res[0], res[1]),
        video_fps=need("video_fps", float, 0.0),
        sensor_rate_hz=need("sensor_rate_hz", float, 0.0),
        gps_rate_hz=need("gps_rate_hz", float, 0.0),
        start_epoch_ms=need("start_epoch_ms", int),
        stop_epoch_ms=need("stop_epoch_ms", int),
        boot_anchor=anchor,
        mount_angle_deg=need("mount_angle_deg", float, 0.0),
        orientation=orientation,
        facility=need("facility", str, ""),
        city=need("city", str, ""),
        country=need("country", str, ""),
        extra={k: v for k, v in raw.items() if k not in _METADATA_KEYS},
    )


def load_instance(dir: str | Path, options: LoadOptions | None = None) -> Instance:
    """Parse an instance directory into a typed Instance.

    Missing optional files (video.mp4, consumption.csv, sensors.one.csv,
    and the other sensor/GPS files) yield empty or absent members and a
    note in Instance.load_notes.  All series come back sorted by
    timestamp; files that needed reordering are noted as "unsorted: <file>".
    """
    options = options or LoadOptions()
    dir = Path(dir)
    meta_path = dir / METADATA_FILE
    if not meta_path.is_file():
        raise MissingMetadata(f"no {METADATA_FILE} in {dir}")
    notes: list[str] = []
    metadata = _load_metadata(meta_path, dir.name)

    def optional(name: str) -> Path | None:
        p = dir / name
        if p.is_file():
            return p
        notes.append(f"missing: {name}")
        return None

    p3 = optional(SENSORS3_FILE)
    sensors3 = (_group_sensor_rows(p3, SENSORS3_HEADER, False, 3, notes)
                if p3 else {})
    p1 = optional(SENSORS1_FILE)
    sensors1 = (_group_sensor_rows(p1, SENSORS1_HEADER, False, 1, notes)
                if p1 else {})
    pu = optional(SENSORS_U3_FILE)
    sensors_u3 = (_group_sensor_rows(pu, SENSORS_U3_HEADER, True, 3, notes)
                  if pu else {})
    pg = optional(GPS_FILE)
    gps = _load_gps(pg, notes) if pg else GpsTrack.empty()
    pb = optional(BATTERY_FILE)
    battery = _load_battery(pb, notes) if pb else BatterySeries.empty()

    video = dir / VIDEO_FILE
    video_path: Path | None = video if video.is_file() else None
    if video_path is None:
        notes.append(f"missing: {VIDEO_FILE}")
        notes.append("sensor_only")
        if options.require_video:
            raise IoFailure(f"video required but {video} is absent")

    return Instance(metadata=metadata, sensors3=sensors3, sensors1=sensors1,
                    sensors_u3=sensors_u3, gps=gps, battery=battery,
                    video_path=video_path, path=dir, load_notes=notes)


# --- validation ----------------------------------------------------------------


@dataclass(frozen=True)
class ValidationEntry:
    severity: str  # "error" | "warning" | "info"
    code: str
    message: str


@dataclass
class ValidationReport:
    entries: list[ValidationEntry] = field(default_factory=list)

    def add(self, severity: str, code: str, message: str) -> None:
        self.entries.append(ValidationEntry(severity, code, message))

    @property
    def errors(self) -> list[ValidationEntry]:
        return [e for e in self.entries if e.severity == "error"]

    @property
    def warnings(self) -> list[ValidationEntry]:
        return [e for e in self.entries if e.severity == "warning"]

    @property
    def passed(self) -> bool:
        return not self.errors

    @property
    def empty(self) -> bool:
        return not self.entries

    def codes(self) -> list[str]:
        return [e.code for e in self.entries]


def _observed_rate_hz(times: np.ndarray, per_second: float) -> float | None:
    """Observed sampling rate as (n-1)/span; None when under 2 samples."""
    if len(times) < 2:
        return None
    span = float(times[-1] - times[0]) / per_second
    if span <= 0:
        return None
    return (len(times) - 1) / span


def validate_instance(inst: Instance, profile: str = "paper") -> ValidationReport:
    """Check instance invariants and return a report of findings.

    Profile "lenient" checks structure only (ranges, ordering, anchor,
    metadata sanity).  Profile "paper" also requires the three IMU
    streams, the minimum camera resolution, and declared-vs-observed
    sampling rates within tolerance.  An empty report means the instance
    satisfies the profile; absent optional streams are not findings.
    """
    if profile not in ("paper", "lenient"):
        raise ValueError(f"unknown validation profile: {profile!r}")
    report = ValidationReport()
    meta = inst.metadata

    if meta.start_epoch_ms > meta.stop_epoch_ms:
        report.add("error", "metadata.time",
                   "start_epoch_ms is after stop_epoch_ms")
    elif meta.start_epoch_ms == meta.stop_epoch_ms:
        report.add("warning", "metadata.time", "zero-duration recording")
    if meta.boot_anchor is None:
        report.add("error", "metadata.anchor", "boot_anchor is missing")

    for note in inst.load_notes:
        if note.startswith("unsorted:"):
            report.add("warning", "unsorted", note)

    for series in inst.all_sensor_series():
        if len(series) and series.t_raw_nanos[0] < 0:
            report.add("error", "sensor.time",
                       f"negative timestamp in {series.name}")
        if len(series) and not np.all(np.isfinite(series.values)):
            report.add("error", "sensor.finite",
                       f"non-finite value in {series.name}")
        if series.bias is not None and len(series) \
                and not np.all(np.isfinite(series.bias)):
            report.add("error", "sensor.finite",
                       f"non-finite bias in {series.name}")

    if len(inst.gps):
        if (np.any(inst.gps.lat < -90) or np.any(inst.gps.lat > 90)
                or np.any(inst.gps.lon < -180) or np.any(inst.gps.lon > 180)):
            report.add("error", "gps.range",
                       "latitude/longitude outside WGS84 bounds")
        if np.any(inst.gps.accuracy_m < 0):
            report.add("error", "gps.accuracy", "negative GPS accuracy")
    if len(inst.battery):
        if np.any(inst.battery.battery_pct < 0) or np.any(inst.battery.battery_pct > 100):
            report.add("error", "battery.range", "battery_pct outside 0..100")

    if profile == "paper":
        w, h = meta.camera_resolution
        if w < MIN_RESOLUTION[0] or h < MIN_RESOLUTION[1]:
            report.add("error", "metadata.resolution",
                       f"camera resolution {w}x{h} below "
                       f"{MIN_RESOLUTION[0]}x{MIN_RESOLUTION[1]}")
        for name in REQUIRED_IMU:
            if name not in inst.sensors3 or not len(inst.sensors3[name]):
                report.add("error", f"sensor.missing({name})",
                           f"required sensor not present: {name}")
        if meta.sensor_rate_hz > 0:
            for name in REQUIRED_IMU:
                series = inst.sensors3.get(name)
                if series is None:
                    continue
                rate = _observed_rate_hz(series.t_raw_nanos, 1e9)
                if rate is None:
                    continue
                if abs(rate - meta.sensor_rate_hz) > RATE_TOLERANCE * meta.sensor_rate_hz:
                    report.add("warning", f"rate.mismatch({name})",
                               f"{name} observed {rate:.2f} Hz, "
                               f"declared {meta.sensor_rate_hz:g} Hz")
        if meta.gps_rate_hz > 0 and len(inst.gps) >= 2:
            rate = _observed_rate_hz(inst.gps.t_epoch_ms, 1e3)
            # Real receivers often undershoot the declared rate; anything
            # from 1 Hz up to the declared rate (+tolerance) is acceptable.
            if rate is not None and not (
                    1.0 <= rate <= meta.gps_rate_hz * (1 + RATE_TOLERANCE)):
                report.add("warning", "rate.mismatch(gps)",
                           f"gps observed {rate:.2f} Hz, "
                           f"declared {meta.gps_rate_hz:g} Hz")
    return report


# --- emission -------------------------------------------------------------------


def _fmt(value) -> str:
    """Canonical numeric formatting: shortest round-trip decimal."""
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    return str(int(value))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _sensor_rows(group: dict[str, SensorSeries], with_bias: bool):
    """Merge per-sensor series back into file order: by timestamp, then
    by sensor name for reproducible ties."""
    merged = []
    for name in sorted(group):
        s = group[name]
        for i in range(len(s)):
            row = [str(int(s.t_raw_nanos[i])), name, str(int(s.accuracy[i]))]
            row += [_fmt(v) for v in s.values[i]]
            if with_bias:
                row += [_fmt(v) for v in s.bias[i]]
            merged.append((int(s.t_raw_nanos[i]), name, row))
    merged.sort(key=lambda item: (item[0], item[1]))
    return [row for _, _, row in merged]


def metadata_to_json(meta: InstanceMetadata) -> dict:
    doc = {
        "device_model": meta.device_model,
        "os_version": meta.os_version,
        "app_version": meta.app_version,
        "camera_resolution": list(meta.camera_resolution),
        "video_fps": meta.video_fps,
        "sensor_rate_hz": meta.sensor_rate_hz,
        "gps_rate_hz": meta.gps_rate_hz,
        "start_epoch_ms": meta.start_epoch_ms,
        "stop_epoch_ms": meta.stop_epoch_ms,
        "boot_anchor": None if meta.boot_anchor is None else {
            "elapsed_nanos": meta.boot_anchor.elapsed_nanos,
            "epoch_ms": meta.boot_anchor.epoch_ms,
        },
        "mount_angle_deg": meta.mount_angle_deg,
        "orientation": meta.orientation,
        "facility": meta.facility,
        "city": meta.city,
        "country": meta.country,
    }
    doc.update(meta.extra)
    return doc


def emit_instance(inst: Instance, dir: str | Path) -> None:
    """Write an instance in the canonical layout.

    Numeric values use shortest round-trip decimals so that a reload is
    exact.  Empty optional members produce no file (absence round-trips).
    The directory name becomes the instance identity on reload.
    """
    dir = Path(dir)
    try:
        dir.mkdir(parents=True, exist_ok=True)
        with open(dir / METADATA_FILE, "w", encoding="utf-8") as fh:
            json.dump(metadata_to_json(inst.metadata), fh, indent=2,
                      ensure_ascii=False)
            fh.write("\n")
        if inst.sensors3:
            _write_csv(dir / SENSORS3_FILE, SENSORS3_HEADER,
                       _sensor_rows(inst.sensors3, False))
        if inst.sensors1:
            _write_csv(dir / SENSORS1_FILE, SENSORS1_HEADER,
                       _sensor_rows(inst.sensors1, False))
        if inst.sensors_u3:
            _write_csv(dir / SENSORS_U3_FILE, SENSORS_U3_HEADER,
                       _sensor_rows(inst.sensors_u3, True))
        if len(inst.gps):
            rows = [[str(int(t)), _fmt(la), _fmt(lo), _fmt(a)]
                    for t, la, lo, a in zip(inst.gps.t_epoch_ms, inst.gps.lat,
                                            inst.gps.lon, inst.gps.accuracy_m)]
            _write_csv(dir / GPS_FILE, GPS_HEADER, rows)
        if len(inst.battery):
            rows = [[str(int(t)), _fmt(p), "true" if c else "false"]
                    for t, p, c in zip(inst.battery.t_epoch_ms,
                                       inst.battery.battery_pct,
                                       inst.battery.charging)]
            _write_csv(dir / BATTERY_FILE, BATTERY_HEADER, rows)
        if inst.video_path is not None and Path(inst.video_path).is_file():
            target = dir / VIDEO_FILE
            if Path(inst.video_path).resolve() != target.resolve():
                target.write_bytes(Path(inst.video_path).read_bytes())
    except OSError as exc:
        raise IoFailure(f"cannot write instance to {dir}: {exc}") from exc


def with_instance_id(inst: Instance, instance_id: str) -> Instance:
    """Copy of inst with a new identity (used when re-homing snippets)."""
    meta = replace(inst.metadata, instance_id=instance_id)
    return replace(inst, metadata=meta)
