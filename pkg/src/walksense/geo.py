"""GPS metrics, per-route and per-city summaries, and GeoJSON export."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyInput, InvalidCoordinate, NoGpsData
from .instance import (
    ACCELEROMETER,
    GYROSCOPE,
    MAGNETOMETER,
    GpsTrack,
    Instance,
)

EARTH_RADIUS_M = 6_371_000.0
DEFAULT_MAX_ACCURACY_M = 25.0  # fixes reported worse than this are dropped


def haversine_m(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Great-circle distance in meters between two (lat, lon) pairs."""
    lat1, lon1 = a
    lat2, lon2 = b
    for lat, lon in (a, b):
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            raise InvalidCoordinate(f"({lat}, {lon}) outside WGS84 bounds")
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def _haversine_arrays(lat: np.ndarray, lon: np.ndarray) -> float:
    p = np.radians(lat)
    dp = np.diff(p)
    dl = np.radians(np.diff(lon))
    h = np.sin(dp / 2) ** 2 + np.cos(p[:-1]) * np.cos(p[1:]) * np.sin(dl / 2) ** 2
    return float(np.sum(2 * EARTH_RADIUS_M * np.arcsin(np.minimum(1.0, np.sqrt(h)))))


@dataclass
class TrackOptions:
    max_accuracy_m: float = DEFAULT_MAX_ACCURACY_M


def track_length_m(track: GpsTrack, options: TrackOptions | None = None) -> float:
    """Sum of haversine hops over consecutive accepted fixes."""
    options = options or TrackOptions()
    if len(track) < 2:
        return 0.0
    keep = track.accuracy_m <= options.max_accuracy_m
    lat, lon = track.lat[keep], track.lon[keep]
    if len(lat) < 2:
        return 0.0
    return _haversine_arrays(lat, lon)


@dataclass
class InstanceSummary:
    instance_id: str
    city: str
    country: str
    facility: str
    distance_m: float
    duration_s: float
    video_frames: int
    acc_points: int
    gyr_points: int
    mag_points: int
    frames_estimated: bool = False


@dataclass
class CitySummary:
    city: str
    country: str
    routes: int
    hospitals: int
    distance_m: float
    duration_s: float
    video_frames: int
    acc_points: int
    gyr_points: int
    mag_points: int


def summarize_instance(inst: Instance, probe_duration_ms=None) -> InstanceSummary:
    """Route-level totals: distance, duration, frame and sample counts.

    probe_duration_ms, when given, is a callable mapping a video path to
    its probed duration in milliseconds (see media.MediaTool.probe_ms);
    without it the frame count falls back to round(duration * fps) and is
    flagged as estimated.
    """
    meta = inst.metadata
    duration_s = max(meta.stop_epoch_ms - meta.start_epoch_ms, 0) / 1000.0
    frames = 0
    estimated = True
    if inst.video_path is not None and probe_duration_ms is not None:
        try:
            frames = int(round(probe_duration_ms(inst.video_path) / 1000.0
                               * meta.video_fps))
            estimated = False
        except Exception:
            frames = int(round(duration_s * meta.video_fps))
    else:
        frames = int(round(duration_s * meta.video_fps))

    def count(name: str) -> int:
        series = inst.sensors3.get(name)
        return len(series) if series is not None else 0

    return InstanceSummary(
        instance_id=inst.instance_id,
        city=meta.city,
        country=meta.country,
        facility=meta.facility,
        distance_m=track_length_m(inst.gps),
        duration_s=duration_s,
        video_frames=frames,
        acc_points=count(ACCELEROMETER),
        gyr_points=count(GYROSCOPE),
        mag_points=count(MAGNETOMETER),
        frames_estimated=estimated,
    )


def city_summaries(rows: list[InstanceSummary]) -> list[CitySummary]:
    """Group instance summaries into per-city rows, sorted by city name.

    Hospitals are counted as distinct facility strings within the city.
    """
    groups: dict[tuple[str, str], list[InstanceSummary]] = {}
    for row in rows:
        groups.setdefault((row.city, row.country), []).append(row)
    out = []
    for (city, country) in sorted(groups):
        members = groups[(city, country)]
        out.append(CitySummary(
            city=city,
            country=country,
            routes=len(members),
            hospitals=len({m.facility for m in members}),
            distance_m=sum(m.distance_m for m in members),
            duration_s=sum(m.duration_s for m in members),
            video_frames=sum(m.video_frames for m in members),
            acc_points=sum(m.acc_points for m in members),
            gyr_points=sum(m.gyr_points for m in members),
            mag_points=sum(m.mag_points for m in members),
        ))
    return out


def aggregate_summaries(rows: list[CitySummary]) -> CitySummary:
    """Componentwise totals over per-city rows (the "All" row)."""
    if not rows:
        raise EmptyInput("no city rows to aggregate")
    return CitySummary(
        city="All",
        country="",
        routes=sum(r.routes for r in rows),
        hospitals=sum(r.hospitals for r in rows),
        distance_m=sum(r.distance_m for r in rows),
        duration_s=sum(r.duration_s for r in rows),
        video_frames=sum(r.video_frames for r in rows),
        acc_points=sum(r.acc_points for r in rows),
        gyr_points=sum(r.gyr_points for r in rows),
        mag_points=sum(r.mag_points for r in rows),
    )


# --- GeoJSON --------------------------------------------------------------------


def _line_feature(inst: Instance, summary: InstanceSummary | None = None) -> dict:
    if len(inst.gps) < 2:
        raise NoGpsData(f"instance {inst.instance_id!r} has "
                        f"{len(inst.gps)} GPS fixes (need >= 2 for a line)")
    summary = summary or summarize_instance(inst)
    coords = [[float(lon), float(lat)]
              for lat, lon in zip(inst.gps.lat, inst.gps.lon)]
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": coords},
        "properties": {
            "instance_id": inst.instance_id,
            "city": inst.metadata.city,
            "facility": inst.metadata.facility,
            "distance_m": summary.distance_m,
            "duration_s": summary.duration_s,
        },
    }


def to_geojson(target, out: str | Path | None = None) -> dict:
    """FeatureCollection with one LineString per instance.

    target is an Instance or an iterable of Instances; coordinates are
    ordered [lon, lat] per RFC 7946.  Raises NoGpsData for a single
    instance without a usable track.
    """
    if isinstance(target, Instance):
        features = [_line_feature(target)]
    else:
        features = []
        for inst in target:
            if len(inst.gps) >= 2:
                features.append(_line_feature(inst))
    doc = {"type": "FeatureCollection", "features": features}
    if out is not None:
        Path(out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return doc


# --- tabular export ----------------------------------------------------------------

SUMMARY_COLUMNS = ["city", "country", "routes", "hospitals", "distance_m",
                   "duration_s", "video_frames", "acc_points", "gyr_points",
                   "mag_points"]


def _row_values(row: CitySummary) -> list:
    d = asdict(row)
    return [d[c] for c in SUMMARY_COLUMNS]


def _num(v) -> str:
    if isinstance(v, float):
        return f"{v:.1f}" if v != int(v) else str(int(v))
    return str(v)


def format_summary(rows: list[CitySummary], fmt: str = "csv") -> str:
    """Render city rows plus the All row as csv, json, or md."""
    table = rows + [aggregate_summaries(rows)] if rows else []
    if fmt == "json":
        doc = {"cities": [asdict(r) for r in rows],
               "all": asdict(aggregate_summaries(rows)) if rows else None}
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        lines = [",".join(SUMMARY_COLUMNS)]
        for row in table:
            lines.append(",".join(_num(v) for v in _row_values(row)))
        return "\n".join(lines) + "\n"
    if fmt == "md":
        lines = ["| " + " | ".join(SUMMARY_COLUMNS) + " |",
                 "|" + "---|" * len(SUMMARY_COLUMNS)]
        for row in table:
            lines.append("| " + " | ".join(_num(v) for v in _row_values(row)) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format: {fmt!r}")
