"""Figure rendering for instances and datasets.

All functions save PNG files (Agg backend, no display needed) and are
driven by the CLI `report` subcommand, which writes them next to the
delimited outputs.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .instance import ACCELEROMETER, GYROSCOPE, Instance
from .segmentation import (
    SegmentationParams,
    accel_magnitude,
    detect_pauses,
    detect_turns,
)
from .timeline import resample_linear, to_timeline

PAUSE_COLOR = "gold"
TURN_COLOR = "gold"
DPI = 130


def _rel_s(t_ms, origin_ms):
    return (np.asarray(t_ms, float) - origin_ms) / 1000.0


def plot_accel_pauses(inst: Instance, out_path: str | Path,
                      params: SegmentationParams | None = None) -> Path:
    """Acceleration magnitude trace with detected pauses shaded."""
    params = params or SegmentationParams()
    normalized = to_timeline(inst)
    acc = normalized.sensors3[ACCELEROMETER]
    uni = resample_linear(acc, inst.metadata.sensor_rate_hz or 50.0)
    mag = accel_magnitude(uni)
    pauses = detect_pauses(inst, params)
    origin = inst.metadata.start_epoch_ms

    fig, ax = plt.subplots(figsize=(10, 3))
    ax.plot(_rel_s(mag.times_ms, origin), mag.values[:, 0],
            lw=0.6, color="tab:blue")
    for p in pauses:
        ax.axvspan((p.t_start_ms - origin) / 1000.0,
                   (p.t_end_ms - origin) / 1000.0,
                   color=PAUSE_COLOR, alpha=0.45)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("|a| (m/s$^2$)")
    ax.set_title(f"{inst.instance_id}: acceleration magnitude, "
                 f"{len(pauses)} pause(s)")
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)
    return Path(out_path)


def plot_gyro_turns(inst: Instance, out_path: str | Path,
                    params: SegmentationParams | None = None) -> Path:
    """Gyroscope axes with detected turns shaded."""
    params = params or SegmentationParams()
    normalized = to_timeline(inst)
    gyr = normalized.sensors3[GYROSCOPE]
    uni = resample_linear(gyr, inst.metadata.sensor_rate_hz or 50.0)
    turns = detect_turns(inst, params)
    origin = inst.metadata.start_epoch_ms

    fig, ax = plt.subplots(figsize=(10, 3))
    t = _rel_s(uni.times_ms, origin)
    for k, label in enumerate("xyz"):
        ax.plot(t, uni.values[:, k], lw=0.6, label=label)
    for ev in turns:
        ax.axvspan((ev.t_start_ms - origin) / 1000.0,
                   (ev.t_end_ms - origin) / 1000.0,
                   color=TURN_COLOR, alpha=0.45)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("rate (rad/s)")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(f"{inst.instance_id}: gyroscope, {len(turns)} turn(s)")
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)
    return Path(out_path)


def plot_track_map(instances: list[Instance], out_path: str | Path,
                   title: str = "GPS tracks") -> Path:
    """Lon/lat polylines for one or more instances on shared axes."""
    fig, ax = plt.subplots(figsize=(6, 6))
    for inst in instances:
        if len(inst.gps) < 2:
            continue
        ax.plot(inst.gps.lon, inst.gps.lat, lw=1.2, label=inst.instance_id)
        ax.plot(inst.gps.lon[0], inst.gps.lat[0], "g^", ms=6)
        ax.plot(inst.gps.lon[-1], inst.gps.lat[-1], "rv", ms=6)
    ax.set_xlabel("longitude")
    ax.set_ylabel("latitude")
    ax.set_title(title)
    ax.ticklabel_format(useOffset=False)
    if len(instances) <= 12:
        ax.legend(fontsize=7)
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)
    return Path(out_path)


def write_segments_csv(inst: Instance, out_path: str | Path,
                       params: SegmentationParams | None = None) -> Path:
    """Delimited pause/turn events for an instance."""
    params = params or SegmentationParams()
    pauses = detect_pauses(inst, params)
    turns = detect_turns(inst, params)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["kind", "t_start_ms", "t_end_ms", "value"])
        for p in pauses:
            writer.writerow(["pause", f"{p.t_start_ms:.0f}",
                             f"{p.t_end_ms:.0f}", f"{p.mean_std:.4f}"])
        for t in turns:
            writer.writerow(["turn", f"{t.t_start_ms:.0f}",
                             f"{t.t_end_ms:.0f}", f"{t.angle_deg:.1f}"])
    return Path(out_path)


def instance_report(inst: Instance, out_dir: str | Path,
                    params: SegmentationParams | None = None) -> list[Path]:
    """Figures plus segments.csv for one instance."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    made = [
        write_segments_csv(inst, out_dir / "segments.csv", params),
        plot_accel_pauses(inst, out_dir / "accel_pauses.png", params),
        plot_gyro_turns(inst, out_dir / "gyro_turns.png", params),
    ]
    if len(inst.gps) >= 2:
        made.append(plot_track_map([inst], out_dir / "track_map.png",
                                   title=inst.instance_id))
    return made


def dataset_report(instances: list[Instance], summary_csv: str,
                   out_dir: str | Path) -> list[Path]:
    """summary.csv plus an all-tracks map for a dataset."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary_path = out_dir / "summary.csv"
    summary_path.write_text(summary_csv, encoding="utf-8")
    made = [summary_path]
    if instances:
        made.append(plot_track_map(instances, out_dir / "dataset_map.png"))
    return made
