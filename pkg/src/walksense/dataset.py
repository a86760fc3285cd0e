"""Dataset-level scanning and the self-contained bundle export."""

from __future__ import annotations

import hashlib
import json
import shutil
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import IoFailure, RootMissing
from .geo import summarize_instance, to_geojson
from .instance import (
    ANNOTATIONS_FILE,
    METADATA_FILE,
    VIDEO_FILE,
    Instance,
    LoadOptions,
    load_instance,
    metadata_to_json,
)
from .media import MediaTool
from .taxonomy import load_taxonomy, read_annotations
from .timeline import resample_linear, to_timeline

BUNDLE_VERSION = 1
DEFAULT_BUNDLE_RATE_HZ = 10.0


@dataclass
class DatasetEntry:
    instance_id: str
    city: str
    country: str
    path: str
    status: str  # "ok" | "error: <reason>"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class DatasetIndex:
    root: str
    entries: list[DatasetEntry] = field(default_factory=list)

    def entry(self, instance_id: str) -> DatasetEntry | None:
        for e in self.entries:
            if e.instance_id == instance_id:
                return e
        return None

    def to_dict(self) -> dict:
        return {"root": self.root, "entries": [asdict(e) for e in self.entries]}


def scan_dataset(root: str | Path) -> DatasetIndex:
    """Index every root/city/instance_id directory holding a metadata.json.

    Unreadable instances get an error status; the scan never aborts.
    Entries come back sorted by instance_id regardless of directory
    enumeration order.
    """
    root = Path(root)
    if not root.is_dir():
        raise RootMissing(f"dataset root {root} does not exist")
    entries: list[DatasetEntry] = []
    seen: set[str] = set()
    for city_dir in sorted(p for p in root.iterdir()
                           if p.is_dir() and not p.name.startswith(".")):
        for inst_dir in sorted(p for p in city_dir.iterdir()
                               if p.is_dir() and not p.name.startswith(".")):
            if not (inst_dir / METADATA_FILE).is_file():
                continue
            instance_id = inst_dir.name
            status = "ok"
            city, country = city_dir.name, ""
            try:
                inst = load_instance(inst_dir)
                city, country = inst.metadata.city, inst.metadata.country
            except Exception as exc:
                status = f"error: {exc}"
            if instance_id in seen:
                status = "error: duplicate instance_id"
            seen.add(instance_id)
            entries.append(DatasetEntry(instance_id, city, country,
                                        str(inst_dir), status))
    entries.sort(key=lambda e: e.instance_id)
    return DatasetIndex(str(root), entries)


def load_dataset(index: DatasetIndex,
                 options: LoadOptions | None = None) -> list[Instance]:
    """Load every scannable instance in the index; bad entries are skipped."""
    out = []
    for entry in index.entries:
        if entry.ok:
            out.append(load_instance(entry.path, options))
    return out


# --- bundle export -----------------------------------------------------------------


@dataclass
class BundleOptions:
    rate_hz: float = DEFAULT_BUNDLE_RATE_HZ
    include_video: bool = True
    audio_waveform: bool = False
    media: MediaTool | None = None


def _downsampled(inst: Instance, rate_hz: float) -> dict:
    normalized = to_timeline(inst)
    sensors = {}
    for name, series in sorted(normalized.sensors3.items()):
        if len(series) < 2:
            continue
        uni = resample_linear(series, rate_hz)
        sensors[name] = {
            "t0_ms": uni.t0_ms,
            "dt_ms": uni.dt_ms,
            "channels": [uni.values[:, k].tolist()
                         for k in range(uni.channels)],
        }
    return {"rate_hz": rate_hz, "sensors": sensors}


def export_bundle(inst: Instance, out_dir: str | Path,
                  options: BundleOptions | None = None) -> Path:
    """Write the self-contained view the annotation UI consumes.

    Contents: instance.json (metadata + summary + taxonomy), gps.geojson,
    sensors.downsampled.json, annotations.json, plus video.mp4 and
    waveform.csv when available/enabled.
    """
    options = options or BundleOptions()
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)

        summary = summarize_instance(inst)
        doc = {
            "bundle_version": BUNDLE_VERSION,
            "instance_id": inst.instance_id,
            "no_video": inst.video_path is None,
            "metadata": metadata_to_json(inst.metadata),
            "summary": asdict(summary),
            "taxonomy": load_taxonomy().to_dict(),
        }
        (out_dir / "instance.json").write_text(
            json.dumps(doc, indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8")

        if len(inst.gps) >= 2:
            to_geojson(inst, out_dir / "gps.geojson")
        else:
            (out_dir / "gps.geojson").write_text(
                json.dumps({"type": "FeatureCollection", "features": []}) + "\n",
                encoding="utf-8")

        (out_dir / "sensors.downsampled.json").write_text(
            json.dumps(_downsampled(inst, options.rate_hz)) + "\n",
            encoding="utf-8")

        anns = read_annotations(inst.path) if inst.path else []
        (out_dir / ANNOTATIONS_FILE).write_text(
            json.dumps([a.to_dict() for a in anns], indent=2,
                       ensure_ascii=False) + "\n",
            encoding="utf-8")

        if options.include_video and inst.video_path is not None:
            shutil.copyfile(inst.video_path, out_dir / VIDEO_FILE)

        if options.audio_waveform and inst.video_path is not None:
            from .snippets import export_audio_waveform
            export_audio_waveform(inst, rate_hz=50.0,
                                  out_path=out_dir / "waveform.csv",
                                  media=options.media)
    except OSError as exc:
        raise IoFailure(f"cannot write bundle to {out_dir}: {exc}") from exc
    return out_dir


def instance_content_hash(inst_dir: str | Path) -> str:
    """Hash of every file in an instance directory (bundle cache key)."""
    inst_dir = Path(inst_dir)
    digest = hashlib.sha256()
    for path in sorted(p for p in inst_dir.iterdir() if p.is_file()):
        digest.update(path.name.encode())
        digest.update(hashlib.sha256(path.read_bytes()).digest())
    return digest.hexdigest()
