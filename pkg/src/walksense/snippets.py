"""Cut a time interval out of an instance with all streams trimmed.

Sensor, GPS and battery rows are sliced half-open on the wall-clock
timeline; the result is written as a regular instance directory so
snippets can feed any downstream tool, including this one.  Video is cut
by the configured media tool and verified by probing the output
duration; sensor-only extraction never needs a tool.
"""

from __future__ import annotations

import csv
import math
import wave
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    IntervalOutOfRange,
    MediaToolMissing,
    NoAudioTrack,
    TimeOutOfRange,
)
from .instance import Instance, emit_instance
from .media import MediaTool
from .timeline import slice_series, to_timeline


@dataclass
class SnippetOptions:
    cut_video: bool = True
    media: MediaTool | None = None


@dataclass
class Snippet:
    parent_id: str
    t_start_ms: int
    t_end_ms: int
    instance: Instance
    out_dir: Path
    video_path: Path | None
    manifest: dict = field(default_factory=dict)


def _span_of(inst: Instance) -> tuple[int, int]:
    return inst.metadata.start_epoch_ms, inst.metadata.stop_epoch_ms


def extract_snippet(inst: Instance, t_start_ms: int, t_end_ms: int,
                    out_dir: str | Path,
                    options: SnippetOptions | None = None) -> Snippet:
    """Write the [t_start_ms, t_end_ms) cut of inst as a new instance.

    The manifest records expected versus actual extents per stream, and
    the probed video duration when a cut was made.
    """
    options = options or SnippetOptions()
    start, stop = _span_of(inst)
    if not (start <= t_start_ms < t_end_ms <= stop):
        raise IntervalOutOfRange(
            f"[{t_start_ms}, {t_end_ms}) outside instance span [{start}, {stop})")
    out_dir = Path(out_dir)
    normalized = to_timeline(inst)

    def cut_group(group):
        return {name: slice_series(s, t_start_ms, t_end_ms)
                for name, s in group.items()}

    sensors3 = cut_group(normalized.sensors3)
    sensors1 = cut_group(normalized.sensors1)
    sensors_u3 = cut_group(normalized.sensors_u3)
    gps = slice_series(inst.gps, t_start_ms, t_end_ms)
    battery = slice_series(inst.battery, t_start_ms, t_end_ms)

    meta = replace(inst.metadata,
                   instance_id=out_dir.name,
                   start_epoch_ms=int(t_start_ms),
                   stop_epoch_ms=int(t_end_ms))
    cut = Instance(metadata=meta, sensors3=sensors3, sensors1=sensors1,
                   sensors_u3=sensors_u3, gps=gps, battery=battery,
                   video_path=None, path=out_dir)

    manifest = {
        "parent_id": inst.instance_id,
        "t_start_ms": int(t_start_ms),
        "t_end_ms": int(t_end_ms),
        "streams": {},
        "video": None,
    }
    for name, series in {**sensors3, **sensors1, **sensors_u3,
                         "gps": gps, "battery": battery}.items():
        manifest["streams"][name] = len(series)

    video_path = None
    if inst.video_path is not None and options.cut_video:
        media = options.media or MediaTool()
        if not media.available:
            raise MediaToolMissing("video cut requested but no media tool "
                                   "is configured")
        video_start = inst.metadata.start_epoch_ms
        start_s = (t_start_ms - video_start) / 1000.0
        dur_s = (t_end_ms - t_start_ms) / 1000.0
        out_dir.mkdir(parents=True, exist_ok=True)
        video_path = out_dir / "video.mp4"
        media.cut(inst.video_path, video_path, start_s, dur_s)
        probed_ms = media.probe_ms(video_path)
        frame_ms = 1000.0 / inst.metadata.video_fps \
            if inst.metadata.video_fps > 0 else 0.0
        manifest["video"] = {
            "requested_ms": t_end_ms - t_start_ms,
            "probed_ms": probed_ms,
            "frame_period_ms": frame_ms,
            "within_tolerance": abs(probed_ms - (t_end_ms - t_start_ms))
                                 <= frame_ms + 1e-6,
        }
        cut = replace(cut, video_path=video_path)

    emit_instance(cut, out_dir)
    return Snippet(parent_id=inst.instance_id, t_start_ms=int(t_start_ms),
                   t_end_ms=int(t_end_ms), instance=cut, out_dir=out_dir,
                   video_path=video_path, manifest=manifest)


def export_frames_at_times(inst: Instance, times_ms: list[int],
                           out_dir: str | Path,
                           media: MediaTool | None = None) -> list[Path]:
    """One image per requested time, mapped to the nearest video frame."""
    if inst.video_path is None:
        raise MediaToolMissing("instance has no video")
    media = media or MediaTool()
    if not media.available:
        raise MediaToolMissing("frame export needs a media tool")
    duration_ms = media.probe_ms(inst.video_path)
    fps = inst.metadata.video_fps
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for t_ms in times_ms:
        if t_ms < 0 or t_ms > duration_ms:
            raise TimeOutOfRange(f"{t_ms} ms outside video ({duration_ms:.0f} ms)")
        # snap to the nearest frame instant so tools grab a stable frame
        time_s = round(t_ms * fps / 1000.0) / fps if fps > 0 else t_ms / 1000.0
        path = out_dir / f"frame_{int(t_ms)}.png"
        media.extract_frame(inst.video_path, path, time_s)
        paths.append(path)
    return paths


def amplitude_envelope(samples: np.ndarray, sample_rate_hz: float,
                       rate_hz: float) -> tuple[np.ndarray, np.ndarray]:
    """Peak amplitude per bin of 1/rate_hz seconds, normalized to [-1, 1].

    samples are mono PCM in [-1, 1]; returns (t_ms, amplitude) arrays.
    """
    per_bin = max(int(round(sample_rate_hz / rate_hz)), 1)
    n_bins = math.ceil(len(samples) / per_bin)
    padded = np.zeros(n_bins * per_bin)
    padded[:len(samples)] = samples
    env = np.abs(padded.reshape(n_bins, per_bin)).max(axis=1)
    t_ms = np.arange(n_bins) * (1000.0 * per_bin / sample_rate_hz)
    return t_ms, env


def export_audio_waveform(inst: Instance, rate_hz: float,
                          out_path: str | Path,
                          media: MediaTool | None = None) -> Path:
    """Extract the audio track and write its envelope as (t_ms, amplitude) CSV."""
    if inst.video_path is None:
        raise NoAudioTrack("instance has no video")
    media = media or MediaTool()
    if not media.audio_capable:
        raise MediaToolMissing("audio extraction needs an audio-capable "
                               "media tool (e.g. ffmpeg)")
    out_path = Path(out_path)
    wav_path = out_path.with_suffix(".extract.wav")
    try:
        media.extract_audio_wav(inst.video_path, wav_path)
        if not wav_path.is_file() or wav_path.stat().st_size == 0:
            raise NoAudioTrack(f"no audio stream in {inst.video_path}")
        with wave.open(str(wav_path), "rb") as wav:
            n = wav.getnframes()
            if n == 0:
                raise NoAudioTrack(f"empty audio stream in {inst.video_path}")
            width = wav.getsampwidth()
            sample_rate = wav.getframerate()
            channels = wav.getnchannels()
            raw = wav.readframes(n)
        dtype = {1: np.uint8, 2: np.int16, 4: np.int32}.get(width)
        if dtype is None:
            raise NoAudioTrack(f"unsupported sample width {width}")
        data = np.frombuffer(raw, dtype=dtype).astype(np.float64)
        if width == 1:
            data = (data - 128.0) / 128.0
        else:
            data = data / float(2 ** (8 * width - 1))
        if channels > 1:
            data = data.reshape(-1, channels).mean(axis=1)
        t_ms, env = amplitude_envelope(data, sample_rate, rate_hz)
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t_ms", "amplitude"])
            for t, a in zip(t_ms, env):
                writer.writerow([f"{t:.3f}", f"{a:.6f}"])
    finally:
        if wav_path.exists():
            wav_path.unlink()
    return out_path
