"""Subprocess wrapper around an external media tool.

All video work (cutting, duration probing, frame grabs, audio
extraction) is delegated to an external executable described by command
templates with the placeholders {in}, {out}, {start_s}, {dur_s},
{time_s}.  The probe template must print the input's duration to stdout;
probe_scale_to_ms converts its unit to milliseconds (1000.0 for tools
that print seconds).

Discovery order: explicit config, WALKSENSE_MEDIA_* environment
variables, ffmpeg/ffprobe on PATH, then the bundled OpenCV-based tool
(python -m walksense.cvmedia) when cv2 is importable.  Sensor-only
pipelines never require a tool.
"""

from __future__ import annotations

import os
import shlex
import shutil
import subprocess
import sys
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MediaToolFailed, MediaToolMissing

ENV_CUT = "WALKSENSE_MEDIA_CUT"
ENV_CUT_COPY = "WALKSENSE_MEDIA_CUT_COPY"
ENV_PROBE = "WALKSENSE_MEDIA_PROBE"
ENV_PROBE_SCALE = "WALKSENSE_MEDIA_PROBE_SCALE"
ENV_FRAME = "WALKSENSE_MEDIA_FRAME"
ENV_AUDIO = "WALKSENSE_MEDIA_AUDIO"

# Re-encoded cuts are frame-accurate; copy cuts are only safe when the
# requested start sits on the container start (keyframe by definition).
COPY_CUT_TOLERANCE_S = 0.05


@dataclass
class MediaToolConfig:
    cut: str | None = None
    cut_copy: str | None = None
    probe: str | None = None
    probe_scale_to_ms: float = 1.0
    frame: str | None = None
    audio: str | None = None
    max_parallel: int = field(default_factory=lambda: os.cpu_count() or 1)


def _ffmpeg_config(ffmpeg: str, ffprobe: str) -> MediaToolConfig:
    return MediaToolConfig(
        cut=(f"{ffmpeg} -y -v error -ss {{start_s}} -i {{in}} -t {{dur_s}} "
             "-c:v libx264 -preset veryfast -pix_fmt yuv420p {out}"),
        cut_copy=(f"{ffmpeg} -y -v error -ss {{start_s}} -i {{in}} "
                  "-t {dur_s} -c copy {out}"),
        probe=(f"{ffprobe} -v error -show_entries format=duration "
               "-of default=noprint_wrappers=1:nokey=1 {in}"),
        probe_scale_to_ms=1000.0,
        frame=f"{ffmpeg} -y -v error -ss {{time_s}} -i {{in}} -frames:v 1 {{out}}",
        audio=f"{ffmpeg} -y -v error -i {{in}} -vn -ac 1 -ar 8000 {{out}}",
    )


def _cv_config() -> MediaToolConfig:
    py = shlex.quote(sys.executable)
    base = f"{py} -m walksense.cvmedia"
    return MediaToolConfig(
        cut=f"{base} cut --input {{in}} --start {{start_s}} --dur {{dur_s}} "
            "--output {out}",
        probe=f"{base} probe --input {{in}}",
        probe_scale_to_ms=1.0,
        frame=f"{base} frame --input {{in}} --time {{time_s}} --output {{out}}",
        audio=None,  # OpenCV cannot demux audio
    )


def discover_config() -> MediaToolConfig | None:
    if os.environ.get(ENV_CUT) or os.environ.get(ENV_PROBE):
        return MediaToolConfig(
            cut=os.environ.get(ENV_CUT),
            cut_copy=os.environ.get(ENV_CUT_COPY),
            probe=os.environ.get(ENV_PROBE),
            probe_scale_to_ms=float(os.environ.get(ENV_PROBE_SCALE, "1.0")),
            frame=os.environ.get(ENV_FRAME),
            audio=os.environ.get(ENV_AUDIO),
        )
    ffmpeg, ffprobe = shutil.which("ffmpeg"), shutil.which("ffprobe")
    if ffmpeg and ffprobe:
        return _ffmpeg_config(ffmpeg, ffprobe)
    try:
        import cv2  # noqa: F401
    except ImportError:
        return None
    return _cv_config()


class MediaTool:
    """Runs the configured templates with bounded parallelism."""

    def __init__(self, config: MediaToolConfig | None = None):
        self.config = config if config is not None else discover_config()
        limit = self.config.max_parallel if self.config else 1
        self._gate = threading.Semaphore(max(limit, 1))

    @property
    def available(self) -> bool:
        return (self.config is not None and self.config.cut is not None
                and self.config.probe is not None)

    @property
    def audio_capable(self) -> bool:
        return self.config is not None and self.config.audio is not None

    def _require(self, template: str | None, what: str) -> str:
        if self.config is None or template is None:
            raise MediaToolMissing(
                f"no media tool for {what}; set {ENV_CUT}/{ENV_PROBE} or "
                "install ffmpeg (or opencv-python for the bundled tool)")
        return template

    def _run(self, template: str, subst: dict[str, str]) -> str:
        argv = [tok.format_map(_Safe(subst)) for tok in shlex.split(template)]
        with self._gate:
            proc = subprocess.run(argv, capture_output=True, text=True)
        if proc.returncode != 0:
            excerpt = (proc.stderr or proc.stdout or "").strip()[-500:]
            raise MediaToolFailed(proc.returncode, excerpt)
        return proc.stdout

    def probe_ms(self, path: str | Path) -> float:
        template = self._require(self.config.probe if self.config else None,
                                 "probing")
        out = self._run(template, {"in": str(path)}).strip().splitlines()
        try:
            value = float(out[-1])
        except (IndexError, ValueError):
            raise MediaToolFailed(0, f"probe output not numeric: {out!r}")
        return value * self.config.probe_scale_to_ms

    def cut(self, src: str | Path, dst: str | Path, start_s: float,
            dur_s: float) -> None:
        cfg = self.config
        template = self._require(cfg.cut if cfg else None, "cutting")
        if cfg.cut_copy and abs(start_s) <= COPY_CUT_TOLERANCE_S:
            template = cfg.cut_copy
        self._run(template, {"in": str(src), "out": str(dst),
                             "start_s": f"{start_s:.3f}",
                             "dur_s": f"{dur_s:.3f}"})

    def extract_frame(self, src: str | Path, dst: str | Path,
                      time_s: float) -> None:
        template = self._require(self.config.frame if self.config else None,
                                 "frame extraction")
        self._run(template, {"in": str(src), "out": str(dst),
                             "time_s": f"{time_s:.4f}"})

    def extract_audio_wav(self, src: str | Path, dst: str | Path) -> None:
        template = self._require(self.config.audio if self.config else None,
                                 "audio extraction")
        self._run(template, {"in": str(src), "out": str(dst)})


class _Safe(dict):
    def __missing__(self, key):  # leave unknown {placeholders} untouched
        return "{" + key + "}"
