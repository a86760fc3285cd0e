"""Exception types shared across the toolkit."""

from __future__ import annotations


class WalksenseError(Exception):
    """Base class for all toolkit errors."""


# --- instance parsing -------------------------------------------------------

class MissingMetadata(WalksenseError):
    """metadata.json is absent from an instance directory."""


class MalformedJson(WalksenseError):
    def __init__(self, reason: str):
        super().__init__(f"malformed metadata.json: {reason}")
        self.reason = reason


class MalformedCsv(WalksenseError):
    def __init__(self, file: str, line: int, reason: str):
        super().__init__(f"{file}:{line}: {reason}")
        self.file = file
        self.line = line
        self.reason = reason


class SchemaMismatch(WalksenseError):
    def __init__(self, file: str, expected: list[str], found: list[str]):
        super().__init__(f"{file}: expected header {expected}, found {found}")
        self.file = file
        self.expected = expected
        self.found = found


class IoFailure(WalksenseError):
    """Filesystem write failed while emitting an instance or bundle."""


# --- timeline ----------------------------------------------------------------

class MissingAnchor(WalksenseError):
    """Instance metadata lacks the boot anchor needed for clock alignment."""


class EmptyInterval(WalksenseError):
    """Requested time interval has t0 >= t1."""


class TooFewSamples(WalksenseError):
    """Resampling needs at least two samples."""


class WindowTooLarge(WalksenseError):
    """Sliding window exceeds the series span."""


# --- segmentation ------------------------------------------------------------

class MissingSensor(WalksenseError):
    def __init__(self, sensor: str):
        super().__init__(f"required sensor not present: {sensor}")
        self.sensor = sensor


class SpanTooShort(WalksenseError):
    """Series span is too short for the requested analysis."""


# --- snippets / media ---------------------------------------------------------

class IntervalOutOfRange(WalksenseError):
    """Snippet interval falls outside the parent instance span."""


class MediaToolMissing(WalksenseError):
    """No media tool is configured or discoverable."""


class MediaToolFailed(WalksenseError):
    def __init__(self, exit_status: int, stderr_excerpt: str):
        super().__init__(f"media tool exited {exit_status}: {stderr_excerpt}")
        self.exit_status = exit_status
        self.stderr_excerpt = stderr_excerpt


class TimeOutOfRange(WalksenseError):
    """Requested frame time is beyond the video duration."""


class NoAudioTrack(WalksenseError):
    """Video has no audio stream to extract."""


# --- geo / dataset -------------------------------------------------------------

class InvalidCoordinate(WalksenseError):
    """Latitude or longitude outside WGS84 bounds."""


class NoGpsData(WalksenseError):
    """GPS track is empty (or too short to form a line)."""


class EmptyInput(WalksenseError):
    """Aggregation over an empty collection."""


class RootMissing(WalksenseError):
    """Dataset root directory does not exist."""


class InvalidAnnotations(WalksenseError):
    """Annotation set failed validation before a stats computation."""
