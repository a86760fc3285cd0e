"""walksense: toolkit for multimodal walk recordings.

Parses and validates collector output (IMU/GPS/video instances), puts
all streams on one wall-clock timeline, detects pauses and turns,
extracts synchronized snippets, computes route and dataset summaries,
manages the sidewalk annotation vocabulary, and ships a deterministic
synthetic-recording emulator as its test oracle.
"""

__version__ = "0.1.0"

from .instance import (  # noqa: F401
    Instance,
    InstanceMetadata,
    LoadOptions,
    ValidationReport,
    emit_instance,
    load_instance,
    validate_instance,
)
from .timeline import resample_linear, slice_series, to_timeline  # noqa: F401
from .segmentation import (  # noqa: F401
    SegmentationParams,
    detect_pauses,
    detect_turns,
    split_by_pauses,
)
from .geo import (  # noqa: F401
    aggregate_summaries,
    haversine_m,
    summarize_instance,
    to_geojson,
    track_length_m,
)
from .taxonomy import (  # noqa: F401
    Annotation,
    annotation_stats,
    load_taxonomy,
    validate_annotations,
)
from .snippets import extract_snippet  # noqa: F401
from .synth import SynthConfig, generate_synthetic  # noqa: F401
from .dataset import export_bundle, scan_dataset  # noqa: F401
