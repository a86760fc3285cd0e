import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make helpers importable

from walksense import synth
from walksense.dataset import scan_dataset
from walksense.instance import load_instance
from walksense.media import MediaTool


def have_cv2() -> bool:
    try:
        import cv2  # noqa: F401
        return True
    except ImportError:
        return False


@pytest.fixture(scope="session")
def dataset_root(tmp_path_factory) -> Path:
    """Default synthetic dataset: 4 cities, 12 instances, seeds 1..12."""
    root = tmp_path_factory.mktemp("synthset")
    synth.generate_synthetic(synth.default_config(seed=1), root)
    return root


@pytest.fixture(scope="session")
def ground_truth(dataset_root) -> synth.GroundTruth:
    return synth.GroundTruth.load(dataset_root / synth.GROUND_TRUTH_FILE)


@pytest.fixture(scope="session")
def instances(dataset_root):
    index = scan_dataset(dataset_root)
    return [load_instance(e.path) for e in index.entries if e.ok]


@pytest.fixture(scope="session")
def one_instance(instances):
    return instances[0]


@pytest.fixture(scope="session")
def media_tool() -> MediaTool:
    return MediaTool()


@pytest.fixture(scope="session")
def video_instance_dir(tmp_path_factory):
    """A short instance with a watermarked video (needs OpenCV)."""
    if not have_cv2():
        pytest.skip("opencv not installed")
    root = tmp_path_factory.mktemp("vidset")
    config = synth.SynthConfig(seed=5, cities=[
        synth.CitySpec("Testville", "USA", (40.0, -75.0), [
            synth.protocol_route(length_m=8.0, video=True, seed=5),
        ]),
    ])
    synth.generate_synthetic(config, root)
    return root / "testville" / "testville-000"
