"""Synthetic collector emulator: deterministic instances with ground truth.

Emulates a chest-mounted recording walk: still pauses, gait oscillation
at ~2 Hz while walking, gyroscope impulses for configured turns, and a
GPS track that follows the turn-consistent planar route mapped onto
WGS84 through a local tangent plane.  Every emitted instance passes the
"paper" validation profile, and the returned GroundTruth records what
the analyses are expected to recover.

Randomness is drawn from numpy's PCG64 seeded per instance with
(seed,) or (config.seed, instance_index), in a fixed draw order
(accelerometer, gyroscope, magnetometer, GPS, battery, one-axis), so a
fixed seed reproduces byte-identical output.
"""

from __future__ import annotations

import json
import math
import re
import unicodedata
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import MediaToolMissing
from .instance import (
    ACCELEROMETER,
    GYROSCOPE,
    MAGNETOMETER,
    BatterySeries,
    BootAnchor,
    GpsTrack,
    Instance,
    InstanceMetadata,
    SensorSeries,
    emit_instance,
)

GRAVITY = 9.81          # m/s^2
MOUNT_ANGLE_DEG = 70.0  # chest-mount camera angle, ground view
STEP_HZ = 2.0           # gait oscillation frequency
MAG_HORIZONTAL = 22.0   # uT
MAG_VERTICAL = 30.0     # uT
EARTH_RADIUS_M = 6_371_000.0
BATTERY_PERIOD_S = 5.0
LIGHT_RATE_HZ = 5.0

GROUND_TRUTH_FILE = "ground_truth.json"


@dataclass
class NoiseLevels:
    accel_still: float = 0.05   # m/s^2 sigma during pauses
    accel_walk: float = 0.10    # extra sigma while walking
    gait_amp: float = 2.0       # m/s^2 oscillation while walking
    gyro: float = 0.02          # rad/s
    gyro_wobble: float = 0.15   # rad/s gait wobble on the horizontal axes
    mag: float = 0.3            # uT
    gps_m: float = 0.0          # horizontal jitter; 0 keeps tracks exact
    gps_accuracy_m: float = 8.0


@dataclass
class RouteSpec:
    length_m: float
    walk_speed_mps: float = 1.3
    pauses: list[tuple[float, float]] = field(default_factory=list)
    turns: list[tuple[float, float]] = field(default_factory=list)
    turn_duration_s: float = 2.0
    imu_rate_hz: float = 50.0
    gps_rate_hz: float = 15.0
    fps: float = 30.0
    facility: str = "General Hospital"
    seed: int | None = None
    noise: NoiseLevels = field(default_factory=NoiseLevels)
    video: bool = False
    video_size: tuple[int, int] = (320, 180)

    @property
    def walk_time_s(self) -> float:
        return self.length_m / self.walk_speed_mps

    @property
    def duration_s(self) -> float:
        return self.walk_time_s + sum(d for _, d in self.pauses)


def protocol_route(length_m: float, turns: list[tuple[float, float]] | None = None,
                   pause_s: float = 2.0, **kwargs) -> RouteSpec:
    """Standard collection scenario: pause, walk the route, pause."""
    route = RouteSpec(length_m=length_m, turns=list(turns or []), **kwargs)
    end_offset = pause_s + route.walk_time_s
    route.pauses = [(0.0, pause_s), (end_offset, pause_s)]
    return route


@dataclass
class CitySpec:
    name: str
    country: str
    origin: tuple[float, float]  # tangent-plane origin (lat, lon)
    routes: list[RouteSpec] = field(default_factory=list)


@dataclass
class SynthConfig:
    seed: int = 0
    start_epoch_ms: int = 1_704_067_200_000
    cities: list[CitySpec] = field(default_factory=list)


@dataclass
class TurnTruth:
    t_start_ms: int
    t_end_ms: int
    angle_deg: float


@dataclass
class InstanceTruth:
    instance_id: str
    city: str
    country: str
    facility: str
    start_epoch_ms: int
    duration_s: float
    distance_m: float
    pauses_ms: list[tuple[int, int]]
    turns: list[TurnTruth]
    counts: dict[str, int]
    video_frames: int
    net_heading_deg: float

    @property
    def stop_epoch_ms(self) -> int:
        return self.start_epoch_ms + round(self.duration_s * 1000)


@dataclass
class GroundTruth:
    root: str
    instances: list[InstanceTruth]

    def by_id(self, instance_id: str) -> InstanceTruth:
        for t in self.instances:
            if t.instance_id == instance_id:
                return t
        raise KeyError(instance_id)

    def save(self, path: str | Path) -> None:
        # the file sits inside the dataset root; keep it path-free so a
        # fixed seed reproduces byte-identical trees anywhere
        doc = {"instances": [asdict(t) for t in self.instances]}
        Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n",
                              encoding="utf-8")

    @staticmethod
    def load(path: str | Path) -> "GroundTruth":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        instances = []
        for d in doc["instances"]:
            d = dict(d)
            d["pauses_ms"] = [tuple(p) for p in d["pauses_ms"]]
            d["turns"] = [TurnTruth(**t) for t in d["turns"]]
            instances.append(InstanceTruth(**d))
        return GroundTruth(str(Path(path).parent), instances)


def city_slug(name: str) -> str:
    ascii_name = unicodedata.normalize("NFKD", name).encode("ascii", "ignore")
    slug = re.sub(r"[^a-z0-9]+", "-", ascii_name.decode().lower()).strip("-")
    return slug or "city"


# --- signal synthesis ---------------------------------------------------------


def _heading_rad(t_s: np.ndarray, route: RouteSpec) -> np.ndarray:
    """Heading from accumulated turns; positive angles turn left (CCW)."""
    psi = np.zeros_like(t_s)
    for offset, angle_deg in route.turns:
        frac = np.clip((t_s - offset) / route.turn_duration_s, 0.0, 1.0)
        psi += math.radians(angle_deg) * frac
    return psi


def _turn_rate_rad_s(t_s: np.ndarray, route: RouteSpec) -> np.ndarray:
    rate = np.zeros_like(t_s)
    for offset, angle_deg in route.turns:
        active = (t_s >= offset) & (t_s < offset + route.turn_duration_s)
        rate += np.where(active,
                         math.radians(angle_deg) / route.turn_duration_s, 0.0)
    return rate


def _walking(t_s: np.ndarray, route: RouteSpec) -> np.ndarray:
    paused = np.zeros(t_s.shape, bool)
    for offset, dur in route.pauses:
        paused |= (t_s >= offset) & (t_s < offset + dur)
    return ~paused


def _plan_positions(route: RouteSpec, rate_hz: float):
    """Dense planar positions (east, north) by trapezoid integration."""
    n = math.ceil(route.duration_s * rate_hz)
    t = np.arange(n) / rate_hz
    psi = _heading_rad(t, route)
    v = route.walk_speed_mps * _walking(t, route).astype(float)
    vx, vy = v * np.cos(psi), v * np.sin(psi)
    dt = 1.0 / rate_hz
    x = np.concatenate(([0.0], np.cumsum((vx[1:] + vx[:-1]) * dt / 2)))
    y = np.concatenate(([0.0], np.cumsum((vy[1:] + vy[:-1]) * dt / 2)))
    return t, x, y


def _to_wgs84(x: np.ndarray, y: np.ndarray, origin: tuple[float, float]):
    lat0, lon0 = origin
    lat = lat0 + np.degrees(y / EARTH_RADIUS_M)
    lon = lon0 + np.degrees(x / (EARTH_RADIUS_M * math.cos(math.radians(lat0))))
    return lat, lon


def _watermark_frame(index: int, size: tuple[int, int]) -> np.ndarray:
    """Frame whose top band encodes the frame index as 16 binary cells."""
    w, h = size
    frame = np.full((h, w, 3), 128, np.uint8)
    band_h = max(h // 6, 8)
    cell_w = w / 16.0
    for bit in range(16):
        value = 255 if (index >> (15 - bit)) & 1 else 0
        x0, x1 = int(bit * cell_w), int((bit + 1) * cell_w)
        frame[:band_h, x0:x1] = value
    return frame


def read_watermark(image: np.ndarray) -> int:
    """Recover the frame index from a watermarked frame (BGR or gray)."""
    h, w = image.shape[:2]
    band_y = max(h // 12, 2)
    cell_w = w / 16.0
    index = 0
    for bit in range(16):
        x = int((bit + 0.5) * cell_w)
        pixel = image[band_y, x]
        lum = float(np.mean(pixel))
        index = (index << 1) | (1 if lum > 127 else 0)
    return index


def _write_video(path: Path, n_frames: int, fps: float,
                 size: tuple[int, int]) -> None:
    try:
        import cv2
    except ImportError:
        raise MediaToolMissing("video synthesis needs opencv-python")
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"mp4v"),
                             fps, size)
    if not writer.isOpened():
        raise MediaToolMissing(f"cannot open video writer for {path}")
    for k in range(n_frames):
        writer.write(_watermark_frame(k, size))
    writer.release()


def _build_instance(route: RouteSpec, city: CitySpec, instance_id: str,
                    start_epoch_ms: int, rng: np.random.Generator,
                    out_dir: Path) -> InstanceTruth:
    T = route.duration_s
    rate = route.imu_rate_hz
    n = math.ceil(T * rate)
    step_ns = round(1e9 / rate)
    t_s = np.arange(n) * (step_ns / 1e9)
    walking = _walking(t_s, route).astype(float)
    psi = _heading_rad(t_s, route)
    phase = 2 * math.pi * STEP_HZ * t_s
    noise = route.noise

    boot_elapsed = int(rng.integers(10**12, 4 * 10**12))
    t_raw = boot_elapsed + np.arange(n, dtype=np.int64) * step_ns

    # accelerometer: tilted gravity + gait oscillation + noise
    tilt = math.radians(90.0 - MOUNT_ANGLE_DEG)
    g_dev = GRAVITY * np.array([0.0, math.sin(tilt), math.cos(tilt)])
    gait = noise.gait_amp * np.stack([
        0.25 * np.sin(phase + 0.7),
        0.50 * np.sin(phase + 1.9),
        1.00 * np.sin(phase),
    ], axis=1) * walking[:, None]
    sigma = (noise.accel_still + noise.accel_walk * walking)[:, None]
    accel = g_dev + gait + rng.standard_normal((n, 3)) * sigma

    # gyroscope: turn rate on the vertical (z) axis, wobble on x/y
    turn_rate = _turn_rate_rad_s(t_s, route)
    gyro = np.stack([
        noise.gyro_wobble * np.sin(phase + 0.3) * walking,
        noise.gyro_wobble * np.sin(phase + 2.1) * walking,
        turn_rate,
    ], axis=1) + rng.standard_normal((n, 3)) * noise.gyro

    # magnetometer: horizontal field rotated by heading, constant vertical
    mag = np.stack([
        MAG_HORIZONTAL * np.sin(psi),
        MAG_HORIZONTAL * np.cos(psi),
        np.full(n, -MAG_VERTICAL),
    ], axis=1) + rng.standard_normal((n, 3)) * noise.mag

    accuracy = np.full(n, 3, np.int32)
    sensors3 = {
        ACCELEROMETER: SensorSeries(ACCELEROMETER, t_raw, accuracy, accel),
        GYROSCOPE: SensorSeries(GYROSCOPE, t_raw, accuracy, gyro),
        MAGNETOMETER: SensorSeries(MAGNETOMETER, t_raw, accuracy, mag),
    }
    # one uncalibrated stream exercises the bias-bearing file format
    gyro_bias = np.full((n, 3), 0.001)
    sensors_u3 = {
        "gyroscope_uncalibrated": SensorSeries(
            "gyroscope_uncalibrated", t_raw, accuracy, gyro + 0.001, gyro_bias),
    }

    # GPS from the planar route
    t_dense, x, y = _plan_positions(route, rate)
    n_gps = math.ceil(T * route.gps_rate_hz)
    gps_rel_ms = np.round(np.arange(n_gps) * 1000.0 / route.gps_rate_hz)
    gx = np.interp(gps_rel_ms / 1000.0, t_dense, x)
    gy = np.interp(gps_rel_ms / 1000.0, t_dense, y)
    if noise.gps_m > 0:
        jitter = rng.standard_normal((n_gps, 2)) * noise.gps_m
        gx, gy = gx + jitter[:, 0], gy + jitter[:, 1]
    else:
        rng.standard_normal((n_gps, 2))  # keep the draw order fixed
    lat, lon = _to_wgs84(gx, gy, city.origin)
    gps_acc = np.clip(noise.gps_accuracy_m + rng.standard_normal(n_gps), 2.0, 20.0)
    gps = GpsTrack(start_epoch_ms + gps_rel_ms.astype(np.int64), lat, lon, gps_acc)

    # battery: linear drain, sampled every few seconds
    n_batt = int(T / BATTERY_PERIOD_S) + 1
    batt_rel_s = np.arange(n_batt) * BATTERY_PERIOD_S
    battery = BatterySeries(
        start_epoch_ms + (batt_rel_s * 1000).astype(np.int64),
        np.round(95.0 - batt_rel_s * (8.0 / 3600.0), 2),
        np.zeros(n_batt, bool),
    )

    # one-axis ambient light stream (parsed, not analyzed downstream)
    n_light = math.ceil(T * LIGHT_RATE_HZ)
    light_step_ns = round(1e9 / LIGHT_RATE_HZ)
    light_t = boot_elapsed + np.arange(n_light, dtype=np.int64) * light_step_ns
    light_vals = (5000.0 + 50.0 * rng.standard_normal(n_light)).reshape(-1, 1)
    sensors1 = {"light": SensorSeries(
        "light", light_t, np.full(n_light, 3, np.int32), light_vals)}

    duration_s = T
    stop_epoch_ms = start_epoch_ms + round(duration_s * 1000)
    video_frames = round(duration_s * route.fps)
    video_path = None
    resolution = (1280, 720)
    if route.video:
        video_path = out_dir / "video.mp4"
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_video(video_path, video_frames, route.fps, route.video_size)
        resolution = route.video_size

    meta = InstanceMetadata(
        instance_id=instance_id,
        device_model="EmulatedPhone S1",
        os_version="14",
        app_version="1.0.0",
        camera_resolution=resolution,
        video_fps=route.fps,
        sensor_rate_hz=route.imu_rate_hz,
        gps_rate_hz=route.gps_rate_hz,
        start_epoch_ms=start_epoch_ms,
        stop_epoch_ms=stop_epoch_ms,
        boot_anchor=BootAnchor(boot_elapsed, start_epoch_ms),
        mount_angle_deg=MOUNT_ANGLE_DEG,
        orientation="landscape",
        facility=route.facility,
        city=city.name,
        country=city.country,
    )
    inst = Instance(metadata=meta, sensors3=sensors3, sensors1=sensors1,
                    sensors_u3=sensors_u3, gps=gps, battery=battery,
                    video_path=video_path, path=out_dir)
    emit_instance(inst, out_dir)

    return InstanceTruth(
        instance_id=instance_id,
        city=city.name,
        country=city.country,
        facility=route.facility,
        start_epoch_ms=start_epoch_ms,
        duration_s=duration_s,
        distance_m=route.length_m,
        pauses_ms=[(start_epoch_ms + round(o * 1000),
                    start_epoch_ms + round((o + d) * 1000))
                   for o, d in route.pauses],
        turns=[TurnTruth(start_epoch_ms + round(o * 1000),
                         start_epoch_ms + round((o + route.turn_duration_s) * 1000),
                         a)
               for o, a in route.turns],
        counts={
            ACCELEROMETER: n, GYROSCOPE: n, MAGNETOMETER: n,
            "gyroscope_uncalibrated": n, "light": n_light,
            "gps": n_gps, "battery": n_batt,
        },
        video_frames=video_frames,
        net_heading_deg=sum(a for _, a in route.turns),
    )


def generate_synthetic(config: SynthConfig, out_root: str | Path) -> GroundTruth:
    """Emit a whole dataset under out_root/city/instance_id and return truth."""
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    truths = []
    index = 0
    for city in config.cities:
        slug = city_slug(city.name)
        for route in city.routes:
            instance_id = f"{slug}-{index:03d}"
            entropy = (route.seed,) if route.seed is not None \
                else (config.seed, index)
            rng = np.random.default_rng(np.random.SeedSequence(entropy))
            start = config.start_epoch_ms + index * 3_600_000
            out_dir = out_root / slug / instance_id
            truths.append(_build_instance(route, city, instance_id, start,
                                          rng, out_dir))
            index += 1
    truth = GroundTruth(str(out_root), truths)
    truth.save(out_root / GROUND_TRUTH_FILE)
    return truth


def default_config(seed: int = 1) -> SynthConfig:
    """Four cities, three protocol routes each, declared-rate defaults."""
    cities = [
        CitySpec("Alphaville", "USA", (41.30, -81.90)),
        CitySpec("Brookfield", "USA", (40.10, -75.20)),
        CitySpec("Caravelas", "Brazil", (-22.90, -47.10)),
        CitySpec("Duna Verde", "Brazil", (-23.80, -46.40)),
    ]
    lengths = [60.0, 78.0, 97.5]
    facilities = ["General Hospital", "Central Clinic"]
    instance_seed = seed
    for c, city in enumerate(cities):
        for r, length in enumerate(lengths):
            turns = [(12.0, 90.0)] if r == 0 else \
                    [(12.0, 90.0), (30.0, -90.0)] if r == 1 else \
                    [(12.0, 90.0), (30.0, -90.0), (48.0, 90.0)]
            route = protocol_route(length_m=length, turns=turns,
                                   facility=facilities[(c + r) % 2],
                                   seed=instance_seed)
            city.routes.append(route)
            instance_seed += 1
    return SynthConfig(seed=seed, cities=cities)


# --- config files ----------------------------------------------------------------


def config_from_dict(doc: dict) -> SynthConfig:
    cities = []
    for c in doc.get("cities", []):
        routes = []
        for r in c.get("routes", []):
            noise = NoiseLevels(**r.get("noise", {}))
            routes.append(RouteSpec(
                length_m=float(r["length_m"]),
                walk_speed_mps=float(r.get("walk_speed_mps", 1.3)),
                pauses=[tuple(p) for p in r.get("pauses", [])],
                turns=[tuple(t) for t in r.get("turns", [])],
                turn_duration_s=float(r.get("turn_duration_s", 2.0)),
                imu_rate_hz=float(r.get("imu_rate_hz", 50.0)),
                gps_rate_hz=float(r.get("gps_rate_hz", 15.0)),
                fps=float(r.get("fps", 30.0)),
                facility=str(r.get("facility", "General Hospital")),
                seed=r.get("seed"),
                noise=noise,
                video=bool(r.get("video", False)),
                video_size=tuple(r.get("video_size", (320, 180))),
            ))
        cities.append(CitySpec(name=str(c["name"]),
                               country=str(c.get("country", "")),
                               origin=tuple(c.get("origin", (0.0, 0.0))),
                               routes=routes))
    return SynthConfig(seed=int(doc.get("seed", 0)),
                       start_epoch_ms=int(doc.get("start_epoch_ms",
                                                  1_704_067_200_000)),
                       cities=cities)


def config_from_file(path: str | Path) -> SynthConfig:
    path = Path(path)
    if path.suffix.lower() == ".toml":
        try:
            import tomllib as toml
        except ImportError:
            import tomli as toml
        with open(path, "rb") as fh:
            return config_from_dict(toml.load(fh))
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))
