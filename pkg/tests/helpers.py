"""Independent oracles and utilities shared by the test suite.

Everything here deliberately avoids the package's own slice/parse code
paths: raw CSV text is filtered with plain string handling and the clock
arithmetic is re-derived from metadata.json directly.
"""

from __future__ import annotations

import csv
import json
import math
import threading
import urllib.error
import urllib.request
from pathlib import Path


# --- brute-force row filtering over raw CSV text ------------------------------


def read_raw_rows(instance_dir: Path, filename: str) -> list[list[str]]:
    path = Path(instance_dir) / filename
    if not path.is_file():
        return []
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[1:]  # drop header


def read_meta(instance_dir: Path) -> dict:
    return json.loads((Path(instance_dir) / "metadata.json").read_text())


def nanos_to_ms(raw_nanos: int, meta: dict) -> float:
    anchor = meta["boot_anchor"]
    return anchor["epoch_ms"] + (raw_nanos - anchor["elapsed_nanos"]) / 1e6


def filter_sensor_rows(instance_dir: Path, filename: str, sensor: str,
                       t0_ms: float, t1_ms: float) -> list[tuple]:
    """Rows of one sensor whose wall-clock time falls in [t0, t1)."""
    meta = read_meta(instance_dir)
    out = []
    for row in read_raw_rows(instance_dir, filename):
        if row[1] != sensor:
            continue
        t = nanos_to_ms(int(row[0]), meta)
        if t0_ms <= t < t1_ms:
            out.append(tuple(row))
    return out


def filter_ms_rows(instance_dir: Path, filename: str,
                   t0_ms: float, t1_ms: float) -> list[tuple]:
    """Rows of a wall-clock-stamped CSV (gps, consumption) in [t0, t1)."""
    out = []
    for row in read_raw_rows(instance_dir, filename):
        if t0_ms <= int(row[0]) < t1_ms:
            out.append(tuple(row))
    return out


# --- second-formula distance oracle ---------------------------------------------


def law_of_cosines_m(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Spherical law of cosines, same Earth radius, independent formula."""
    lat1, lon1 = map(math.radians, a)
    lat2, lon2 = map(math.radians, b)
    c = (math.sin(lat1) * math.sin(lat2)
         + math.cos(lat1) * math.cos(lat2) * math.cos(lon2 - lon1))
    return 6_371_000.0 * math.acos(max(-1.0, min(1.0, c)))


# --- RFC 7946 structural checker -------------------------------------------------

_GEOMETRY_TYPES = {"Point", "MultiPoint", "LineString", "MultiLineString",
                   "Polygon", "MultiPolygon", "GeometryCollection"}


def check_position(pos) -> list[str]:
    problems = []
    if not isinstance(pos, list) or len(pos) < 2:
        return [f"position must be [lon, lat, ...]: {pos!r}"]
    lon, lat = pos[0], pos[1]
    if not isinstance(lon, (int, float)) or not isinstance(lat, (int, float)):
        problems.append(f"non-numeric position {pos!r}")
        return problems
    # [lon, lat] order: latitude must be a valid latitude, and a swapped
    # pair would put |lon| <= 90 with |lat| > 90
    if not (-90 <= lat <= 90):
        problems.append(f"latitude out of range (coordinate order?): {pos!r}")
    if not (-180 <= lon <= 180):
        problems.append(f"longitude out of range: {pos!r}")
    return problems


def check_geometry(geom) -> list[str]:
    problems = []
    if not isinstance(geom, dict):
        return ["geometry is not an object"]
    gtype = geom.get("type")
    if gtype not in _GEOMETRY_TYPES:
        return [f"bad geometry type {gtype!r}"]
    coords = geom.get("coordinates")
    if gtype == "LineString":
        if not isinstance(coords, list) or len(coords) < 2:
            problems.append("LineString needs >= 2 positions")
        else:
            for pos in coords:
                problems += check_position(pos)
    elif gtype == "Point":
        problems += check_position(coords)
    return problems


def check_geojson(doc) -> list[str]:
    """Structural findings for a FeatureCollection; empty means valid."""
    problems = []
    if doc.get("type") != "FeatureCollection":
        problems.append(f"top-level type {doc.get('type')!r}")
        return problems
    features = doc.get("features")
    if not isinstance(features, list):
        return ["features is not an array"]
    for i, feat in enumerate(features):
        if feat.get("type") != "Feature":
            problems.append(f"features[{i}].type is {feat.get('type')!r}")
        if "properties" not in feat or not isinstance(feat["properties"], dict):
            problems.append(f"features[{i}] lacks a properties object")
        problems += check_geometry(feat.get("geometry"))
    return problems


# --- HTTP helpers ------------------------------------------------------------------


class ServerFixture:
    """A live serve-mode server on an ephemeral port."""

    def __init__(self, server):
        self.server = server
        self.port = server.server_address[1]
        self.thread = threading.Thread(target=server.serve_forever, daemon=True)
        self.thread.start()

    def url(self, path: str) -> str:
        return f"http://127.0.0.1:{self.port}{path}"

    def get(self, path: str):
        try:
            with urllib.request.urlopen(self.url(path)) as resp:
                return resp.status, resp.read(), dict(resp.headers)
        except urllib.error.HTTPError as err:
            return err.code, err.read(), dict(err.headers)

    def get_json(self, path: str):
        status, body, _ = self.get(path)
        return status, json.loads(body)

    def put_json(self, path: str, doc):
        data = json.dumps(doc).encode("utf-8")
        req = urllib.request.Request(self.url(path), data=data, method="PUT",
                                     headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req) as resp:
                return resp.status, json.loads(resp.read())
        except urllib.error.HTTPError as err:
            return err.code, json.loads(err.read())

    def close(self):
        self.server.shutdown()
        self.server.server_close()
