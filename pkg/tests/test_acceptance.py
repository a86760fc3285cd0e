"""Acceptance gate: one test per release criterion, tolerances pinned.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line
per criterion.
"""

import json
import shutil
import threading
import time
from pathlib import Path

import numpy as np
import pytest

from helpers import (
    ServerFixture,
    check_geojson,
    filter_ms_rows,
    filter_sensor_rows,
    read_raw_rows,
)
from walksense import synth
from walksense.dataset import scan_dataset
from walksense.geo import (
    CitySummary,
    aggregate_summaries,
    summarize_instance,
    to_geojson,
)
from walksense.instance import (
    emit_instance,
    load_instance,
    validate_instance,
)
from walksense.segmentation import detect_pauses, detect_turns
from walksense.server import ServeConfig, create_server
from walksense.snippets import SnippetOptions, extract_snippet
from walksense.taxonomy import load_taxonomy

TAXONOMY_SHA256 = "d2814a69ea9133d6916ea9be9d33fa46975af037b8bda378174df7573c500d8e"


def report(name: str) -> None:
    print(f"ACCEPTANCE PASS: {name}")


def test_criterion_01_city_aggregation_fixture():
    """Four-city fixture sums to the published All row, exactly, < 1 s."""
    t0 = time.time()
    rows = [
        CitySummary("Chicago", "USA", 25, 3, 5865, 4616, 175847,
                    609890, 58247, 333626),
        CitySummary("Jundiaí", "Brazil", 7, 2, 1482, 1890, 44476,
                    139294, 8243, 68096),
        CitySummary("Santos", "Brazil", 11, 2, 2247, 3532, 67431,
                    215573, 12499, 105680),
        CitySummary("São Paulo", "Brazil", 4, 2, 1271, 1840, 38129,
                    92638, 63624, 38073),
    ]
    total = aggregate_summaries(rows)
    assert (total.routes, total.hospitals) == (47, 9)
    assert (total.distance_m, total.duration_s) == (10_865, 11_878)
    assert total.video_frames == 325_883
    assert (total.acc_points, total.gyr_points, total.mag_points) == \
        (1_057_395, 142_613, 545_475)
    assert time.time() - t0 < 1.0
    report("table aggregation fixture (exact)")


def test_criterion_02_taxonomy_integrity():
    """6 categories, 68 leaves, per-category counts, pinned checksum, < 1 s."""
    t0 = time.time()
    tax = load_taxonomy()
    assert len(tax.categories) == 6
    assert tax.leaf_count == 68
    assert [len(c.elements) for c in tax.categories] == [4, 33, 6, 3, 8, 14]
    assert tax.checksum() == TAXONOMY_SHA256
    assert time.time() - t0 < 1.0
    report("taxonomy integrity (6 categories / 68 leaves, checksum pinned)")


def test_criterion_03_oracle_end_to_end(tmp_path):
    """4 cities, 12 instances, seeds 1-12: counts exact, distance 0.5%,
    paper profile clean, < 30 s sensor-only."""
    t0 = time.time()
    root = tmp_path / "oracle"
    truth = synth.generate_synthetic(synth.default_config(seed=1), root)
    assert len(truth.instances) == 12
    assert len({t.city for t in truth.instances}) == 4

    index = scan_dataset(root)
    assert len(index.entries) == 12
    for entry in index.entries:
        inst = load_instance(entry.path)
        gt = truth.by_id(inst.instance_id)
        assert inst.metadata.sensor_rate_hz == 50.0
        assert inst.metadata.gps_rate_hz == 15.0
        assert inst.metadata.video_fps == 30.0

        summary = summarize_instance(inst)
        assert summary.acc_points == gt.counts["accelerometer"]
        assert summary.gyr_points == gt.counts["gyroscope"]
        assert summary.mag_points == gt.counts["magnetometer"]
        assert summary.video_frames == gt.video_frames
        assert summary.duration_s == pytest.approx(gt.duration_s, abs=1e-3)
        assert abs(summary.distance_m - gt.distance_m) <= 0.005 * gt.distance_m

        assert validate_instance(inst, "paper").empty

    elapsed = time.time() - t0
    assert elapsed < 30.0
    report(f"oracle end-to-end (12 instances, {elapsed:.1f} s)")


def test_criterion_04_segmentation_accuracy(tmp_path):
    """20 protocol scenarios: pause precision = recall = 1.0 within
    500 ms; every turn recovered, correct sign, angle within 15 deg;
    < 10 s total."""
    t0 = time.time()
    lengths = [52.0, 65.0, 78.0, 91.0]
    turn_sets = [[], [(10.0, 90.0)], [(10.0, -90.0)],
                 [(10.0, 90.0), (25.0, -90.0)], [(8.0, 120.0)]]
    cities = []
    for i in range(20):
        route = synth.protocol_route(length_m=lengths[i % 4],
                                     turns=turn_sets[i % 5], seed=100 + i)
        cities.append(synth.CitySpec(f"Seg{i:02d}", "USA",
                                     (40.0 + i * 0.01, -75.0), [route]))
    truth = synth.generate_synthetic(synth.SynthConfig(seed=1, cities=cities),
                                     tmp_path / "seg")

    for entry in scan_dataset(tmp_path / "seg").entries:
        inst = load_instance(entry.path)
        gt = truth.by_id(entry.instance_id)

        pauses = detect_pauses(inst)
        assert len(pauses) == len(gt.pauses_ms)  # precision = recall = 1.0
        for det, (gs, ge) in zip(pauses, gt.pauses_ms):
            assert abs(det.t_start_ms - gs) <= 500
            assert abs(det.t_end_ms - ge) <= 500

        turns = detect_turns(inst)
        assert len(turns) == len(gt.turns)
        for det, want in zip(turns, gt.turns):
            assert det.angle_deg * want.angle_deg > 0  # same sign
            assert abs(det.angle_deg - want.angle_deg) <= 15.0

    elapsed = time.time() - t0
    assert elapsed < 10.0
    report(f"segmentation accuracy (20 scenarios, {elapsed:.1f} s)")


def test_criterion_05_snippet_oracle_equivalence(instances, tmp_path):
    """100 random intervals: snippet rows equal an independent raw-CSV
    filter exactly; adjacent snippets concatenate to the parent; < 20 s."""
    t0 = time.time()
    rng = np.random.default_rng(2024)
    options = SnippetOptions(cut_video=False)

    checked = 0
    for i in range(100):
        inst = instances[i % len(instances)]
        start, stop = (inst.metadata.start_epoch_ms,
                       inst.metadata.stop_epoch_ms)
        a = int(rng.integers(start, stop - 2000))
        b = int(rng.integers(a + 1000, stop + 1))
        out = tmp_path / f"cut{i:03d}"
        extract_snippet(inst, a, b, out, options)

        got_acc = {tuple(r) for r in read_raw_rows(out, "sensors.three.csv")
                   if r[1] == "accelerometer"}
        want_acc = set(filter_sensor_rows(inst.path, "sensors.three.csv",
                                          "accelerometer", a, b))
        assert got_acc == want_acc, (inst.instance_id, a, b)
        got_gps = {tuple(r) for r in read_raw_rows(out, "gps.csv")}
        want_gps = set(filter_ms_rows(inst.path, "gps.csv", a, b))
        assert got_gps == want_gps, (inst.instance_id, a, b)
        checked += 1
    assert checked == 100

    inst = instances[0]
    start = inst.metadata.start_epoch_ms
    a, b, c = start + 4000, start + 19500, start + 36000
    extract_snippet(inst, a, b, tmp_path / "pleft", options)
    extract_snippet(inst, b, c, tmp_path / "pright", options)
    extract_snippet(inst, a, c, tmp_path / "pwhole", options)
    for name in ("sensors.three.csv", "sensors.one.csv",
                 "sensors.three.uncalibrated.csv", "gps.csv",
                 "consumption.csv"):
        left = read_raw_rows(tmp_path / "pleft", name)
        right = read_raw_rows(tmp_path / "pright", name)
        whole = read_raw_rows(tmp_path / "pwhole", name)
        assert left + right == whole, name

    elapsed = time.time() - t0
    assert elapsed < 20.0
    report(f"snippet oracle equivalence (100 intervals, {elapsed:.1f} s)")


def test_criterion_06_roundtrip_and_determinism(one_instance, tmp_path):
    """Emit/load is field-exact (floats 1e-9); fixed seed is
    byte-identical across two runs."""
    out = tmp_path / one_instance.instance_id
    emit_instance(one_instance, out)
    again = load_instance(out)
    assert again.metadata == one_instance.metadata
    for group in ("sensors3", "sensors1", "sensors_u3"):
        for name, series in getattr(one_instance, group).items():
            other = getattr(again, group)[name]
            assert np.array_equal(series.t_raw_nanos, other.t_raw_nanos)
            assert np.allclose(series.values, other.values, atol=1e-9, rtol=0)
            if series.bias is not None:
                assert np.allclose(series.bias, other.bias, atol=1e-9, rtol=0)
    assert np.array_equal(one_instance.gps.t_epoch_ms, again.gps.t_epoch_ms)
    assert np.allclose(one_instance.gps.lat, again.gps.lat, atol=1e-9, rtol=0)
    assert np.allclose(one_instance.gps.lon, again.gps.lon, atol=1e-9, rtol=0)

    config = synth.SynthConfig(seed=7, cities=[
        synth.CitySpec("Duoville", "USA", (40.0, -75.0),
                       [synth.protocol_route(length_m=26.0)])])
    synth.generate_synthetic(config, tmp_path / "runA")
    synth.generate_synthetic(config, tmp_path / "runB")
    files_a = sorted(p for p in (tmp_path / "runA").rglob("*") if p.is_file())
    files_b = sorted(p for p in (tmp_path / "runB").rglob("*") if p.is_file())
    assert [p.relative_to(tmp_path / "runA") for p in files_a] == \
        [p.relative_to(tmp_path / "runB") for p in files_b]
    for pa, pb in zip(files_a, files_b):
        assert pa.read_bytes() == pb.read_bytes(), pa.name
    report("round-trip exactness and byte-identical regeneration")


def test_criterion_07_geojson_rfc7946(instances, tmp_path):
    """Every export passes the structural checker ([lon, lat] order,
    geometry types)."""
    for inst in instances:
        doc = to_geojson(inst)
        assert check_geojson(doc) == [], inst.instance_id
    whole = to_geojson(instances, out=tmp_path / "all.geojson")
    assert check_geojson(whole) == []
    assert check_geojson(json.loads((tmp_path / "all.geojson").read_text())) == []
    report(f"GeoJSON structural validity ({len(instances)} instances)")


def test_criterion_08_serve_mode_contract(dataset_root, tmp_path):
    """Taxonomy endpoint counts, PUT/GET round trip, 422 on a bad leaf,
    and atomicity under 10 concurrent readers during writes."""
    root = tmp_path / "served"
    shutil.copytree(dataset_root, root)
    shutil.rmtree(root / ".bundles", ignore_errors=True)
    server = ServerFixture(create_server(ServeConfig(root=str(root), port=0)))
    try:
        status, tax = server.get_json("/api/taxonomy")
        assert status == 200
        assert len(tax["categories"]) == 6
        assert sum(len(c["elements"]) for c in tax["categories"]) == 68

        _, index = server.get_json("/api/instances")
        instance_id = index["entries"][0]["instance_id"]
        _, detail = server.get_json(f"/api/instances/{instance_id}")
        start = detail["metadata"]["start_epoch_ms"]

        def annotation(ann_id, batch="b0"):
            return {"id": f"{batch}_{ann_id}", "instance_id": instance_id,
                    "t_start_ms": start + 1000, "t_end_ms": start + 2500,
                    "category": "Obstacles", "element": "Bench",
                    "note": "", "author": "gate", "created_at": 0}

        payload = [annotation("a")]
        status, _ = server.put_json(
            f"/api/instances/{instance_id}/annotations", payload)
        assert status == 200
        status, back = server.get_json(
            f"/api/instances/{instance_id}/annotations")
        assert status == 200 and back == payload

        bad = dict(payload[0], element="Pothole")  # not under Obstacles
        status, doc = server.put_json(
            f"/api/instances/{instance_id}/annotations", [bad])
        assert status == 422
        assert any(e["code"] == "taxonomy.mismatch" for e in doc["report"])

        failures = []
        stop = threading.Event()

        def reader():
            while not stop.is_set():
                try:
                    status, doc = server.get_json(
                        f"/api/instances/{instance_id}/annotations")
                    assert status == 200
                    batches = {a["id"].split("_")[0] for a in doc}
                    assert len(batches) <= 1, doc
                except Exception as exc:  # noqa: BLE001
                    failures.append(exc)
                    return

        readers = [threading.Thread(target=reader) for _ in range(10)]
        for t in readers:
            t.start()
        for i in range(10):
            batch = [annotation(str(j), batch=f"b{i}") for j in range(5)]
            status, _ = server.put_json(
                f"/api/instances/{instance_id}/annotations", batch)
            assert status == 200
        stop.set()
        for t in readers:
            t.join()
        assert failures == []
    finally:
        server.close()
    report("serve-mode contract (taxonomy, round trip, 422, atomic reads)")
