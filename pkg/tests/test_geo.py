import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import check_geojson, law_of_cosines_m
from walksense.errors import EmptyInput, InvalidCoordinate, NoGpsData
from walksense.geo import (
    CitySummary,
    aggregate_summaries,
    city_summaries,
    format_summary,
    haversine_m,
    summarize_instance,
    to_geojson,
    track_length_m,
)
from walksense.instance import GpsTrack


def make_track(lat, lon, accuracy=None, t0=0, step=1000):
    n = len(lat)
    acc = np.full(n, 5.0) if accuracy is None else np.asarray(accuracy, float)
    return GpsTrack(t0 + step * np.arange(n, dtype=np.int64),
                    np.asarray(lat, float), np.asarray(lon, float), acc)


coords = st.tuples(st.floats(-90, 90), st.floats(-180, 180))


class TestHaversine:
    def test_identical_points(self):
        assert haversine_m((12.5, -71.25), (12.5, -71.25)) == 0.0

    def test_distinct_points_nonzero(self):
        assert haversine_m((12.5, -71.25), (12.5, -71.2500001)) > 0.0

    def test_one_degree_on_equator(self):
        # arc length of 1 degree on a 6371 km sphere
        expected = 6_371_000.0 * math.pi / 180.0
        assert haversine_m((0.0, 0.0), (0.0, 1.0)) == pytest.approx(expected, abs=1.0)
        assert haversine_m((0.0, 0.0), (0.0, 1.0)) == pytest.approx(111_195, abs=1.0)

    def test_against_law_of_cosines(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            a = (rng.uniform(-80, 80), rng.uniform(-179, 179))
            b = (a[0] + rng.uniform(-0.5, 0.5), a[1] + rng.uniform(-0.5, 0.5))
            assert haversine_m(a, b) == pytest.approx(law_of_cosines_m(a, b),
                                                      abs=0.5)

    def test_rejects_bad_coordinates(self):
        with pytest.raises(InvalidCoordinate):
            haversine_m((123.0, 0.0), (0.0, 0.0))
        with pytest.raises(InvalidCoordinate):
            haversine_m((0.0, 0.0), (0.0, 181.0))

    @given(a=coords, b=coords)
    @settings(max_examples=200, deadline=None)
    def test_symmetric_and_nonnegative(self, a, b):
        d = haversine_m(a, b)
        assert d >= 0
        assert d == pytest.approx(haversine_m(b, a), abs=1e-6)

    @given(a=coords, b=coords, c=coords)
    @settings(max_examples=200, deadline=None)
    def test_triangle_inequality(self, a, b, c):
        assert haversine_m(a, c) <= haversine_m(a, b) + haversine_m(b, c) + 1e-6


class TestTrackLength:
    def test_single_fix_is_zero(self):
        assert track_length_m(make_track([10.0], [20.0])) == 0.0

    def test_straight_100m(self):
        # ~100 m north along a meridian: 100 / (R * pi/180) degrees
        dlat = 100.0 / (6_371_000.0 * math.pi / 180.0)
        lat = np.linspace(40.0, 40.0 + dlat, 20)
        lon = np.full(20, -75.0)
        assert track_length_m(make_track(lat, lon)) == pytest.approx(100.0, abs=0.1)

    def test_reversal_invariant(self):
        rng = np.random.default_rng(3)
        lat = 40.0 + np.cumsum(rng.normal(0, 1e-5, 50))
        lon = -75.0 + np.cumsum(rng.normal(0, 1e-5, 50))
        fwd = track_length_m(make_track(lat, lon))
        rev = track_length_m(make_track(lat[::-1], lon[::-1]))
        assert fwd == pytest.approx(rev, rel=1e-12)

    def test_concatenation_additive(self):
        lat = np.linspace(10.0, 10.001, 30)
        lon = np.linspace(20.0, 20.001, 30)
        whole = track_length_m(make_track(lat, lon))
        first = track_length_m(make_track(lat[:16], lon[:16]))
        second = track_length_m(make_track(lat[15:], lon[15:]))
        assert whole == pytest.approx(first + second, rel=1e-9)

    def test_accuracy_filter_drops_outliers(self):
        lat = [40.0, 40.0001, 41.0, 40.0002]
        lon = [-75.0, -75.0, -75.0, -75.0]
        acc = [5.0, 5.0, 500.0, 5.0]
        clean = track_length_m(make_track(lat, lon, acc))
        spiky = track_length_m(make_track(lat, lon))
        assert clean < 50
        assert spiky > 100_000


# Dataset-level figures reported for the four-city collection, used as a
# fixed aggregation fixture.
CITY_ROWS = [
    CitySummary("Chicago", "USA", 25, 3, 5865, 4616, 175847, 609890, 58247, 333626),
    CitySummary("Jundiaí", "Brazil", 7, 2, 1482, 1890, 44476, 139294, 8243, 68096),
    CitySummary("Santos", "Brazil", 11, 2, 2247, 3532, 67431, 215573, 12499, 105680),
    CitySummary("São Paulo", "Brazil", 4, 2, 1271, 1840, 38129, 92638, 63624, 38073),
]


class TestAggregation:
    def test_four_city_fixture(self):
        total = aggregate_summaries(CITY_ROWS)
        assert total.routes == 47
        assert total.hospitals == 9
        assert total.distance_m == 10_865
        assert total.duration_s == 11_878
        assert total.video_frames == 325_883
        assert total.acc_points == 1_057_395
        assert total.gyr_points == 142_613
        assert total.mag_points == 545_475

    def test_single_row_identity(self):
        row = CITY_ROWS[0]
        total = aggregate_summaries([row])
        for name in ("routes", "hospitals", "distance_m", "duration_s",
                     "video_frames", "acc_points", "gyr_points", "mag_points"):
            assert getattr(total, name) == getattr(row, name)

    def test_order_independent(self):
        perm = [CITY_ROWS[2], CITY_ROWS[0], CITY_ROWS[3], CITY_ROWS[1]]
        assert aggregate_summaries(perm) == aggregate_summaries(CITY_ROWS)

    def test_matches_bruteforce_sums(self):
        total = aggregate_summaries(CITY_ROWS)
        assert total.acc_points == sum(r.acc_points for r in CITY_ROWS)
        assert total.distance_m == sum(r.distance_m for r in CITY_ROWS)

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            aggregate_summaries([])


class TestSummaries:
    def test_counts_match_ground_truth(self, instances, ground_truth):
        for inst in instances:
            gt = ground_truth.by_id(inst.instance_id)
            s = summarize_instance(inst)
            assert s.acc_points == gt.counts["accelerometer"]
            assert s.gyr_points == gt.counts["gyroscope"]
            assert s.mag_points == gt.counts["magnetometer"]
            assert s.video_frames == gt.video_frames
            assert s.duration_s == pytest.approx(gt.duration_s, abs=1e-3)
            assert s.distance_m == pytest.approx(gt.distance_m, rel=0.005)

    def test_sensor_only_frames_estimated(self, one_instance):
        s = summarize_instance(one_instance)
        meta = one_instance.metadata
        assert s.frames_estimated
        assert s.video_frames == round(s.duration_s * meta.video_fps)

    def test_probe_backed_frame_count(self, video_instance_dir):
        from walksense.instance import load_instance
        from walksense.media import MediaTool

        inst = load_instance(video_instance_dir)
        tool = MediaTool()
        s = summarize_instance(inst, probe_duration_ms=tool.probe_ms)
        assert not s.frames_estimated
        # the emitted video holds round(duration * fps) frames
        want = round(s.duration_s * inst.metadata.video_fps)
        assert abs(s.video_frames - want) <= 1

    def test_city_grouping(self, instances):
        rows = [summarize_instance(i) for i in instances]
        cities = city_summaries(rows)
        assert len(cities) == 4
        assert [c.routes for c in cities] == [3, 3, 3, 3]
        assert all(c.hospitals == 2 for c in cities)
        assert [c.city for c in cities] == sorted(c.city for c in cities)

    def test_formats(self, instances):
        cities = city_summaries([summarize_instance(i) for i in instances])
        csv_text = format_summary(cities, "csv")
        lines = csv_text.strip().splitlines()
        assert lines[0] == ("city,country,routes,hospitals,distance_m,"
                            "duration_s,video_frames,acc_points,gyr_points,"
                            "mag_points")
        assert len(lines) == 1 + 4 + 1  # header + cities + All
        assert lines[-1].startswith("All,")
        doc = json.loads(format_summary(cities, "json"))
        assert doc["all"]["routes"] == sum(c.routes for c in cities)
        md = format_summary(cities, "md")
        assert md.startswith("| city |") or md.startswith("| city")


class TestGeoJson:
    def test_two_fix_linestring(self):
        from walksense.instance import Instance, InstanceMetadata, BootAnchor, BatterySeries
        meta = InstanceMetadata(instance_id="tiny", start_epoch_ms=0,
                                stop_epoch_ms=1000,
                                boot_anchor=BootAnchor(0, 0))
        inst = Instance(metadata=meta, sensors3={}, sensors1={}, sensors_u3={},
                        gps=make_track([10.0, 10.001], [20.0, 20.001]),
                        battery=BatterySeries.empty())
        doc = to_geojson(inst)
        assert len(doc["features"]) == 1
        assert doc["features"][0]["geometry"]["type"] == "LineString"
        assert len(doc["features"][0]["geometry"]["coordinates"]) == 2
        assert check_geojson(doc) == []

    def test_coordinates_are_lon_lat(self, one_instance):
        doc = to_geojson(one_instance)
        lon, lat = doc["features"][0]["geometry"]["coordinates"][0]
        assert lon == pytest.approx(float(one_instance.gps.lon[0]))
        assert lat == pytest.approx(float(one_instance.gps.lat[0]))

    def test_dataset_export_cross_checks_summaries(self, instances, tmp_path):
        out = tmp_path / "dataset.geojson"
        doc = to_geojson(instances, out=out)
        assert len(doc["features"]) == len(instances)
        assert check_geojson(doc) == []
        by_id = {f["properties"]["instance_id"]: f for f in doc["features"]}
        for inst in instances:
            s = summarize_instance(inst)
            assert by_id[inst.instance_id]["properties"]["distance_m"] == \
                pytest.approx(s.distance_m)
        assert json.loads(out.read_text())["type"] == "FeatureCollection"

    def test_empty_gps_raises(self):
        from walksense.instance import Instance, InstanceMetadata, BootAnchor, BatterySeries
        meta = InstanceMetadata(instance_id="empty", start_epoch_ms=0,
                                stop_epoch_ms=1000, boot_anchor=BootAnchor(0, 0))
        inst = Instance(metadata=meta, sensors3={}, sensors1={}, sensors_u3={},
                        gps=GpsTrack.empty(), battery=BatterySeries.empty())
        with pytest.raises(NoGpsData):
            to_geojson(inst)
