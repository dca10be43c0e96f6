"""Ingestion: entity parsing round-trips, forecast parsing, snapshot
semantics, grid determinism, trace parsing."""

import copy
import json
import random
from datetime import date

import pytest

from petwalk.errors import DomainError, ParseError, TraceOrderError, UnsupportedTypeError
from petwalk.feed import (
    SensorKind,
    SensorReading,
    SensorSnapshot,
    apply,
    gen_sensor_grid,
    parse_forecast,
    parse_sensor_entity,
    parse_trace,
    serialize_sensor_entity,
)
from petwalk.geo import GeoPoint

from conftest import FIXTURES, load_json


@pytest.fixture(scope="module")
def corpus():
    return load_json(FIXTURES / "sensors" / "entities.json")


class TestParseSensorEntity:
    def test_air_entity(self):
        reading = parse_sensor_entity(
            {
                "id": "air-porto-01",
                "type": "AirQualityObserved",
                "dateObserved": 120.0,
                "location": {"type": "Point", "coordinates": [-8.61, 41.15]},
                "pm25": 40,
            }
        )
        assert reading.kind is SensorKind.AIR
        assert reading.payload.pm25 == 40.0
        # GeoJSON order is (lon, lat); our points are (lat, lon)
        assert reading.location == GeoPoint(41.15, -8.61)
        assert reading.observed_at == 120.0

    def test_wrapped_properties_and_iso_timestamp(self):
        reading = parse_sensor_entity(
            {
                "id": "noise-1",
                "type": "NoiseLevelObserved",
                "dateObserved": {"type": "Property", "value": "1970-01-01T00:02:00Z"},
                "location": {"type": "GeoProperty", "value": {"type": "Point", "coordinates": [-8.6, 41.1]}},
                "LAeq": {"type": "Property", "value": 62.5},
            }
        )
        assert reading.kind is SensorKind.NOISE
        assert reading.payload == 62.5
        assert reading.observed_at == 120.0

    @pytest.mark.parametrize("missing", ["id", "type", "location", "dateObserved"])
    def test_missing_required_field(self, missing):
        entity = {
            "id": "x",
            "type": "WeatherObserved",
            "dateObserved": 0,
            "location": {"type": "Point", "coordinates": [0, 0]},
            "precipitation": 1.0,
        }
        del entity[missing]
        with pytest.raises(ParseError) as err:
            parse_sensor_entity(entity)
        assert missing in str(err.value)

    def test_unknown_type(self):
        with pytest.raises(UnsupportedTypeError):
            parse_sensor_entity(
                {"id": "x", "type": "TrafficFlowObserved", "dateObserved": 0,
                 "location": {"type": "Point", "coordinates": [0, 0]}}
            )

    def test_air_without_measurements(self):
        with pytest.raises(ParseError):
            parse_sensor_entity(
                {"id": "x", "type": "AirQualityObserved", "dateObserved": 0,
                 "location": {"type": "Point", "coordinates": [0, 0]}}
            )

    def test_corpus_round_trip(self, corpus):
        assert len(corpus) == 50
        for entity in corpus:
            reading = parse_sensor_entity(entity)
            canonical = serialize_sensor_entity(reading)
            again = parse_sensor_entity(canonical)
            assert again == reading
            assert serialize_sensor_entity(again) == canonical

    def test_parser_totality_under_mutation(self, corpus):
        # mutated documents either parse or raise a ParseError, never crash
        rng = random.Random(6)
        mutations = 0
        for entity in corpus:
            for _ in range(4):
                broken = copy.deepcopy(entity)
                roll = rng.random()
                if roll < 0.25 and broken:
                    broken.pop(rng.choice(sorted(broken)))
                elif roll < 0.5:
                    broken["location"] = rng.choice([None, 42, {"type": "Point"}, {"type": "Point", "coordinates": [1]}])
                elif roll < 0.75:
                    broken["dateObserved"] = rng.choice([None, "not-a-date", [], {}])
                else:
                    broken[rng.choice(["pm25", "LAeq", "precipitation"])] = rng.choice(["abc", {}, []])
                try:
                    parse_sensor_entity(broken)
                except ParseError:
                    pass
                mutations += 1
        assert mutations == 200


class TestParseForecast:
    def test_identity_record(self):
        block = {
            "district": "Porto",
            "days": [{"forecastDate": "2026-03-01", "precipIntensity": 15.0, "windSpeed": 20.0,
                      "tMin": 12.0, "tMax": 18.0, "weatherType": "Heavy rain"}],
        }
        [(district, day)] = parse_forecast(block)
        assert district == "Porto"
        assert day.date == date(2026, 3, 1)
        assert day.precipitation == 15.0
        assert day.weather_type == "Heavy rain"

    def test_empty_days(self):
        assert parse_forecast({"district": "Porto", "days": []}) == []

    def test_id_lookup_and_unknown_id(self):
        block = {
            "district": "Porto",
            "days": [
                {"forecastDate": "2026-03-01", "precipIntensity": 1.0, "windSpeed": 5.0, "tMin": 10, "tMax": 20, "idWeatherType": 11},
                {"forecastDate": "2026-03-02", "precipIntensity": 1.0, "windSpeed": 5.0, "tMin": 10, "tMax": 20, "idWeatherType": 999},
            ],
        }
        parsed = parse_forecast(block)
        assert parsed[0][1].weather_type == "Heavy rain"
        assert parsed[1][1].weather_type == "unknown"

    def test_fixture_file(self):
        parsed = parse_forecast(load_json(FIXTURES / "forecast" / "five_day.json"))
        districts = {district for district, _ in parsed}
        assert districts == {"Porto", "Braga"}
        porto = {day.date.isoformat(): day for district, day in parsed if district == "Porto"}
        assert porto["1970-01-04"].precipitation == 15.0
        # IPMA-style string temperatures parse too
        assert porto["1970-01-02"].temp_min == 11.4

    def test_malformed_record_names_index(self):
        block = {"district": "Porto", "days": [
            {"forecastDate": "2026-03-01", "precipIntensity": 1.0, "windSpeed": 5.0, "tMin": 10, "tMax": 20, "idWeatherType": 1},
            {"forecastDate": "2026-03-02", "windSpeed": 5.0, "tMin": 10, "tMax": 20},
        ]}
        with pytest.raises(ParseError) as err:
            parse_forecast(block)
        assert "record 1" in str(err.value)

    def test_block_shape_enforced(self):
        with pytest.raises(ParseError):
            parse_forecast({"days": []})


def reading(sensor_id="s1", observed_at=0.0, value=1.0):
    return SensorReading(sensor_id, SensorKind.PRECIPITATION, GeoPoint(41, -8), observed_at, value)


class TestSnapshot:
    def test_newer_replaces(self):
        snap = apply(SensorSnapshot(), reading(observed_at=10, value=1.0))
        snap = apply(snap, reading(observed_at=20, value=2.0))
        assert snap.readings["s1"].payload == 2.0
        assert snap.snapshot_at == 20

    def test_older_ignored(self):
        snap = apply(SensorSnapshot(), reading(observed_at=20, value=2.0))
        snap = apply(snap, reading(observed_at=10, value=1.0))
        assert snap.readings["s1"].payload == 2.0

    def test_tie_keeps_newcomer(self):
        snap = apply(SensorSnapshot(), reading(observed_at=20, value=2.0))
        snap = apply(snap, reading(observed_at=20, value=3.0))
        assert snap.readings["s1"].payload == 3.0

    def test_interleaved_sensors_both_retained(self):
        snap = SensorSnapshot()
        snap = apply(snap, reading("a", 5, 1.0))
        snap = apply(snap, reading("b", 3, 2.0))
        snap = apply(snap, reading("a", 8, 3.0))
        assert set(snap.readings) == {"a", "b"}
        assert snap.readings["a"].payload == 3.0

    def test_observed_at_is_max_seen(self):
        rng = random.Random(12)
        snap = SensorSnapshot()
        best: dict[str, float] = {}
        for _ in range(300):
            sid = rng.choice(["a", "b", "c", "d"])
            t = float(rng.randint(0, 1000))
            snap = apply(snap, reading(sid, t, t))
            best[sid] = max(best.get(sid, -1.0), t)
            assert snap.readings[sid].observed_at == best[sid]

    def test_apply_does_not_mutate_input(self):
        original = apply(SensorSnapshot(), reading(observed_at=5))
        apply(original, reading(observed_at=9))
        assert original.readings["s1"].observed_at == 5


class TestSensorGrid:
    def test_counts_exact(self):
        grid = gen_sensor_grid(1, (41.1, -8.7, 41.2, -8.5), 100, 50, 5)
        assert len(grid) == 155
        assert sum(1 for g in grid if g["kind"] == "Air") == 100
        assert sum(1 for g in grid if g["kind"] == "Noise") == 50
        assert sum(1 for g in grid if g["kind"] == "Precipitation") == 5

    def test_zero_counts(self):
        assert gen_sensor_grid(1, (0, 0, 1, 1), 0, 0, 0) == []

    def test_same_seed_identical(self):
        a = gen_sensor_grid(7, (41.1, -8.7, 41.2, -8.5), 10, 10, 2)
        b = gen_sensor_grid(7, (41.1, -8.7, 41.2, -8.5), 10, 10, 2)
        assert a == b

    def test_different_seed_differs(self):
        a = gen_sensor_grid(7, (41.1, -8.7, 41.2, -8.5), 10, 0, 0)
        b = gen_sensor_grid(8, (41.1, -8.7, 41.2, -8.5), 10, 0, 0)
        assert a != b

    def test_inside_bbox(self):
        grid = gen_sensor_grid(3, (41.1, -8.7, 41.2, -8.5), 50, 0, 0)
        assert all(41.1 <= g["lat"] <= 41.2 and -8.7 <= g["lon"] <= -8.5 for g in grid)

    def test_degenerate_bbox(self):
        with pytest.raises(DomainError):
            gen_sensor_grid(1, (41.2, -8.5, 41.1, -8.7), 1, 1, 1)


class TestParseTrace:
    def test_fixture_trace_in_order(self):
        with open(FIXTURES / "traces" / "s2.jsonl", "r", encoding="utf-8") as fh:
            events = list(parse_trace(fh))
        assert len(events) >= 10
        assert all(a.t <= b.t for a, b in zip(events, events[1:]))

    def test_empty_stream(self):
        assert list(parse_trace([])) == []

    def test_timestamp_regression_names_line(self):
        lines = [
            json.dumps({"t": 5, "kind": "location", "body": {"user": "u", "lat": 1, "lon": 1}}),
            json.dumps({"t": 4, "kind": "location", "body": {"user": "u", "lat": 1, "lon": 1}}),
        ]
        with pytest.raises(TraceOrderError) as err:
            list(parse_trace(lines))
        assert "line 2" in str(err.value)

    def test_malformed_json_names_line(self):
        with pytest.raises(ParseError) as err:
            list(parse_trace(['{"t": 1, "kind": "location", "body": {}}', "{not json"]))
        assert "line 2" in str(err.value)

    def test_unknown_kind_rejected(self):
        line = json.dumps({"t": 1, "kind": "teleport", "body": {}})
        with pytest.raises(ParseError):
            list(parse_trace([line]))

    def test_blank_lines_skipped(self):
        line = json.dumps({"t": 1, "kind": "location", "body": {"user": "u", "lat": 0, "lon": 0}})
        events = list(parse_trace(["", line, "   ", ""]))
        assert len(events) == 1
