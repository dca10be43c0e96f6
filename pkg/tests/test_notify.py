"""Scenario orchestration: dialog machine, cooldowns, TTL, shelter search,
template rendering, suppression."""

from datetime import date

import pytest

from petwalk.context import ActivityState
from petwalk.envmodel import ForecastDay
from petwalk.errors import ExpiredDialogError, NotFoundError, TemplateError
from petwalk.feed import SensorKind, SensorReading, SensorSnapshot, apply
from petwalk.geo import GeoPoint
from petwalk.notify import (
    ActionKind,
    Channel,
    Excursion,
    Notifier,
    Scenario,
    Templates,
    render_pet_message,
    suppression_gate,
)
from petwalk.profile import POI, BigFive, UserProfile

ORIGIN = GeoPoint(41.15, -8.61)
M = 111194.92664455873


def profile(**kw):
    return UserProfile(
        user_id=kw.get("user_id", "u1"),
        pet=kw.get("pet", "panda"),
        bigfive=BigFive(5, 3, 3, 3, 3),
        preferred_categories=frozenset(kw.get("preferred", ["cultural"])),
        constraints=frozenset(kw.get("constraints", [])),
    )


def poi(poi_id, north_m, categories=("cultural",), indoor=True):
    return POI(
        poi_id=poi_id,
        name=poi_id,
        location=GeoPoint(ORIGIN.lat + north_m / M, ORIGIN.lon),
        categories=frozenset(categories),
        indoor=indoor,
        constraint_tags=frozenset(),
    )


def air_snapshot(pm25=40.0, aqi=None, observed=0.0):
    sample_fields = {"pm25": pm25}
    if aqi is not None:
        sample_fields["aqi"] = aqi
    from petwalk.envmodel import AirSample

    return apply(
        SensorSnapshot(),
        SensorReading("air-1", SensorKind.AIR, GeoPoint(41.1505, -8.6095), observed, AirSample(**sample_fields)),
    )


def noise_snapshot(level, observed=0.0):
    return apply(
        SensorSnapshot(),
        SensorReading("noise-1", SensorKind.NOISE, GeoPoint(41.1502, -8.6101), observed, level),
    )


def rain_snapshot(rate, observed=0.0):
    return apply(
        SensorSnapshot(),
        SensorReading("rain-1", SensorKind.PRECIPITATION, GeoPoint(41.1509, -8.6105), observed, rate),
    )


def merge(*snaps):
    out = SensorSnapshot()
    for snap in snaps:
        for r in snap.readings.values():
            out = apply(out, r)
    return out


CATALOG = [poi("shelter-a", 120.0), poi("shelter-b", 700.0, categories=("gastronomy",))]


class TestScenario1:
    def test_push_then_popup(self):
        notifier = Notifier()
        push = notifier.on_walk_threshold(profile(), ORIGIN, CATALOG, ActivityState.WALKING, 300.0)
        assert push.scenario is Scenario.S1_PROXIMITY
        assert push.channel is Channel.PUSH
        assert any(a.kind is ActionKind.OPEN_POPUP for a in push.actions)
        popup = notifier.on_notification_tap(profile(), push.id, 310.0)
        assert popup.channel is Channel.PET_POPUP
        assert "shelter-a" in popup.justification
        assert "120" in popup.justification
        assert "cultural" in popup.justification
        # idempotent
        assert notifier.on_notification_tap(profile(), push.id, 320.0) is popup

    def test_empty_catalog_is_silent(self):
        notifier = Notifier()
        assert notifier.on_walk_threshold(profile(), ORIGIN, [], ActivityState.WALKING, 300.0) is None

    def test_same_poi_not_suggested_twice_same_day(self):
        catalog = [poi("shelter-a", 120.0), poi("inn-b", 300.0, categories=("gastronomy",))]
        notifier = Notifier()
        first = notifier.on_walk_threshold(profile(), ORIGIN, catalog, ActivityState.WALKING, 300.0)
        assert first.related["poi"]["id"] == "shelter-a"
        second = notifier.on_walk_threshold(profile(), ORIGIN, catalog, ActivityState.WALKING, 700.0)
        assert second.related["poi"]["id"] == "inn-b"
        # next simulation day it is eligible again
        third = notifier.on_walk_threshold(profile(), ORIGIN, catalog, ActivityState.WALKING, 90_000.0)
        assert third.related["poi"]["id"] == "shelter-a"

    def test_suppressed_in_vehicle(self):
        notifier = Notifier()
        assert notifier.on_walk_threshold(profile(), ORIGIN, CATALOG, ActivityState.VEHICLE, 0.0) is None


class TestScenario2Dialog:
    def brew(self, snapshot=None, catalog=CATALOG):
        notifier = Notifier()
        push = notifier.on_env_poll(
            profile(), ORIGIN, snapshot or air_snapshot(), catalog, ActivityState.WALKING, 0.0
        )
        return notifier, push

    def test_push_popup_shelter_flow(self):
        notifier, push = self.brew()
        assert push.channel is Channel.PUSH
        assert push.related["conditions"][0]["label"] == "PM2.5"
        popup = notifier.on_notification_tap(profile(), push.id, 10.0)
        kinds = {a.kind for a in popup.actions}
        assert kinds == {ActionKind.RESPOND_YES, ActionKind.RESPOND_NO}
        assert "40" in popup.justification and "35" in popup.justification
        shelter = notifier.on_prompt_response(profile(), popup.id, True, ORIGIN, CATALOG, 20.0)
        assert shelter.related["poi"]["id"] == "shelter-a"
        nav = [a for a in shelter.actions if a.kind is ActionKind.NAVIGATE]
        assert len(nav) == 1
        assert nav[0].url.startswith("https://www.google.com/maps/dir/?api=1&destination=")

    def test_decline_clears_dialog(self):
        notifier, push = self.brew()
        popup = notifier.on_notification_tap(profile(), push.id, 10.0)
        assert notifier.on_prompt_response(profile(), popup.id, False, ORIGIN, CATALOG, 20.0) is None
        with pytest.raises(NotFoundError):
            notifier.on_prompt_response(profile(), popup.id, True, ORIGIN, CATALOG, 30.0)

    def test_all_safe_is_silent(self):
        notifier = Notifier()
        result = notifier.on_env_poll(
            profile(), ORIGIN, air_snapshot(pm25=10.0), CATALOG, ActivityState.WALKING, 0.0
        )
        assert result is None

    def test_no_sensors_is_silent(self):
        notifier = Notifier()
        assert notifier.on_env_poll(profile(), ORIGIN, SensorSnapshot(), CATALOG, ActivityState.WALKING, 0.0) is None

    def test_cooldown_suppresses_repeat(self):
        notifier = Notifier()
        snap = noise_snapshot(62.0)
        first = notifier.on_env_poll(profile(), ORIGIN, snap, CATALOG, ActivityState.WALKING, 0.0)
        assert first is not None
        popup = notifier.on_notification_tap(profile(), first.id, 1.0)
        notifier.on_prompt_response(profile(), popup.id, False, ORIGIN, CATALOG, 2.0)
        # 600 s later: still cooling down (window 1800)
        assert notifier.on_env_poll(profile(), ORIGIN, snap, CATALOG, ActivityState.WALKING, 600.0) is None
        assert notifier.on_env_poll(profile(), ORIGIN, snap, CATALOG, ActivityState.WALKING, 1200.0) is None
        # after the window a fresh alert fires
        again = notifier.on_env_poll(profile(), ORIGIN, snap, CATALOG, ActivityState.WALKING, 1800.0)
        assert again is not None

    def test_new_condition_folds_into_open_dialog(self):
        notifier = Notifier()
        push = notifier.on_env_poll(profile(), ORIGIN, air_snapshot(), CATALOG, ActivityState.WALKING, 0.0)
        both = merge(air_snapshot(), noise_snapshot(70.0))
        folded = notifier.on_env_poll(profile(), ORIGIN, both, CATALOG, ActivityState.WALKING, 600.0)
        assert folded is None  # no second push
        popup = notifier.on_notification_tap(profile(), push.id, 610.0)
        assert "PM2.5" in popup.justification and "70" in popup.justification

    def test_walk_more_then_rearm_finds_shelter(self):
        notifier = Notifier()
        push = notifier.on_env_poll(profile(), ORIGIN, air_snapshot(), [], ActivityState.WALKING, 0.0)
        popup = notifier.on_notification_tap(profile(), push.id, 10.0)
        walk_more = notifier.on_prompt_response(profile(), popup.id, True, ORIGIN, [], 20.0)
        assert "walk a bit more" in walk_more.justification
        assert "40" in walk_more.justification and "35" in walk_more.justification
        # next poll with a shelter in range resolves the standing request
        shelter = notifier.on_env_poll(profile(), ORIGIN, air_snapshot(), CATALOG, ActivityState.WALKING, 600.0)
        assert shelter is not None
        assert shelter.channel is Channel.PET_POPUP
        assert shelter.related["poi"]["id"] == "shelter-a"

    def test_rearm_clears_when_conditions_clear(self):
        notifier = Notifier()
        push = notifier.on_env_poll(profile(), ORIGIN, air_snapshot(), [], ActivityState.WALKING, 0.0)
        popup = notifier.on_notification_tap(profile(), push.id, 10.0)
        notifier.on_prompt_response(profile(), popup.id, True, ORIGIN, [], 20.0)
        cleared = notifier.on_env_poll(profile(), ORIGIN, air_snapshot(pm25=5.0), CATALOG, ActivityState.WALKING, 600.0)
        assert cleared is None
        # dialog is gone: responding again is a 404
        with pytest.raises(NotFoundError):
            notifier.on_prompt_response(profile(), popup.id, True, ORIGIN, CATALOG, 610.0)

    def test_tap_ttl(self):
        notifier, push = self.brew()
        with pytest.raises(ExpiredDialogError):
            notifier.on_notification_tap(profile(), push.id, 0.0 + 900.1)

    def test_response_ttl(self):
        notifier, push = self.brew()
        popup = notifier.on_notification_tap(profile(), push.id, 100.0)
        with pytest.raises(ExpiredDialogError):
            notifier.on_prompt_response(profile(), popup.id, True, ORIGIN, CATALOG, 100.0 + 900.1)

    def test_unknown_notification(self):
        notifier, _ = self.brew()
        with pytest.raises(NotFoundError):
            notifier.on_notification_tap(profile(), 999, 1.0)

    def test_rain_uses_tight_radius_air_uses_wide(self):
        far_shelter = [poi("far-inn", 700.0)]  # 700 m: inside 1000, outside 500
        notifier = Notifier()
        push = notifier.on_env_poll(profile(), ORIGIN, air_snapshot(), far_shelter, ActivityState.WALKING, 0.0)
        popup = notifier.on_notification_tap(profile(), push.id, 1.0)
        shelter = notifier.on_prompt_response(profile(), popup.id, True, ORIGIN, far_shelter, 2.0)
        assert shelter.related["poi"]["id"] == "far-inn"

        notifier = Notifier()
        push = notifier.on_env_poll(profile(), ORIGIN, rain_snapshot(12.0), far_shelter, ActivityState.WALKING, 0.0)
        popup = notifier.on_notification_tap(profile(), push.id, 1.0)
        walk_more = notifier.on_prompt_response(profile(), popup.id, True, ORIGIN, far_shelter, 2.0)
        assert "walk a bit more" in walk_more.justification

    def test_shelter_is_always_indoor(self):
        outdoor_only = [poi("park", 100.0, indoor=False)]
        notifier = Notifier()
        push = notifier.on_env_poll(profile(), ORIGIN, air_snapshot(), outdoor_only, ActivityState.WALKING, 0.0)
        popup = notifier.on_notification_tap(profile(), push.id, 1.0)
        result = notifier.on_prompt_response(profile(), popup.id, True, ORIGIN, outdoor_only, 2.0)
        assert "walk a bit more" in result.justification

    def test_aqi_condition_text(self):
        notifier = Notifier()
        push = notifier.on_env_poll(
            profile(), ORIGIN, air_snapshot(pm25=10.0, aqi=120.0), CATALOG, ActivityState.WALKING, 0.0
        )
        popup = notifier.on_notification_tap(profile(), push.id, 1.0)
        assert "120" in popup.justification and "50" in popup.justification

    def test_dialog_three_state_machine(self):
        """Exhaustive transitions: none -> awaiting_tap -> awaiting_response -> none."""
        notifier = Notifier()
        snap = air_snapshot()
        # state none: tap and response are not found
        with pytest.raises(NotFoundError):
            notifier.on_notification_tap(profile(), 1, 0.0)
        with pytest.raises(NotFoundError):
            notifier.on_prompt_response(profile(), 1, True, ORIGIN, CATALOG, 0.0)
        # none -> awaiting_tap
        push = notifier.on_env_poll(profile(), ORIGIN, snap, CATALOG, ActivityState.WALKING, 0.0)
        assert notifier._users["u1"].dialog.phase.value == "awaiting_tap"
        # responding while awaiting_tap is invalid
        with pytest.raises(NotFoundError):
            notifier.on_prompt_response(profile(), push.id, True, ORIGIN, CATALOG, 1.0)
        # awaiting_tap -> awaiting_response
        popup = notifier.on_notification_tap(profile(), push.id, 2.0)
        assert notifier._users["u1"].dialog.phase.value == "awaiting_response"
        # awaiting_response -> none (accept with shelter available)
        notifier.on_prompt_response(profile(), popup.id, True, ORIGIN, CATALOG, 3.0)
        assert notifier._users["u1"].dialog is None


class TestScenario3:
    def excursion(self, days_ahead, excursion_id="e1"):
        return Excursion(excursion_id, "u1", ORIGIN, "Porto", date(1970, 1, 1 + days_ahead))

    def forecast(self, **kw):
        day = ForecastDay(
            kw.get("date", date(1970, 1, 4)),
            kw.get("precip", 15.0),
            kw.get("wind", 20.0),
            kw.get("tmin", 12.0),
            kw.get("tmax", 18.0),
            kw.get("wtype", "Heavy rain"),
        )
        return {("Porto", day.date): day}

    def test_high_alert_pair(self):
        notifier = Notifier()
        out = notifier.on_forecast_poll(profile(), [self.excursion(3)], self.forecast(), 0.0)
        assert [n.channel for n in out] == [Channel.PUSH, Channel.PET_POPUP]
        assert all(n.scenario is Scenario.S3_FORECAST for n in out)
        assert out[1].related["severity"] == "HIGH"
        assert out[1].related["dominant"] == "precipitation"
        assert "15" in out[1].justification and "10" in out[1].justification

    def test_low_forecast_no_alert(self):
        notifier = Notifier()
        forecasts = self.forecast(precip=1.0, wind=10.0, tmin=15.0, tmax=22.0, wtype="Cloudy")
        assert notifier.on_forecast_poll(profile(), [self.excursion(3)], forecasts, 0.0) == []

    def test_outside_window_no_alert(self):
        notifier = Notifier()
        forecasts = self.forecast(date=date(1970, 1, 8))
        assert notifier.on_forecast_poll(profile(), [self.excursion(7)], forecasts, 0.0) == []

    def test_missing_forecast_skipped(self):
        notifier = Notifier()
        assert notifier.on_forecast_poll(profile(), [self.excursion(3)], {}, 0.0) == []

    def test_repeat_poll_respects_cadence(self):
        notifier = Notifier()
        first = notifier.on_forecast_poll(profile(), [self.excursion(3)], self.forecast(), 0.0)
        assert len(first) == 2
        assert notifier.on_forecast_poll(profile(), [self.excursion(3)], self.forecast(), 3600.0) == []
        again = notifier.on_forecast_poll(profile(), [self.excursion(3)], self.forecast(), 86_400.0)
        assert len(again) == 2

    def test_s3_push_tap_returns_paired_popup(self):
        notifier = Notifier()
        push, popup = notifier.on_forecast_poll(profile(), [self.excursion(3)], self.forecast(), 0.0)
        assert notifier.on_notification_tap(profile(), push.id, 5.0) is popup


class TestTemplates:
    def test_quantitative_fragment(self):
        text = render_pet_message(
            "s2_air", {"pollutant": "PM2.5", "value": "40", "unit": "µg/m³", "threshold": "35"}
        )
        assert "40 µg/m³" in text
        assert "35" in text

    def test_missing_placeholder(self):
        with pytest.raises(TemplateError):
            render_pet_message("s2_air", {"pollutant": "PM2.5"})

    def test_unknown_template(self):
        with pytest.raises(TemplateError):
            render_pet_message("no_such_template", {})

    def test_deterministic(self):
        context = {"pollutant": "NO2", "value": "120", "unit": "ppb", "threshold": "100"}
        assert render_pet_message("s2_air", context) == render_pet_message("s2_air", context)

    def test_custom_table(self):
        templates = Templates({"hello": "Hi {name}!"})
        assert templates.render("hello", {"name": "lynx"}) == "Hi lynx!"


class TestSuppressionGate:
    def test_gate(self):
        assert suppression_gate(ActivityState.VEHICLE) is True
        assert suppression_gate(ActivityState.WALKING) is False
        assert suppression_gate(ActivityState.STATIONARY) is False
        assert suppression_gate(ActivityState.UNKNOWN) is False


class TestNotificationInvariants:
    def test_ids_strictly_increasing(self):
        notifier = Notifier()
        notifier.on_env_poll(profile(), ORIGIN, air_snapshot(), CATALOG, ActivityState.WALKING, 0.0)
        notifier.on_notification_tap(profile(), 1, 1.0)
        notifier.on_prompt_response(profile(), 2, True, ORIGIN, CATALOG, 2.0)
        log = notifier.notifications("u1")
        assert [n.id for n in log] == sorted(n.id for n in log)
        assert len({n.id for n in log}) == len(log)

    def test_per_user_isolation(self):
        notifier = Notifier()
        alice, bob = profile(user_id="alice"), profile(user_id="bob", pet="lynx")
        notifier.on_env_poll(alice, ORIGIN, air_snapshot(), CATALOG, ActivityState.WALKING, 0.0)
        notifier.on_env_poll(bob, ORIGIN, air_snapshot(), CATALOG, ActivityState.WALKING, 0.0)
        assert [n.user_id for n in notifier.notifications("alice")] == ["alice"]
        assert [n.pet for n in notifier.notifications("bob")] == ["lynx"]
        assert notifier.notifications("alice")[0].id == notifier.notifications("bob")[0].id == 1
