import dataclasses
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from crowddtn.scenario import RouterKind, RouterParams, ScenarioConfig
from crowddtn.settings import (
    SettingsError,
    apply_value,
    load_settings,
    parse_bytes,
    parse_duration,
    parse_rate,
    parse_settings,
    serialize_settings,
    sweep_from_settings,
)

BASELINE = Path(__file__).resolve().parents[1] / "settings" / "baseline.txt"


class TestUnits:
    @pytest.mark.parametrize(
        "text,expected",
        [("1000", 1000), ("1kB", 1000), ("1 KB", 1000), ("1KiB", 1024), ("1MB", 10**6), ("1Mb", 10**6), ("2MiB", 2 * 2**20)],
    )
    def test_bytes(self, text, expected):
        assert parse_bytes(text) == expected

    @pytest.mark.parametrize("text", ["1.5", "abc", "3 parsecs"])
    def test_bad_bytes(self, text):
        with pytest.raises(ValueError):
            parse_bytes(text)

    @pytest.mark.parametrize("text,expected", [("600", 600), ("10min", 600), ("10m", 600), ("2h", 7200), ("0.5s", 0.5)])
    def test_duration(self, text, expected):
        assert parse_duration(text) == expected

    def test_rate(self):
        assert parse_rate("250kB/s") == parse_rate("250000") == 250_000


class TestParse:
    def test_audience_count(self):
        assert parse_settings("scenario.audience_count = 100\n").audience_count == 100

    def test_spray_focus_with_ten_copies(self):
        cfg = parse_settings("router.kind = SPRAY_FOCUS\nrouter.copies_l = 10\n")
        assert cfg.router_kind is RouterKind.SPRAY_FOCUS
        assert cfg.router_params.copies_l == 10

    def test_empty_text_is_baseline(self):
        assert parse_settings("") == ScenarioConfig()

    def test_baseline_file_matches_defaults(self):
        assert parse_settings(BASELINE.read_text()) == ScenarioConfig()

    def test_comments_and_blank_lines(self):
        cfg = parse_settings("# header\n\nscenario.message_ttl = 5min  # short\n")
        assert cfg.message_ttl == 300

    def test_zero_ttl_names_key_and_line(self):
        with pytest.raises(SettingsError) as err:
            parse_settings("router.beta = 0.9\nscenario.message_ttl = 0\n")
        assert err.value.key == "scenario.message_ttl"
        assert err.value.line == 2
        assert "line 2" in str(err.value) and "positive" in str(err.value)

    def test_unknown_key(self):
        with pytest.raises(SettingsError) as err:
            parse_settings("scenario.audiance_count = 3\n")
        assert err.value.line == 1 and "unknown" in str(err.value)

    def test_duplicate_key(self):
        with pytest.raises(SettingsError) as err:
            parse_settings("router.copies_l = 3\nrouter.copies_l = 4\n")
        assert err.value.line == 2

    def test_unparsable_value(self):
        with pytest.raises(SettingsError) as err:
            parse_settings("\nrouter.copies_l = many\n")
        assert err.value.line == 2 and err.value.key == "router.copies_l"

    def test_missing_equals(self):
        with pytest.raises(SettingsError):
            parse_settings("router.copies_l 3\n")

    def test_artist_position(self):
        assert parse_settings("scenario.artist_position = 45, -10").artist_position == (45.0, -10.0)
        assert parse_settings("scenario.artist_position = auto").artist_position is None

    def test_sweep_section(self):
        s = load_settings("sweep.axis = router.copies_l\nsweep.values = 10, 25\nsweep.seeds = 1,2\n")
        spec = sweep_from_settings(s.sweep)
        assert spec.axis == "router.copies_l"
        assert spec.values == ("10", "25") and spec.seeds == (1, 2)

    def test_sweep_rejects_non_sweepable_axis(self):
        with pytest.raises(SettingsError):
            sweep_from_settings({}, axis="scenario.grid_origin", values=["1,1"])

    def test_apply_value_router_key(self):
        cfg = apply_value(ScenarioConfig(), "router.aging_interval", "25")
        assert cfg.router_params.aging_interval == 25


def test_every_field_has_a_key():
    text = serialize_settings(ScenarioConfig())
    keys = {line.split("=")[0].strip() for line in text.splitlines() if line.strip()}
    fields = {f.name for f in dataclasses.fields(ScenarioConfig)} - {"router_params"}
    fields |= {f.name for f in dataclasses.fields(RouterParams)}
    attrs = {k.split(".", 1)[1] for k in keys} | {"router_kind"}
    assert fields <= attrs | {"kind"}


configs = st.builds(
    ScenarioConfig,
    audience_count=st.integers(1, 2000),
    artist_position=st.one_of(st.none(), st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))),
    grid_origin=st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)),
    grid_spacing=st.floats(0.1, 100),
    radio_range=st.floats(0.1, 100),
    link_bandwidth=st.floats(1, 1e7),
    message_size=st.integers(1, 5000),
    buffer_capacity=st.integers(5000, 10**8),
    message_ttl=st.floats(10, 1e5),
    sim_duration=st.floats(1, 1e5),
    step_size=st.sampled_from([0.5, 1.0, 2.0]),
    generation_interval=st.floats(0.5, 1000),
    rng_seed=st.integers(0, 2**31),
    router_kind=st.sampled_from(list(RouterKind)),
    router_params=st.builds(
        RouterParams,
        p_init=st.floats(0, 1),
        p_enc_max=st.floats(0, 1),
        i_typ=st.floats(1, 1e4),
        beta=st.floats(0, 1),
        gamma=st.floats(0.5, 1),
        aging_interval=st.floats(1, 500),
        copies_l=st.integers(1, 256),
        focus_threshold=st.floats(0, 100),
        timer_offset=st.floats(0, 100),
    ),
)


@given(configs)
def test_serialize_parse_fixed_point(cfg):
    text = serialize_settings(cfg)
    parsed = parse_settings(text)
    assert parsed == cfg
    assert serialize_settings(parsed) == text
