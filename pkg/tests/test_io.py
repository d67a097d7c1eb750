import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fwm import io as fio
from fwm.core_model import RadarConfig
from fwm.echo_synth import IqSeries, Provenance
from fwm.errors import SchemaVersionError, ScenarioError
from fwm.scenarios import FIG3_PEAK_VELOCITIES, fwm_dwell_time
from fwm.spectral import periodogram
from fwm.tracker import build_track, track_summary

from .helpers import estimate_with_count

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"

BIRDS_YAML = """\
radar:
  wavelength_m: 0.03
  dwell_time_s: 0.05
flock:
  body_velocity_mps: -5
  birds:
    - {wing_length_m: 0.5, flap_rate_hz: 6, initial_phase_deg: 30}
    - wing_length_m: -0.4
      flap_rate_hz: 6
"""


def test_shipped_scenarios_parse():
    fig2 = fio.load_scenario(SCENARIOS / "sim_fig2.yaml")
    assert fig2.scenario.n_birds == 37
    assert fig2.radar.n_samples == 1600
    fig3 = fio.load_scenario(SCENARIOS / "syn_fig3.yaml")
    assert fig3.scenario.n_birds == len(FIG3_PEAK_VELOCITIES) - 1
    assert fig3.radar.dwell_time == pytest.approx(fwm_dwell_time(7.0))
    assert fig3.scenario.noise_snr_db == 20.0
    track = fio.load_scenario(SCENARIOS / "track.yaml")
    assert track.track is not None and track.track.n_updates == 5


def test_error_names_field_and_line():
    with pytest.raises(ScenarioError) as info:
        fio.parse_scenario(fio.parse_yaml(BIRDS_YAML))
    err = info.value
    assert err.field == "flock.birds[1].wing_length_m"
    assert err.line == 8
    assert str(err).startswith("line 8, flock.birds[1].wing_length_m:")


def test_explicit_birds_parse():
    doc = fio.parse_yaml(BIRDS_YAML.replace("-0.4", "0.4"))
    spec = fio.parse_scenario(doc)
    assert spec.scenario.n_birds == 2
    assert spec.scenario.birds[0].initial_phase == pytest.approx(math.radians(30))
    assert spec.scenario.birds[1].body_radial_velocity == -5


@pytest.mark.parametrize("text, field", [
    ("radar: {wavelength_m: 0.03, dwell_time_s: 0.02, colour: red}\nflock:\n  wing_length_m: 0.6\n"
     "  flap_rate_hz: 7\n  phase_grid_deg: {start: 0, stop: 10, step: 5}\n", "radar.colour"),
    ("flock: {}\n", "radar"),
    ("radar: {wavelength_m: 0.03}\nflock: {}\n", "flock"),
    ("radar: {wavelength_m: zero, dwell_time_s: 0.02}\nflock:\n  wing_length_m: 0.6\n  flap_rate_hz: 7\n"
     "  phase_grid_deg: {start: 0, stop: 10, step: 5}\n", "radar.wavelength_m"),
    ("radar: {wavelength_m: 0.03, dwell_time_s: 0.02}\nflock:\n  flap_rate_hz: 7\n"
     "  phase_grid_deg: {start: 0, stop: 10, step: 5}\n", "flock.wing_length_m"),
])
def test_validation_errors(text, field):
    with pytest.raises(ScenarioError) as info:
        fio.parse_scenario(fio.parse_yaml(text))
    assert info.value.field == field


def test_syntax_error_has_line():
    with pytest.raises(ScenarioError) as info:
        fio.parse_yaml("radar:\n  wavelength_m: [0.03\nflock: {}\n")
    assert info.value.line is not None


def test_duplicate_key():
    with pytest.raises(ScenarioError) as info:
        fio.parse_yaml("radar: {}\nradar: {}\n")
    assert info.value.field == "radar" and info.value.line == 2


def test_params_file():
    params = fio.parse_params(fio.parse_yaml("detection: {min_prominence_db: 3}\nwindow: hamming\n"))
    assert params.detection.min_prominence_db == 3.0
    assert params.window == "hamming"
    with pytest.raises(ScenarioError):
        fio.parse_params(fio.parse_yaml("statistic: mode\n"))


def test_iq_round_trip(tmp_path):
    radar = RadarConfig(0.03, 0.01, 1000.0)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    iq = IqSeries(x, 1000.0, Provenance("abc", 5, ("synth:dwell",)))
    path, side = fio.write_iq(tmp_path / "d.iq", iq, radar)
    assert path.stat().st_size == 80
    meta = json.loads(side.read_text())
    assert meta["schema_version"] == fio.SCHEMA_VERSION
    assert meta["sample_rate_hz"] == 1000.0 and meta["duration_s"] == 0.01 and meta["n_samples"] == 10
    assert meta["scenario_hash"] == "abc" and meta["seed"] == 5
    back, wavelength = fio.read_iq(path)
    assert wavelength == 0.03
    np.testing.assert_array_equal(back.samples, x.astype(np.complex64))
    raw = np.frombuffer(path.read_bytes(), dtype="<f4")
    assert raw[0] == np.float32(x[0].real) and raw[1] == np.float32(x[0].imag)


def test_iq_size_mismatch_and_schema(tmp_path):
    radar = RadarConfig(0.03, 0.01, 1000.0)
    path, side = fio.write_iq(tmp_path / "d.iq", IqSeries(np.ones(10, complex), 1000.0), radar)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ScenarioError):
        fio.read_iq(path)
    meta = json.loads(side.read_text())
    meta["schema_version"] = "0"
    side.write_text(json.dumps(meta))
    with pytest.raises(SchemaVersionError):
        fio.read_iq(path)
    with pytest.raises(OSError):
        fio.read_iq(tmp_path / "missing.iq")


def test_spectrum_csv_round_trip(tmp_path):
    x = np.zeros(32, complex)
    x[::4] = 1.0
    spectrum = periodogram(IqSeries(x, 100.0), window="rectangular", fft_length=32, wavelength=0.03)
    assert np.isneginf(spectrum.magnitudes_db).any()
    path = fio.write_spectrum_csv(tmp_path / "s.csv", spectrum)
    assert path.read_text().splitlines()[0] == "bin,frequency_hz,velocity_mps,magnitude_db"
    cols = fio.read_spectrum_csv(path)
    np.testing.assert_array_equal(cols["bin"], np.arange(32))
    np.testing.assert_array_equal(cols["frequency_hz"], spectrum.frequency_axis)
    np.testing.assert_array_equal(cols["velocity_mps"], spectrum.velocity_axis)
    np.testing.assert_array_equal(cols["magnitude_db"], spectrum.magnitudes_db)


def test_track_csv_and_report_round_trip(tmp_path):
    state = build_track([0.0, 60.0], [4.84, 5.0], [estimate_with_count(3), estimate_with_count(0)],
                        [2.9, 12.31], [20.0, 21.0])
    fio.write_track_csv(tmp_path / "t.csv", state)
    rows = fio.read_track_csv(tmp_path / "t.csv")
    assert [r["bird_count"] for r in rows] == [3.0, 0.0]
    assert rows[1]["wingbeat_hz"] is None and rows[1]["wing_velocities_mps"] == []
    assert rows[0]["wing_velocities_mps"] == [0.0, 1.0, 2.0]
    doc = fio.track_report_dict(track_summary(state))
    fio.write_json(tmp_path / "r.json", doc)
    assert fio.read_json(tmp_path / "r.json", "track_report") == json.loads(json.dumps(doc))
    with pytest.raises(SchemaVersionError):
        fio.read_json(tmp_path / "r.json", "estimate")


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 300).flatmap(lambda n: arrays(np.float32, 2 * n, elements=st.floats(-1e6, 1e6, width=32))),
       st.integers(0, 2**31 - 1))
def test_iq_round_trip_property(tmp_path_factory, values, seed):
    path = tmp_path_factory.mktemp("iq") / "x.iq"
    x = values[0::2].astype(float) + 1j * values[1::2].astype(float)
    radar = RadarConfig(0.03, x.size / 500.0, 500.0)
    fio.write_iq(path, IqSeries(x, 500.0, Provenance("h", seed)), radar)
    back, _ = fio.read_iq(path)
    np.testing.assert_array_equal(back.samples, x)
    assert back.origin.seed == seed
