import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwm.core_model import BirdKinematics, FlockScenario, RadarConfig, doppler_shift, dwell_micro_doppler
from fwm.echo_synth import (
    ClutterSpec,
    IqSeries,
    add_noise,
    add_sea_clutter,
    default_body_amplitude,
    default_body_amplitudes,
    sea_clutter,
    synthesize_dwell,
    wing_amplitude,
    wing_phase_history,
)
from fwm.errors import InvalidArgumentError, NyquistError
from fwm.fwm_detect import analyze_dwell
from fwm.scenarios import FIG3_PEAK_VELOCITIES, syn_fig3_radar, syn_fig3_scenario
from fwm.spectral import periodogram

from . import oracles

OMEGA_7HZ = 2 * math.pi * 7.0
RADAR = RadarConfig(0.03, 0.02, 8000.0)
# fast enough for the widest bird_strategy draw: 2*20/0.03 + 2*0.8*(2 pi 12)/0.03 ~ 5.4 kHz
WIDE_RADAR = RadarConfig(0.03, 0.02, 16000.0)


def tone(n=4096, fs=8000.0, f=500.0):
    t = np.arange(n) / fs
    return IqSeries(np.exp(2j * np.pi * f * t), fs)


def test_gliding_bird_is_single_tone():
    scenario = FlockScenario((BirdKinematics(0.6, 0.0, 0.7, -11.4),))
    iq = synthesize_dwell(scenario, RadarConfig(0.03, 0.05, 8000.0))
    spectrum = periodogram(iq, wavelength=0.03)
    k = int(np.argmax(spectrum.magnitudes_db))
    assert spectrum.frequency_axis[k] == pytest.approx(760.0, abs=spectrum.resolution)
    analysis = analyze_dwell(iq, 0.03)
    assert len(analysis.peaks) == 1
    assert analysis.peaks.body.velocity == pytest.approx(-11.4, abs=0.05)


def test_syn_fig3_recovers_peak_list():
    radar = syn_fig3_radar()
    iq = synthesize_dwell(syn_fig3_scenario(radar), radar, seed=3)
    analysis = analyze_dwell(iq, radar.wavelength)
    assert analysis.estimate.bird_count == 4
    bin_velocity = radar.wavelength / 2 / radar.dwell_time
    np.testing.assert_allclose(sorted(analysis.peaks.velocities), sorted(FIG3_PEAK_VELOCITIES), atol=bin_velocity)


def test_nyquist_error_names_bird():
    birds = (BirdKinematics(0.1, 1.0), BirdKinematics(0.6, OMEGA_7HZ, 0.0, -11.4))
    with pytest.raises(NyquistError) as info:
        synthesize_dwell(FlockScenario(birds), RadarConfig(0.03, 0.02, 4000.0))
    assert info.value.bird_index == 1
    assert "bird 1" in str(info.value)


def test_output_length_and_series_invariants():
    iq = synthesize_dwell(FlockScenario((BirdKinematics(0.6, OMEGA_7HZ, 0.4),)), RADAR)
    assert len(iq) == 160
    assert iq.duration * iq.sample_rate == pytest.approx(160)
    with pytest.raises(InvalidArgumentError):
        IqSeries(np.array([1.0, np.nan]), 10.0)
    with pytest.raises(InvalidArgumentError):
        IqSeries(np.ones(10), 10.0, duration=2.0)


def test_unknown_wing_model():
    with pytest.raises(InvalidArgumentError):
        synthesize_dwell(FlockScenario((BirdKinematics(0.6, 1.0),)), RADAR, wing_model="rotor")


def test_add_noise_disabled_is_identity():
    iq = tone()
    assert add_noise(iq, math.inf, 0) is iq


def test_add_noise_power_ratio():
    iq = tone(8192)
    noisy = add_noise(iq, 0.0, 11)
    noise = noisy.samples - iq.samples
    ratio_db = 10 * math.log10(oracles.direct_power(iq.samples) / oracles.direct_power(noise))
    assert abs(ratio_db) <= 0.5


def test_add_noise_seeds_differ_but_power_matches():
    iq = tone(8192)
    a = add_noise(iq, 3.0, 1).samples - iq.samples
    b = add_noise(iq, 3.0, 2).samples - iq.samples
    assert not np.allclose(a, b)
    assert abs(10 * math.log10(oracles.direct_power(a) / oracles.direct_power(b))) <= 0.5


def test_add_noise_rejects_empty():
    with pytest.raises(InvalidArgumentError):
        add_noise(IqSeries(np.zeros(0, complex), 10.0), 10.0, 0)


def test_clutter_disabled_is_identity():
    iq = tone()
    assert add_sea_clutter(iq, ClutterSpec(0.0, 0.5, math.inf), RADAR, 0) is iq


def test_clutter_power_ratio():
    iq = tone(4096)
    out = add_sea_clutter(iq, ClutterSpec(0.0, 0.5, 10.0), RADAR, 5)
    clutter = out.samples - iq.samples
    scr = 10 * math.log10(oracles.direct_power(iq.samples) / oracles.direct_power(clutter))
    assert scr == pytest.approx(10.0, abs=0.5)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_clutter_centroid_near_zero(seed):
    n, fs = 160, 8000.0  # one 20 ms dwell
    x = sea_clutter(n, fs, ClutterSpec(0.0, 0.5, 10.0), 0.03, 1.0, seed)
    assert abs(oracles.spectral_centroid(x, fs)) <= fs / n


def test_clutter_spec_validation():
    with pytest.raises(InvalidArgumentError):
        ClutterSpec(0.0, 0.0, 10.0)


def test_default_body_dominates_wings():
    birds = tuple(BirdKinematics(0.6, OMEGA_7HZ, p, -11.4) for p in (-3.0, -1.0, 0.5, 2.9))
    scenario = FlockScenario(birds)
    radar = RadarConfig(0.03, 0.17, 8000.0)
    bodies = default_body_amplitudes(scenario, radar)
    assert bodies.sum() == pytest.approx(default_body_amplitude(birds[0], radar))
    strongest_wing = max(wing_amplitude(b, radar) for b in birds)
    assert 20 * math.log10(bodies.sum() / strongest_wing) >= 10.0


# ---------------------------------------------------------------- properties

bird_strategy = st.builds(
    BirdKinematics,
    wing_length=st.floats(0.05, 0.8),
    flap_rate=st.floats(0.0, 2 * math.pi * 12),
    initial_phase=st.floats(-math.pi, math.pi),
    body_radial_velocity=st.floats(-20.0, 20.0),
)


@settings(max_examples=100, deadline=None)
@given(bird_strategy, st.integers(0, 2**31 - 1), st.sampled_from(["dwell", "phase"]))
def test_deterministic(bird, seed, model):
    scenario = FlockScenario((bird,), noise_snr_db=10.0, clutter_scr_db=5.0)
    a = synthesize_dwell(scenario, WIDE_RADAR, seed, wing_model=model)
    b = synthesize_dwell(scenario, WIDE_RADAR, seed, wing_model=model)
    assert a.samples.tobytes() == b.samples.tobytes()


@settings(max_examples=100, deadline=None)
@given(bird_strategy, bird_strategy, st.floats(0.0, 5.0), st.sampled_from(["dwell", "phase"]))
def test_superposition(b1, b2, body, model):
    both = synthesize_dwell(FlockScenario((b1, b2)), WIDE_RADAR, wing_model=model, body_amplitude=body)
    one = synthesize_dwell(FlockScenario((b1,)), WIDE_RADAR, wing_model=model, body_amplitude=body)
    two = synthesize_dwell(FlockScenario((b2,)), WIDE_RADAR, wing_model=model, body_amplitude=body)
    np.testing.assert_allclose(both.samples, one.samples + two.samples, rtol=1e-12, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 0.8), st.floats(-math.pi, math.pi))
def test_wing_energy_vanishes_with_phase(length, phi0):
    radar = RadarConfig(0.03, 0.17, 8000.0)
    energies = []
    for scale in (1.0, 1e-2, 1e-4):
        bird = BirdKinematics(length, OMEGA_7HZ, phi0 * scale, -11.4)
        body = default_body_amplitude(bird, radar)
        iq = synthesize_dwell(FlockScenario((bird,)), radar)
        t = iq.times
        carrier = np.exp(2j * np.pi * doppler_shift(-11.4, 0.03) * t)
        energies.append(oracles.direct_power(iq.samples - body * carrier))
    assert energies[2] <= energies[0] + 1e-15
    assert energies[2] <= 1e-7 * default_body_amplitude(BirdKinematics(length, OMEGA_7HZ), radar) ** 2


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 0.8), st.floats(0.3, 3.0), st.floats(-15.0, 15.0), st.sampled_from(["dwell", "phase"]))
def test_fading_envelope(length, gait, velocity, model):
    radar = RadarConfig(0.03, 0.17, 8000.0)
    flapping = BirdKinematics(length, OMEGA_7HZ, gait, velocity)
    if model == "dwell" and abs(dwell_micro_doppler(flapping, radar)) < 1.0:
        return  # line on top of the body: no beat within the dwell
    env = np.abs(synthesize_dwell(FlockScenario((flapping,)), radar, wing_model=model).samples)
    assert np.ptp(env) > 1e-3 * env.mean()
    gliding = BirdKinematics(length, 0.0, gait, velocity)
    env = np.abs(synthesize_dwell(FlockScenario((gliding,)), radar, wing_model=model).samples)
    assert np.ptp(env) <= 1e-9 * env.mean()


def test_wing_phase_history_derivative_matches_envelope():
    bird = BirdKinematics(0.6, OMEGA_7HZ, math.pi / 2)
    f = oracles.phase_derivative_hz(lambda t: float(wing_phase_history(bird, 0.03, t)), 0.0)
    assert f == pytest.approx(oracles.INST_MD_PEAK_7HZ_06M, rel=1e-6)
