"""Canonical scenarios and flock builders.

``comb_flock`` inverts the dwell line formula: given the wing-line offsets
wanted around the body line it returns a same-species flock (one wing length,
one flap rate) whose initial phases put each bird's line on its target.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .core_model import (
    TWO_PI,
    BirdKinematics,
    CornerGeometry,
    FlockScenario,
    RadarConfig,
    doppler_shift,
    dwell_micro_doppler,
    wrap_phase,
)
from .errors import ConfigurationError, InvalidArgumentError

FIG2_WAVELENGTH = 0.03
FIG2_DWELL_TIME = 0.02
FIG2_WING_LENGTH = 0.6
FIG2_FLAP_HZ = 7.0

FIG3_BODY_VELOCITY = -11.4
FIG3_PEAK_VELOCITIES = (-12.9, -11.4, -8.4, -6.3, -3.3)

# omega T / 2 = pi + this margin keeps |sin(omega T / 2)| well away from zero
DWELL_PHASE_EXCESS = 0.6


def sim_fig2_radar(sample_rate: float = 80_000.0) -> RadarConfig:
    return RadarConfig(FIG2_WAVELENGTH, FIG2_DWELL_TIME, sample_rate)


def sim_fig2_phases(step_deg: float = 5.0) -> np.ndarray:
    """Initial phases (rad) on the -90..+90 degree grid; 37 values at 5 degrees."""
    count = int(round(180.0 / step_deg)) + 1
    return np.deg2rad(np.linspace(-90.0, 90.0, count))


def sim_fig2_scenario(body_velocity: float = FIG3_BODY_VELOCITY, step_deg: float = 5.0,
                      noise_snr_db: float | None = None) -> FlockScenario:
    birds = tuple(BirdKinematics.from_hz(FIG2_WING_LENGTH, FIG2_FLAP_HZ, float(phi), body_velocity)
                  for phi in sim_fig2_phases(step_deg))
    return FlockScenario(birds, noise_snr_db=noise_snr_db)


def fwm_dwell_time(flap_hz: float, excess: float = DWELL_PHASE_EXCESS) -> float:
    """Dwell time giving omega T / 2 = pi + excess.

    Dwells spanning a whole number of wingbeats collapse every wing line onto
    the body line, so comb scenarios pick the dwell from the flap rate.
    """
    if not flap_hz > 0:
        raise InvalidArgumentError("flap_hz must be > 0")
    return (math.pi + excess) / (math.pi * flap_hz)


def comb_flock(offsets_hz: Sequence[float], flap_hz: float, radar: RadarConfig,
               body_velocity: float, u_max: float = 0.9,
               corner: CornerGeometry | None = None, **scenario_kwargs) -> FlockScenario:
    """Same-species flock whose dwell lines sit at ``offsets_hz`` from the body line.

    The line offset of a bird is C * sin(phi0 + omega T / 2) with
    C = 4 L sin(omega T / 2) / wavelength.  L is chosen so the largest offset
    uses ``u_max`` of C; of the two phase solutions per bird the one with the
    larger gait factor (stronger wing line) is kept.
    """
    offsets = np.asarray(offsets_hz, dtype=float)
    if offsets.size == 0 or np.any(offsets == 0) or not np.all(np.isfinite(offsets)):
        raise InvalidArgumentError("offsets must be finite and non-zero")
    if not 0 < u_max <= 1:
        raise InvalidArgumentError("u_max must lie in (0, 1]")
    omega = TWO_PI * flap_hz
    half = 0.5 * omega * radar.dwell_time
    s = math.sin(half)
    if abs(s) < 1e-3:
        raise ConfigurationError("dwell spans a whole number of wingbeats; all lines collapse")
    wing_length = float(np.max(np.abs(offsets))) * radar.wavelength / (4.0 * abs(s) * u_max)
    scale = 4.0 * wing_length * s / radar.wavelength
    birds = []
    for offset in offsets:
        u = float(np.clip(offset / scale, -1.0, 1.0))
        candidates = (wrap_phase(math.asin(u) - half), wrap_phase(math.pi - math.asin(u) - half))
        phi0 = max(candidates, key=abs)
        birds.append(BirdKinematics(wing_length, omega, phi0, body_velocity,
                                    corner if corner is not None else CornerGeometry()))
    return FlockScenario(tuple(birds), **scenario_kwargs)


def direct_following_flock(n_birds: int, flap_hz: float, radar: RadarConfig, body_velocity: float,
                           **scenario_kwargs) -> FlockScenario:
    """Direct-following flock with the rotor-like comb: equal spacing n^2 * flap_hz.

    The body line is the top of the comb and the n wing lines sit below it at
    multiples of the spacing.  Spatial phase is zero for every bird, so each
    bird's streamwise offset (in flight wavelengths) is phi0 / 2 pi; see
    :func:`streamwise_offsets`.
    """
    if n_birds < 1:
        raise InvalidArgumentError("n_birds must be >= 1")
    spacing = n_birds * n_birds * flap_hz
    offsets = -spacing * np.arange(1, n_birds + 1)
    return comb_flock(offsets, flap_hz, radar, body_velocity, **scenario_kwargs)


def streamwise_offsets(scenario: FlockScenario, spatial_phase: float = 0.0) -> np.ndarray:
    """Streamwise position of each bird in flight wavelengths, (phi0 - phi_s) / 2 pi."""
    return np.array([(b.initial_phase - spatial_phase) / TWO_PI for b in scenario.birds])


def line_offsets(scenario: FlockScenario, radar: RadarConfig) -> np.ndarray:
    """Dwell line offset (Hz) of every bird relative to its body line."""
    return np.array([dwell_micro_doppler(b, radar) for b in scenario.birds])


def line_frequencies(scenario: FlockScenario, radar: RadarConfig) -> np.ndarray:
    """Absolute dwell line frequency (Hz) of every bird's wing."""
    return np.array([doppler_shift(b.body_radial_velocity, radar.wavelength) + dwell_micro_doppler(b, radar)
                     for b in scenario.birds])


def random_phase_flock(n_birds: int, rng: np.random.Generator, flap_hz: float, wing_length: float,
                       radar: RadarConfig, body_velocity: float, min_separation_hz: float,
                       min_gait: float = 0.0, max_tries: int = 10_000, **scenario_kwargs) -> FlockScenario:
    """Random initial phases, redrawn until all lines (body included) are
    ``min_separation_hz`` apart and every |phi0| >= ``min_gait``."""
    for _ in range(max_tries):
        gaits = rng.uniform(min_gait, math.pi, n_birds)
        phases = gaits * rng.choice((-1.0, 1.0), n_birds)
        birds = tuple(BirdKinematics(wing_length, TWO_PI * flap_hz, float(p), body_velocity) for p in phases)
        lines = np.sort(np.append([dwell_micro_doppler(b, radar) for b in birds], 0.0))
        if np.min(np.diff(lines)) >= min_separation_hz:
            return FlockScenario(birds, **scenario_kwargs)
    raise ConfigurationError(f"no {n_birds}-bird phase draw met the separation after {max_tries} tries")


def syn_fig3_radar(sample_rate: float = 80_000.0) -> RadarConfig:
    return RadarConfig(FIG2_WAVELENGTH, fwm_dwell_time(FIG2_FLAP_HZ), sample_rate)


def syn_fig3_scenario(radar: RadarConfig | None = None, noise_snr_db: float | None = 20.0,
                      clutter_scr_db: float | None = 10.0,
                      clutter_spread_velocity: float = 0.25) -> FlockScenario:
    """Four birds whose peaks reproduce the published spectrum peak list."""
    radar = radar if radar is not None else syn_fig3_radar()
    wings = [v for v in FIG3_PEAK_VELOCITIES if v != FIG3_BODY_VELOCITY]
    offsets = [doppler_shift(v, radar.wavelength) - doppler_shift(FIG3_BODY_VELOCITY, radar.wavelength)
               for v in wings]
    return comb_flock(offsets, FIG2_FLAP_HZ, radar, FIG3_BODY_VELOCITY,
                      noise_snr_db=noise_snr_db, clutter_scr_db=clutter_scr_db,
                      clutter_spread_velocity=clutter_spread_velocity)


def direct_following_trial(n_birds: int, flap_hz: float, noise_snr_db: float | None = 20.0,
                           wavelength: float = FIG2_WAVELENGTH,
                           clearance_hz: float = 200.0) -> tuple[FlockScenario, RadarConfig]:
    """Direct-following flock plus a radar sized for it.

    The dwell comes from :func:`fwm_dwell_time`, the body Doppler sits one
    spacing plus ``clearance_hz`` above the lowest wing line's distance from
    0 Hz so the comb clears the clutter zone, and the sample rate leaves a
    10 % margin over the Nyquist requirement.
    """
    dwell = fwm_dwell_time(flap_hz)
    spacing = n_birds * n_birds * flap_hz
    body_hz = (n_birds + 1) * spacing + clearance_hz
    body_velocity = -body_hz * wavelength / 2.0
    probe = RadarConfig(wavelength, dwell, 1.0)
    flock = direct_following_flock(n_birds, flap_hz, probe, body_velocity)
    envelope = 2.0 * flock.birds[0].wing_length * flock.birds[0].flap_rate / wavelength
    sample_rate = 1000.0 * math.ceil(2.2 * (body_hz + envelope) / 1000.0)
    radar = RadarConfig(wavelength, dwell, sample_rate)
    return direct_following_flock(n_birds, flap_hz, radar, body_velocity, noise_snr_db=noise_snr_db), radar
