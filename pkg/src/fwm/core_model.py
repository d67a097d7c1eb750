"""Closed-form wing micro-Doppler, corner-reflector RCS and flap-phasing model.

Flap rates are carried in radians/second internally; every constructor that
takes a rate in Hz says so in its name (``from_hz``, ``flap_hz``).  The
Doppler sign convention is f = -2 v / wavelength throughout, so a bird
approaching the radar (negative radial velocity) sits at positive frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError

TWO_PI = 2.0 * math.pi


def _finite(name: str, value) -> None:
    if not np.all(np.isfinite(value)):
        raise InvalidArgumentError(f"{name} must be finite, got {value!r}")


def _positive(name: str, value: float) -> None:
    _finite(name, value)
    if not value > 0:
        raise InvalidArgumentError(f"{name} must be > 0, got {value!r}")


def wrap_phase(phase):
    """Map a phase (scalar or array) onto [-pi, pi)."""
    wrapped = np.mod(np.asarray(phase, dtype=float) + math.pi, TWO_PI) - math.pi
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class RadarConfig:
    """Sensing parameters for one coherent dwell.

    Attributes:
        wavelength: carrier wavelength in meters.
        dwell_time: coherent integration time in seconds.
        sample_rate: complex baseband sample rate in Hz.
        range_resolution: meters, informational.
        velocity_resolution: meters/second, informational.
    """

    wavelength: float
    dwell_time: float
    sample_rate: float = 80_000.0
    range_resolution: float = 12.0
    velocity_resolution: float = 0.3

    def __post_init__(self):
        _positive("wavelength", self.wavelength)
        _positive("dwell_time", self.dwell_time)
        _positive("sample_rate", self.sample_rate)
        _positive("range_resolution", self.range_resolution)
        _positive("velocity_resolution", self.velocity_resolution)

    @property
    def n_samples(self) -> int:
        return int(round(self.dwell_time * self.sample_rate))


@dataclass(frozen=True)
class CornerGeometry:
    """Face dimensions (meters) of the wing-beat corner reflector."""

    face_length: float = 0.1
    face_width: float = 0.1

    def __post_init__(self):
        _positive("face_length", self.face_length)
        _positive("face_width", self.face_width)


@dataclass(frozen=True)
class BirdKinematics:
    """One flapping bird.

    ``flap_rate`` is in radians/second; use :meth:`from_hz` when starting from
    a wingbeat frequency.  ``initial_phase`` is normalized onto [-pi, pi).
    """

    wing_length: float
    flap_rate: float
    initial_phase: float = 0.0
    body_radial_velocity: float = 0.0
    corner: CornerGeometry = field(default_factory=CornerGeometry)

    def __post_init__(self):
        _positive("wing_length", self.wing_length)
        _finite("flap_rate", self.flap_rate)
        if self.flap_rate < 0:
            raise InvalidArgumentError(f"flap_rate must be >= 0, got {self.flap_rate!r}")
        _finite("initial_phase", self.initial_phase)
        _finite("body_radial_velocity", self.body_radial_velocity)
        object.__setattr__(self, "initial_phase", wrap_phase(self.initial_phase))

    @classmethod
    def from_hz(cls, wing_length: float, flap_hz: float, initial_phase: float = 0.0,
                body_radial_velocity: float = 0.0,
                corner: CornerGeometry | None = None) -> "BirdKinematics":
        return cls(wing_length, TWO_PI * flap_hz, initial_phase, body_radial_velocity,
                   corner if corner is not None else CornerGeometry())

    @property
    def flap_hz(self) -> float:
        return self.flap_rate / TWO_PI


@dataclass(frozen=True)
class FlockScenario:
    """Birds sharing one range bin plus the disturbance environment.

    ``noise_snr_db`` / ``clutter_scr_db`` of ``None`` disable noise / clutter.
    ``flight_wavelength`` is the streamwise spacing between consecutive birds
    measured in flight wavelengths; it only matters to the phasing helpers.
    """

    birds: tuple[BirdKinematics, ...]
    flight_wavelength: float = 0.0
    noise_snr_db: float | None = None
    clutter_scr_db: float | None = None
    clutter_spread_velocity: float = 0.5
    clutter_center_velocity: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "birds", tuple(self.birds))
        if len(self.birds) < 1:
            raise InvalidArgumentError("a flock needs at least one bird")
        _finite("flight_wavelength", self.flight_wavelength)
        _finite("clutter_center_velocity", self.clutter_center_velocity)
        if self.noise_snr_db is not None and math.isnan(self.noise_snr_db):
            raise InvalidArgumentError("noise_snr_db must not be NaN")
        if self.clutter_scr_db is not None:
            if math.isnan(self.clutter_scr_db):
                raise InvalidArgumentError("clutter_scr_db must not be NaN")
            _positive("clutter_spread_velocity", self.clutter_spread_velocity)

    @property
    def n_birds(self) -> int:
        return len(self.birds)


@dataclass(frozen=True)
class PhaseAngle:
    """Temporal and spatial flap phase of one bird relative to the leader."""

    temporal_phase: float
    spatial_phase: float

    @classmethod
    def from_temporal(cls, temporal_phase: float, flight_wavelength: float) -> "PhaseAngle":
        return cls(temporal_phase, spatial_phase(temporal_phase, flight_wavelength))


def wingtip_velocity(flap_rate: float, wing_length: float, phase: float) -> float:
    """Wingtip micro-Doppler velocity omega * L * cos(phase), in m/s."""
    _finite("flap_rate", flap_rate)
    _finite("phase", phase)
    _positive("wing_length", wing_length)
    return flap_rate * wing_length * math.cos(phase)


def _scalar_or_array(value):
    if np.ndim(value) == 0:
        return float(value)
    return value


def doppler_shift(radial_velocity, wavelength: float):
    """Doppler frequency (Hz) of a radial velocity: -2 v / wavelength."""
    _finite("radial_velocity", radial_velocity)
    _positive("wavelength", wavelength)
    return _scalar_or_array(-2.0 * np.asarray(radial_velocity, dtype=float) / wavelength)


def doppler_velocity(frequency, wavelength: float):
    """Inverse of :func:`doppler_shift`: v = -f * wavelength / 2."""
    _positive("wavelength", wavelength)
    return _scalar_or_array(-np.asarray(frequency, dtype=float) * wavelength / 2.0)


def instantaneous_micro_doppler(bird: BirdKinematics, wavelength: float, t):
    """Wing micro-Doppler frequency at time ``t`` (scalar or array), in Hz.

    (-2 L omega / wavelength) * sin(omega t + phi0).
    """
    _positive("wavelength", wavelength)
    _finite("t", t)
    omega = bird.flap_rate
    peak = -2.0 * bird.wing_length * omega / wavelength
    return _scalar_or_array(peak * np.sin(omega * np.asarray(t, dtype=float) + bird.initial_phase))


def micro_doppler_envelope(bird: BirdKinematics, wavelength: float) -> float:
    """Peak instantaneous micro-Doppler magnitude 2 L omega / wavelength."""
    return 2.0 * bird.wing_length * bird.flap_rate / wavelength


def dwell_micro_doppler(bird: BirdKinematics, radar: RadarConfig) -> float:
    """Dwell-integrated wing line frequency (Hz) for one bird.

    (-2 L / wavelength) * [cos(omega T + phi0) - cos(phi0)], the definite form
    of the dwell integral; the integration constant cancels between limits.
    A gliding bird (omega = 0) gives exactly 0.
    """
    if bird.flap_rate == 0.0:
        return 0.0
    phi0 = bird.initial_phase
    bracket = math.cos(bird.flap_rate * radar.dwell_time + phi0) - math.cos(phi0)
    return -2.0 * bird.wing_length / radar.wavelength * bracket


def dwell_micro_doppler_bound(bird: BirdKinematics, radar: RadarConfig) -> float:
    """Largest |dwell_micro_doppler| over all initial phases for this bird.

    The bracket equals -2 sin(omega T / 2) sin(omega T / 2 + phi0), so the
    bound is 4 L |sin(omega T / 2)| / wavelength <= 4 L / wavelength.
    """
    half = 0.5 * bird.flap_rate * radar.dwell_time
    return 4.0 * bird.wing_length * abs(math.sin(half)) / radar.wavelength


def gait_factor(initial_phase: float) -> float:
    """Scalar gait factor used for the corner-reflector RCS: |phi0| clamped to [0, pi]."""
    _finite("initial_phase", initial_phase)
    return min(abs(wrap_phase(initial_phase)), math.pi)


def wcr_rcs(corner: CornerGeometry, gait_angle: float, wavelength: float) -> float:
    """Wing-beat corner reflector RCS in m^2: 8 pi a^2 b^2 gait / wavelength^2."""
    _finite("gait_angle", gait_angle)
    if gait_angle < 0:
        raise InvalidArgumentError(f"gait_angle must be >= 0, got {gait_angle!r}")
    _positive("wavelength", wavelength)
    a, b = corner.face_length, corner.face_width
    return 8.0 * math.pi * a * a * b * b * gait_angle / (wavelength * wavelength)


def dwell_carrier_gain(dwell_time: float) -> float:
    """|int_0^T exp(-j 2 pi t) dt| = |sin(pi T)| / pi; zero for whole-second dwells."""
    return abs(math.sin(math.pi * dwell_time)) / math.pi


def fwm_amplitude(bird: BirdKinematics, radar: RadarConfig) -> float:
    """Magnitude of the dwell Fourier integral of the bird's corner RCS.

    The gait factor is taken as |phi0| (held constant over the dwell), so the
    result is wcr_rcs * |sin(pi T)| / pi: linear in |phi0| for fixed geometry.
    """
    sigma = wcr_rcs(bird.corner, gait_factor(bird.initial_phase), radar.wavelength)
    return sigma * dwell_carrier_gain(radar.dwell_time)


def spatial_phase(temporal_phase: float, flight_wavelength: float) -> float:
    """Spatial flap phase phi_t - 2 pi lambda_f (radians)."""
    _finite("temporal_phase", temporal_phase)
    _finite("flight_wavelength", flight_wavelength)
    return temporal_phase - TWO_PI * flight_wavelength


def temporal_phase(spatial: float, flight_wavelength: float) -> float:
    """Inverse of :func:`spatial_phase`."""
    _finite("spatial", spatial)
    _finite("flight_wavelength", flight_wavelength)
    return spatial + TWO_PI * flight_wavelength


def formation_phases(n_birds: int, flight_wavelength: float,
                     spatial_phases: float | Sequence[float] = 0.0,
                     leader_phase: float = 0.0) -> np.ndarray:
    """Initial flap phases for a single-file formation.

    Bird k trails the leader by k * flight_wavelength flight wavelengths; its
    temporal phase follows from the chosen spatial phase.  ``spatial_phases``
    of zero is the direct-following formation with matching wingtip paths.
    """
    if n_birds < 1:
        raise InvalidArgumentError("n_birds must be >= 1")
    spatial = np.broadcast_to(np.asarray(spatial_phases, dtype=float), (n_birds,))
    phases = [leader_phase + temporal_phase(float(spatial[k]), k * flight_wavelength)
              for k in range(n_birds)]
    return wrap_phase(np.array(phases))
