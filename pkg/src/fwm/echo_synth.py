"""Complex baseband dwell synthesis for flapping-bird flocks.

Each bird contributes a body line at its body Doppler plus a wing component
riding on the same carrier.  Two wing models are available:

``"dwell"``
    the wing return is a constant line offset from the body by
    :func:`~fwm.core_model.dwell_micro_doppler`, amplitude from
    :func:`~fwm.core_model.fwm_amplitude`.  This is the model whose dwell
    spectrum shows one FWM peak per bird and is the default for dwell analysis.
``"phase"``
    the wing return is phase modulated by :func:`wing_phase_history`, whose
    time derivative is the instantaneous micro-Doppler.  Its STFT shows the
    sinusoidal ridge; over a short dwell its spectrum is a chirp centred on
    the dwell-mean wing Doppler rather than a line.  Amplitude is the
    corner-reflector RCS itself.
"""

from __future__ import annotations

from collections import Counter
import dataclasses
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core_model import (
    BirdKinematics,
    FlockScenario,
    RadarConfig,
    doppler_shift,
    dwell_micro_doppler,
    fwm_amplitude,
    gait_factor,
    micro_doppler_envelope,
    wcr_rcs,
    dwell_carrier_gain,
)
from .errors import InvalidArgumentError, NyquistError

logger = logging.getLogger(__name__)

WING_MODELS = ("dwell", "phase")
BODY_MARGIN_DB = 10.0

# independent RNG streams per seed
_NOISE_STREAM = 1
_CLUTTER_STREAM = 2


@dataclass(frozen=True)
class Provenance:
    scenario_hash: str = ""
    seed: int | None = None
    stages: tuple[str, ...] = ()

    def with_stage(self, stage: str) -> "Provenance":
        return dataclasses.replace(self, stages=self.stages + (stage,))


@dataclass(frozen=True, eq=False)
class IqSeries:
    """One dwell of complex baseband samples from one range bin."""

    samples: np.ndarray
    sample_rate: float
    origin: Provenance = field(default_factory=Provenance)
    duration: float | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.ndim != 1:
            raise InvalidArgumentError("samples must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise InvalidArgumentError("samples must be finite")
        if not (math.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise InvalidArgumentError(f"sample_rate must be > 0, got {self.sample_rate!r}")
        object.__setattr__(self, "samples", samples)
        duration = self.duration if self.duration is not None else samples.size / self.sample_rate
        if abs(duration * self.sample_rate - samples.size) > 1.0:
            raise InvalidArgumentError(
                f"duration {duration} s does not match {samples.size} samples at {self.sample_rate} Hz")
        object.__setattr__(self, "duration", float(duration))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def power(self) -> float:
        """Mean sample power."""
        if self.samples.size == 0:
            return 0.0
        return float(np.mean(np.abs(self.samples) ** 2))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate

    def replace(self, samples: np.ndarray, stage: str) -> "IqSeries":
        return IqSeries(samples, self.sample_rate, self.origin.with_stage(stage), self.duration)


@dataclass(frozen=True)
class ClutterSpec:
    """Gaussian-spectrum sea clutter, velocities in m/s."""

    center_velocity: float = 0.0
    spread_velocity: float = 0.5
    scr_db: float = 10.0

    def __post_init__(self):
        if not (math.isfinite(self.spread_velocity) and self.spread_velocity > 0):
            raise InvalidArgumentError(f"spread_velocity must be > 0, got {self.spread_velocity!r}")
        if not math.isfinite(self.center_velocity):
            raise InvalidArgumentError("center_velocity must be finite")
        if math.isnan(self.scr_db):
            raise InvalidArgumentError("scr_db must not be NaN")


def scenario_hash(scenario: FlockScenario, radar: RadarConfig) -> str:
    """Short stable digest of a scenario/radar pair."""
    payload = json.dumps({"scenario": dataclasses.asdict(scenario),
                          "radar": dataclasses.asdict(radar)},
                         sort_keys=True, default=repr)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def wing_phase_history(bird: BirdKinematics, wavelength: float, t) -> np.ndarray:
    """Wing carrier phase (rad) of the phase model: (4 pi L / wavelength) cos(omega t + phi0).

    Its derivative divided by 2 pi is the instantaneous micro-Doppler.
    """
    t = np.asarray(t, dtype=float)
    return (4.0 * math.pi * bird.wing_length / wavelength) * np.cos(bird.flap_rate * t + bird.initial_phase)


def _check_model(wing_model: str) -> None:
    if wing_model not in WING_MODELS:
        raise InvalidArgumentError(f"wing_model must be one of {WING_MODELS}, got {wing_model!r}")


def wing_amplitude(bird: BirdKinematics, radar: RadarConfig, wing_model: str = "dwell") -> float:
    _check_model(wing_model)
    if wing_model == "dwell":
        return fwm_amplitude(bird, radar)
    return wcr_rcs(bird.corner, gait_factor(bird.initial_phase), radar.wavelength)


def default_body_amplitude(bird: BirdKinematics, radar: RadarConfig, wing_model: str = "dwell") -> float:
    """Body amplitude BODY_MARGIN_DB above the strongest wing line this bird can produce.

    The reference is the wing amplitude at the largest gait factor (pi), so
    the body line always dominates and does not depend on the flap phase.
    """
    _check_model(wing_model)
    strongest = wcr_rcs(bird.corner, math.pi, radar.wavelength)
    if wing_model == "dwell":
        strongest *= dwell_carrier_gain(radar.dwell_time)
        if strongest == 0.0:
            # dwell of a whole number of seconds nulls the carrier integral
            strongest = wcr_rcs(bird.corner, math.pi, radar.wavelength) * radar.dwell_time
    return strongest * 10.0 ** (BODY_MARGIN_DB / 20.0)


def default_body_amplitudes(scenario: FlockScenario, radar: RadarConfig, wing_model: str = "dwell") -> np.ndarray:
    """Per-bird body amplitudes putting each body line BODY_MARGIN_DB above the
    strongest wing line any bird of the flock can produce.

    Birds sharing a body velocity add coherently into one line, so each one
    carries 1/k of it (k = birds at that velocity).  With a single bird this
    equals :func:`default_body_amplitude`.
    """
    strongest = max(default_body_amplitude(b, radar, wing_model) for b in scenario.birds)
    shares = Counter(b.body_radial_velocity for b in scenario.birds)
    return np.array([strongest / shares[b.body_radial_velocity] for b in scenario.birds])


def check_nyquist(scenario: FlockScenario, radar: RadarConfig) -> None:
    """Raise NyquistError for the first bird whose Doppler extent aliases."""
    half_band = radar.sample_rate / 2.0
    for index, bird in enumerate(scenario.birds):
        extent = abs(doppler_shift(bird.body_radial_velocity, radar.wavelength)) \
            + micro_doppler_envelope(bird, radar.wavelength)
        if not extent < half_band:
            raise NyquistError(index, extent, radar.sample_rate)


def bird_echo(bird: BirdKinematics, radar: RadarConfig, t: np.ndarray, wing_model: str = "dwell",
              body_amplitude: float | None = None) -> np.ndarray:
    """Noise-free echo of a single bird sampled at times ``t``."""
    _check_model(wing_model)
    if body_amplitude is None:
        body_amplitude = default_body_amplitude(bird, radar, wing_model)
    carrier = np.exp(2j * math.pi * doppler_shift(bird.body_radial_velocity, radar.wavelength) * t)
    amp = wing_amplitude(bird, radar, wing_model)
    if wing_model == "dwell":
        wing = np.exp(2j * math.pi * dwell_micro_doppler(bird, radar) * t)
    else:
        wing = np.exp(1j * wing_phase_history(bird, radar.wavelength, t))
    return carrier * (body_amplitude + amp * wing)


def synthesize_dwell(scenario: FlockScenario, radar: RadarConfig, seed: int = 0, *,
                     wing_model: str = "dwell", body_amplitude: float | None = None) -> IqSeries:
    """Synthesize one dwell of ``radar.n_samples`` samples for a flock.

    Noise and clutter are added when the scenario enables them; both are
    referenced to the noise-free flock power.  Deterministic in
    (scenario, radar, seed, wing_model, body_amplitude).

    Raises:
        NyquistError: some bird's |body Doppler| + micro-Doppler envelope is
            not below half the sample rate.
    """
    _check_model(wing_model)
    check_nyquist(scenario, radar)
    n = radar.n_samples
    if n < 1:
        raise InvalidArgumentError("dwell_time * sample_rate rounds to zero samples")
    t = np.arange(n) / radar.sample_rate
    if body_amplitude is None:
        bodies = default_body_amplitudes(scenario, radar, wing_model)
    else:
        bodies = np.full(scenario.n_birds, float(body_amplitude))
    clean = np.zeros(n, dtype=np.complex128)
    for bird, body in zip(scenario.birds, bodies):
        clean += bird_echo(bird, radar, t, wing_model, float(body))

    origin = Provenance(scenario_hash(scenario, radar), seed, (f"synth:{wing_model}",))
    ref_power = float(np.mean(np.abs(clean) ** 2))
    out = clean
    if scenario.clutter_scr_db is not None and scenario.clutter_scr_db != math.inf:
        spec = ClutterSpec(scenario.clutter_center_velocity, scenario.clutter_spread_velocity,
                           scenario.clutter_scr_db)
        out = out + sea_clutter(n, radar.sample_rate, spec, radar.wavelength,
                                ref_power / 10.0 ** (spec.scr_db / 10.0), seed)
        origin = origin.with_stage("clutter")
    if scenario.noise_snr_db is not None and scenario.noise_snr_db != math.inf:
        out = out + white_noise(n, ref_power / 10.0 ** (scenario.noise_snr_db / 10.0), seed)
        origin = origin.with_stage("noise")
    logger.debug("synthesized %d birds, %d samples, model=%s", scenario.n_birds, n, wing_model)
    return IqSeries(out, radar.sample_rate, origin)


def white_noise(n: int, power: float, seed: int) -> np.ndarray:
    """Circularly-symmetric complex white Gaussian noise of expected power ``power``."""
    rng = np.random.default_rng([seed, _NOISE_STREAM])
    scale = math.sqrt(power / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def add_noise(iq: IqSeries, snr_db: float, seed: int) -> IqSeries:
    """Add white noise so that signal power / expected noise power is ``snr_db``.

    ``snr_db = math.inf`` disables noise and returns the input unchanged.
    """
    if len(iq) == 0:
        raise InvalidArgumentError("cannot add noise to an empty series")
    if snr_db == math.inf:
        return iq
    if math.isnan(snr_db):
        raise InvalidArgumentError("snr_db must not be NaN")
    noise = white_noise(len(iq), iq.power / 10.0 ** (snr_db / 10.0), seed)
    return iq.replace(iq.samples + noise, f"noise:{snr_db:g}dB")


def sea_clutter(n: int, sample_rate: float, clutter: ClutterSpec, wavelength: float,
                power: float, seed: int) -> np.ndarray:
    """Gaussian-spectrum clutter process with sample power exactly ``power``.

    White noise is shaped in the frequency domain by a Gaussian centred at
    the Doppler of ``center_velocity`` with standard deviation
    2 * spread_velocity / wavelength.  The result is rescaled to its realized
    power because a narrowband process over one dwell has few degrees of
    freedom.
    """
    if n < 1 or power <= 0:
        return np.zeros(max(n, 0), dtype=np.complex128)
    rng = np.random.default_rng([seed, _CLUTTER_STREAM])
    white = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)
    freqs = np.fft.fftfreq(n, 1.0 / sample_rate)
    center = doppler_shift(clutter.center_velocity, wavelength)
    sigma = 2.0 * clutter.spread_velocity / wavelength
    # circular distance keeps the shape intact near +-fs/2
    offset = np.mod(freqs - center + sample_rate / 2.0, sample_rate) - sample_rate / 2.0
    shape = np.exp(-0.25 * (offset / sigma) ** 2)  # amplitude: sqrt of a Gaussian PSD
    if shape.max() < 1e-12:
        shape = np.zeros(n)
        shape[np.argmin(np.abs(offset))] = 1.0
    process = np.fft.ifft(np.fft.fft(white) * shape)
    realized = float(np.mean(np.abs(process) ** 2))
    if realized == 0.0:
        return np.zeros(n, dtype=np.complex128)
    return process * math.sqrt(power / realized)


def add_sea_clutter(iq: IqSeries, clutter: ClutterSpec, radar: RadarConfig, seed: int) -> IqSeries:
    """Add sea clutter at ``clutter.scr_db`` below the series' own power.

    ``scr_db = math.inf`` (no clutter power) returns the input unchanged.
    """
    if clutter.scr_db == math.inf:
        return iq
    samples = sea_clutter(len(iq), iq.sample_rate, clutter, radar.wavelength,
                          iq.power / 10.0 ** (clutter.scr_db / 10.0), seed)
    return iq.replace(iq.samples + samples, f"clutter:{clutter.scr_db:g}dB")
