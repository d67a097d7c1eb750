"""Track accumulation of per-dwell FWM estimates and the track-level summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyTrackError, InvalidArgumentError, TrackOrderError
from .fwm_detect import DetectionParams, FwmEstimate, PeakSet
from .spectral import DopplerSpectrum


@dataclass(frozen=True)
class TrackUpdate:
    """One track update; a radar may collect several dwells per update."""

    time: float
    range_km: float
    estimates: tuple[FwmEstimate, ...]
    snr_db: float
    scr_db: float

    @property
    def bird_count(self) -> float:
        """Mean per-dwell bird count of this update."""
        return float(np.mean([e.bird_count for e in self.estimates]))

    @property
    def wingbeat_hz(self) -> float | None:
        rates = [e.wingbeat_hz for e in self.estimates if e.wingbeat_hz is not None]
        return float(np.mean(rates)) if rates else None

    @property
    def wing_velocities(self) -> tuple[float, ...]:
        return tuple(v for e in self.estimates for v in e.wing_velocities)


@dataclass(frozen=True)
class TrackState:
    updates: tuple[TrackUpdate, ...] = ()
    update_interval: float = 60.0

    def __post_init__(self):
        if not (math.isfinite(self.update_interval) and self.update_interval > 0):
            raise InvalidArgumentError("update_interval must be > 0")

    def __len__(self) -> int:
        return len(self.updates)


@dataclass(frozen=True)
class TrackReport:
    mean_bird_count: float
    bird_count_ceiling: int
    mean_wingbeat_hz: float | None
    snr_range_db: tuple[float, float]
    scr_range_db: tuple[float, float]
    snr_fluctuation_db: float
    scr_fluctuation_db: float
    wing_velocity_traces: tuple[tuple[float, ...], ...]
    n_updates: int


def track_update(state: TrackState, time: float, range_km: float,
                 estimate: FwmEstimate | Sequence[FwmEstimate], snr_db: float, scr_db: float) -> TrackState:
    """Return a new state with one more update appended.

    ``estimate`` may be a single dwell estimate or all dwells of the update.

    Raises:
        TrackOrderError: ``time`` does not exceed the last update time.
    """
    estimates = (estimate,) if isinstance(estimate, FwmEstimate) else tuple(estimate)
    if not estimates:
        raise InvalidArgumentError("an update needs at least one dwell estimate")
    for name, value in (("time", time), ("range_km", range_km), ("snr_db", snr_db), ("scr_db", scr_db)):
        if not math.isfinite(value):
            raise InvalidArgumentError(f"{name} must be finite, got {value!r}")
    if state.updates and not time > state.updates[-1].time:
        raise TrackOrderError(f"update at t={time} s does not follow t={state.updates[-1].time} s")
    update = TrackUpdate(float(time), float(range_km), estimates, float(snr_db), float(scr_db))
    return TrackState(state.updates + (update,), state.update_interval)


def _ceiling(value: float) -> int:
    # 4.000000000001 from float sums must not round up to 5
    return int(math.ceil(round(value, 9)))


def track_summary(state: TrackState) -> TrackReport:
    """Arithmetic means over updates, min/max ranges, and the ceiling bird count."""
    if not state.updates:
        raise EmptyTrackError("track has no updates")
    counts = [u.bird_count for u in state.updates]
    rates = [u.wingbeat_hz for u in state.updates if u.wingbeat_hz is not None]
    snr = [u.snr_db for u in state.updates]
    scr = [u.scr_db for u in state.updates]
    mean_count = float(np.mean(counts))
    return TrackReport(
        mean_bird_count=mean_count,
        bird_count_ceiling=_ceiling(mean_count),
        mean_wingbeat_hz=float(np.mean(rates)) if rates else None,
        snr_range_db=(min(snr), max(snr)),
        scr_range_db=(min(scr), max(scr)),
        snr_fluctuation_db=max(snr) - min(snr),
        scr_fluctuation_db=max(scr) - min(scr),
        wing_velocity_traces=tuple(u.wing_velocities for u in state.updates),
        n_updates=len(state.updates),
    )


def build_track(times: Iterable[float], ranges_km: Iterable[float], estimates: Iterable,
                snr_db: Iterable[float], scr_db: Iterable[float], update_interval: float = 60.0) -> TrackState:
    state = TrackState(update_interval=update_interval)
    for t, r, e, s, c in zip(times, ranges_km, estimates, snr_db, scr_db):
        state = track_update(state, t, r, e, s, c)
    return state


def _guard_bins(spectrum: DopplerSpectrum, mainlobe_bins: float = 4.0) -> int:
    # bins of the (zero-padded) spectrum covered by mainlobe_bins raw resolution cells
    return int(math.ceil(mainlobe_bins * spectrum.fft_length / spectrum.n_samples))


def measure_snr_scr(spectrum: DopplerSpectrum, peaks: PeakSet,
                    params: DetectionParams | None = None) -> tuple[float, float]:
    """SNR and SCR (dB) of the body line in a dwell spectrum.

    SNR is the body-line bin power over the mean power of the noise floor,
    taken as every bin outside the clutter zone and away from detected peaks.
    SCR is the body-line bin power over the mean power inside the clutter zone.
    """
    params = params if params is not None else peaks.detection_params
    if spectrum.velocity_axis is None:
        raise InvalidArgumentError("spectrum has no velocity axis")
    power = spectrum.power
    in_clutter = np.abs(spectrum.velocity_axis) < params.clutter_exclusion_velocity
    floor = ~in_clutter
    guard = _guard_bins(spectrum)
    for p in peaks.peaks:
        k = spectrum.bin_of(p.frequency)
        floor[max(0, k - guard):k + guard + 1] = False
    body = 10.0 ** (peaks.body.magnitude_db / 10.0)

    def ratio(mask: np.ndarray) -> float:
        if not mask.any():
            return math.inf
        level = float(np.mean(power[mask]))
        return math.inf if level == 0.0 else 10.0 * math.log10(body / level)

    return ratio(floor), ratio(in_clutter)


@dataclass(frozen=True)
class TrackConfig:
    """Cadence and range profile of a synthetic track.

    Signal power follows R^-4 relative to ``reference_range_km`` plus a
    per-update RCS fluctuation drawn uniformly over a ``rcs_fluctuation_db``
    swing.  Clutter shares the signal's range attenuation (same range cell),
    noise does not, so SCR stays steadier than SNR.
    """

    duration: float = 300.0
    update_interval: float = 60.0
    range_start_km: float = 4.84
    range_end_km: float = 8.75
    dwells_per_update: int = 1
    reference_snr_db: float = 20.0
    reference_range_km: float | None = None
    scr_db: float = 10.0
    rcs_fluctuation_db: float = 0.0

    def __post_init__(self):
        for name in ("duration", "update_interval", "range_start_km", "range_end_km"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidArgumentError(f"{name} must be finite and > 0, got {value!r}")
        if self.dwells_per_update < 1:
            raise InvalidArgumentError("dwells_per_update must be >= 1")
        if not (math.isfinite(self.rcs_fluctuation_db) and self.rcs_fluctuation_db >= 0):
            raise InvalidArgumentError("rcs_fluctuation_db must be finite and >= 0")
        if self.n_updates < 1:
            raise InvalidArgumentError("duration shorter than one update interval")

    @property
    def n_updates(self) -> int:
        return int(math.floor(self.duration / self.update_interval + 1e-9))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_updates) * self.update_interval

    @property
    def ranges_km(self) -> np.ndarray:
        if self.n_updates == 1:
            return np.array([self.range_start_km])
        return np.linspace(self.range_start_km, self.range_end_km, self.n_updates)

    def range_gain_db(self) -> np.ndarray:
        ref = self.reference_range_km if self.reference_range_km is not None else self.range_start_km
        return -40.0 * np.log10(self.ranges_km / ref)


_FLUCTUATION_STREAM = 3


def simulate_track(scenario, radar, config: TrackConfig, seed: int = 0,
                   params: DetectionParams | None = None) -> TrackState:
    """Synthesize and analyse every dwell of a track.

    Each update scales the flock echo by its range gain and RCS draw, adds
    clutter at ``config.scr_db`` below the scaled echo and noise at
    ``config.reference_snr_db`` below the unscaled echo, then runs the dwell
    pipeline.  SNR/SCR are measured from the spectra, not taken from the
    configuration.
    """
    # imported here: the tracker itself only needs estimates
    from .echo_synth import ClutterSpec, sea_clutter, synthesize_dwell, white_noise
    from .fwm_detect import detect_fwm_peaks, estimate_from_peaks
    from .spectral import periodogram

    clean_scenario = type(scenario)(scenario.birds, scenario.flight_wavelength)
    clean = synthesize_dwell(clean_scenario, radar, seed)
    ref_power = clean.power
    noise_power = ref_power / 10.0 ** (config.reference_snr_db / 10.0)
    clutter = ClutterSpec(scenario.clutter_center_velocity, scenario.clutter_spread_velocity, config.scr_db)
    rng = np.random.default_rng([seed, _FLUCTUATION_STREAM])
    half = 0.5 * config.rcs_fluctuation_db
    draws = rng.uniform(-half, half, config.n_updates) if half > 0 else np.zeros(config.n_updates)
    gains_db = config.range_gain_db() + draws

    state = TrackState(update_interval=config.update_interval)
    for k, (t, r, g) in enumerate(zip(config.times, config.ranges_km, gains_db)):
        amp = 10.0 ** (g / 20.0)
        estimates, snrs, scrs = [], [], []
        for j in range(config.dwells_per_update):
            dwell_seed = seed * 100_003 + k * config.dwells_per_update + j
            samples = amp * clean.samples
            samples = samples + sea_clutter(samples.size, radar.sample_rate, clutter, radar.wavelength,
                                            amp * amp * ref_power / 10.0 ** (config.scr_db / 10.0), dwell_seed)
            samples = samples + white_noise(samples.size, noise_power, dwell_seed)
            iq = clean.replace(samples, f"track:{k}.{j}")
            spectrum = periodogram(iq, wavelength=radar.wavelength)
            peaks = detect_fwm_peaks(spectrum, params)
            estimates.append(estimate_from_peaks(peaks))
            snr, scr = measure_snr_scr(spectrum, peaks, params)
            snrs.append(snr)
            scrs.append(scr)
        state = track_update(state, float(t), float(r), estimates, float(np.mean(snrs)), float(np.mean(scrs)))
    return state
