"""FWM peak detection and the bird-count / wingbeat estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .echo_synth import IqSeries
from .errors import InsufficientPeaksError, InvalidArgumentError, NoTargetError
from .spectral import DEFAULT_WINDOW, DopplerSpectrum, periodogram, window_sidelobe_db

SPACING_STATISTICS = ("mean", "median")

# A weaker peak within SIDELOBE_GUARD_BINS resolution cells of a stronger one,
# and no more than SIDELOBE_MARGIN_DB above that peak's window sidelobe level,
# is taken to be its sidelobe lifted by noise.
SIDELOBE_GUARD_BINS = 3.0
SIDELOBE_MARGIN_DB = 6.0


@dataclass(frozen=True)
class DetectionParams:
    """Peak acceptance rule.

    Attributes:
        min_prominence_db: topographic prominence a local maximum needs.
        max_depth_below_body_db: peaks further below the body line are dropped.
        clutter_exclusion_velocity: half-width (m/s) of the zone around 0 m/s
            in which peaks are ignored.
        min_separation_bins: minimum distance between accepted peaks, in bins
            of the analysed spectrum.
    """

    min_prominence_db: float = 6.0
    max_depth_below_body_db: float = 30.0
    clutter_exclusion_velocity: float = 1.0
    min_separation_bins: int = 2

    def __post_init__(self):
        for name in ("min_prominence_db", "max_depth_below_body_db", "clutter_exclusion_velocity",
                     "min_separation_bins"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidArgumentError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class Peak:
    frequency: float
    velocity: float
    magnitude_db: float


@dataclass(frozen=True)
class PeakSet:
    peaks: tuple[Peak, ...]
    body_index: int
    detection_params: DetectionParams = field(default_factory=DetectionParams)

    def __post_init__(self):
        peaks = tuple(sorted(self.peaks, key=lambda p: p.frequency))
        if not peaks:
            raise InvalidArgumentError("a PeakSet needs at least one peak")
        object.__setattr__(self, "peaks", peaks)
        if not 0 <= self.body_index < len(peaks):
            raise InvalidArgumentError(f"body_index {self.body_index} out of range")

    @classmethod
    def from_peaks(cls, peaks, params: DetectionParams | None = None) -> "PeakSet":
        """Build a set whose body is the strongest peak."""
        peaks = tuple(sorted(peaks, key=lambda p: p.frequency))
        if not peaks:
            raise InvalidArgumentError("a PeakSet needs at least one peak")
        body = max(range(len(peaks)), key=lambda i: peaks[i].magnitude_db)
        return cls(peaks, body, params if params is not None else DetectionParams())

    def __len__(self) -> int:
        return len(self.peaks)

    @property
    def body(self) -> Peak:
        return self.peaks[self.body_index]

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([p.frequency for p in self.peaks])

    @property
    def velocities(self) -> np.ndarray:
        return np.array([p.velocity for p in self.peaks])


@dataclass(frozen=True)
class FwmEstimate:
    """Per-dwell estimate.

    The spacing, wingbeat and group-rate fields are ``None`` when fewer than
    two peaks were found.
    """

    n_peaks: int
    bird_count: int
    wing_velocities: tuple[float, ...]
    mean_spacing_hz: float | None
    wingbeat_hz: float | None
    group_rate_hz: float | None

    def __post_init__(self):
        object.__setattr__(self, "wing_velocities", tuple(float(v) for v in self.wing_velocities))
        if self.bird_count != max(self.n_peaks - 1, 0):
            raise InvalidArgumentError("bird_count must equal n_peaks - 1")
        if len(self.wing_velocities) != self.bird_count:
            raise InvalidArgumentError("one wing velocity per bird expected")
        if self.wingbeat_hz is not None and self.wingbeat_hz < 0:
            raise InvalidArgumentError("wingbeat_hz must be >= 0")


def _refine(mag: np.ndarray, k: int) -> tuple[float, float]:
    """Parabolic vertex offset (bins) and height through bins k-1, k, k+1."""
    if k <= 0 or k >= mag.size - 1:
        return 0.0, float(mag[k])
    a, b, c = mag[k - 1], mag[k], mag[k + 1]
    if not (np.isfinite(a) and np.isfinite(c)):
        return 0.0, float(b)
    denom = a - 2.0 * b + c
    if denom >= 0:
        return 0.0, float(b)
    delta = 0.5 * (a - c) / denom
    return float(delta), float(b - 0.25 * (a - c) * delta)


def _axis_at(axis: np.ndarray, k: int, delta: float) -> float:
    if delta == 0.0:
        return float(axis[k])
    j = k + 1 if delta > 0 else k - 1
    return float(axis[k] + abs(delta) * (axis[j] - axis[k]))


def _drop_sidelobes(mag: np.ndarray, idx: np.ndarray, spectrum: DopplerSpectrum) -> np.ndarray:
    guard = SIDELOBE_GUARD_BINS * spectrum.fft_length / spectrum.n_samples
    allowed = window_sidelobe_db(spectrum.window) + SIDELOBE_MARGIN_DB
    kept: list[int] = []
    for k in sorted(idx, key=lambda i: -mag[i]):
        if not any(abs(int(k) - j) <= guard and mag[k] < mag[j] + allowed for j in kept):
            kept.append(int(k))
    return np.array(sorted(kept), dtype=int)


def detect_fwm_peaks(spectrum: DopplerSpectrum, params: DetectionParams | None = None,
                     interpolate: bool = True) -> PeakSet:
    """Find the body line and FWM peaks in a Doppler spectrum.

    A peak is kept when it is a local maximum with prominence >=
    ``min_prominence_db``, at least ``min_separation_bins`` from a stronger
    peak, outside the clutter zone, and within ``max_depth_below_body_db`` of
    the body line (the strongest peak outside the clutter zone).  Peaks
    that sit within three resolution cells of a stronger peak and are not
    clearly above its window sidelobe level are dropped as sidelobes.

    Raises:
        NoTargetError: nothing survives outside the clutter zone.
    """
    params = params if params is not None else DetectionParams()
    if spectrum.magnitudes_db.size == 0:
        raise InvalidArgumentError("empty spectrum")
    if spectrum.velocity_axis is None:
        raise InvalidArgumentError("spectrum has no velocity axis; call velocity_axis() first")
    mag = np.asarray(spectrum.magnitudes_db, dtype=float)
    finite = mag[np.isfinite(mag)]
    if finite.size == 0:
        raise NoTargetError("spectrum is identically zero")
    filled = np.where(np.isfinite(mag), mag, finite.min() - 100.0)

    idx, _ = find_peaks(filled, prominence=params.min_prominence_db,
                        distance=max(1, int(params.min_separation_bins)))
    velocities = spectrum.velocity_axis
    idx = idx[np.abs(velocities[idx]) >= params.clutter_exclusion_velocity]
    if idx.size == 0:
        raise NoTargetError("no peak outside the clutter exclusion zone")
    body_level = filled[idx].max()
    idx = idx[filled[idx] >= body_level - params.max_depth_below_body_db]
    idx = _drop_sidelobes(filled, idx, spectrum)

    peaks = []
    for k in idx:
        delta, height = _refine(filled, int(k)) if interpolate else (0.0, float(filled[k]))
        peaks.append(Peak(_axis_at(spectrum.frequency_axis, int(k), delta),
                          _axis_at(velocities, int(k), delta), height))
    return PeakSet.from_peaks(peaks, params)


def count_birds(peaks: PeakSet) -> int:
    """Bird count: every peak except the body line is one bird."""
    return max(len(peaks) - 1, 0)


def wing_radial_velocities(peaks: PeakSet) -> tuple[float, ...]:
    """Velocity of each non-body peak minus the body velocity, in frequency order."""
    body_v = peaks.body.velocity
    return tuple(p.velocity - body_v for i, p in enumerate(peaks.peaks) if i != peaks.body_index)


def peak_spacing(peaks: PeakSet, statistic: str = "mean") -> float:
    """Mean (or median) absolute spacing of adjacent peak frequencies in Hz."""
    if statistic not in SPACING_STATISTICS:
        raise InvalidArgumentError(f"statistic must be one of {SPACING_STATISTICS}")
    if len(peaks) < 2:
        raise InsufficientPeaksError(f"need >= 2 peaks, got {len(peaks)}")
    gaps = np.abs(np.diff(peaks.frequencies))
    return float(np.mean(gaps) if statistic == "mean" else np.median(gaps))


def mean_wingbeat(peaks: PeakSet, statistic: str = "mean") -> FwmEstimate:
    """Bird count, peak spacing and mean wingbeat rate from a peak set.

    The flock is treated like an N-blade rotor: group rate W = N * w and
    peak spacing = N * W, hence w = spacing / N**2 (Hz).

    Raises:
        InsufficientPeaksError: fewer than two peaks.
    """
    spacing = peak_spacing(peaks, statistic)
    n = count_birds(peaks)
    wingbeat = spacing / (n * n)
    return FwmEstimate(len(peaks), n, wing_radial_velocities(peaks), spacing, wingbeat, n * wingbeat)


def estimate_from_peaks(peaks: PeakSet, statistic: str = "mean") -> FwmEstimate:
    """Like :func:`mean_wingbeat` but tolerates a lone body line."""
    if len(peaks) < 2:
        return FwmEstimate(len(peaks), count_birds(peaks), (), None, None, None)
    return mean_wingbeat(peaks, statistic)


@dataclass(frozen=True, eq=False)
class DwellAnalysis:
    spectrum: DopplerSpectrum
    peaks: PeakSet
    estimate: FwmEstimate


def analyze_dwell(iq: IqSeries, wavelength: float, params: DetectionParams | None = None,
                  window: str = DEFAULT_WINDOW, fft_length: int | None = None,
                  statistic: str = "mean") -> DwellAnalysis:
    """Periodogram, peak detection and estimation for one dwell."""
    spectrum = periodogram(iq, window=window, fft_length=fft_length, wavelength=wavelength)
    peaks = detect_fwm_peaks(spectrum, params)
    return DwellAnalysis(spectrum, peaks, estimate_from_peaks(peaks, statistic))
