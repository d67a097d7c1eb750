"""Doppler spectra and short-time spectra with calibrated frequency/velocity axes."""

from __future__ import annotations

import dataclasses
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .core_model import doppler_velocity
from .echo_synth import IqSeries
from .errors import InvalidArgumentError

DB_FLOOR = -300.0
DEFAULT_WINDOW = "hann"
DEFAULT_PAD_FACTOR = 4


def default_fft_length(n_samples: int, pad_factor: int = DEFAULT_PAD_FACTOR) -> int:
    """Next power of two >= pad_factor * n_samples."""
    if n_samples < 1:
        raise InvalidArgumentError("n_samples must be >= 1")
    return 1 << int(math.ceil(math.log2(pad_factor * n_samples)))


def window_samples(name: str, n: int) -> np.ndarray:
    """Periodic window of length n; ``rectangular``/``rect``/``boxcar`` are synonyms."""
    if name in ("rectangular", "rect", "boxcar", "none"):
        return np.ones(n)
    try:
        return get_window(name, n, fftbins=True)
    except ValueError as exc:
        raise InvalidArgumentError(f"unknown window {name!r}") from exc


def window_resolution(name: str, n: int, sample_rate: float) -> float:
    """-6 dB mainlobe width (Hz) of an n-point window: the spacing at which
    two equal tones stop merging into one peak.  2/T for Hann, ~1.2/T for
    the rectangular window."""
    w = window_samples(name, n)
    pad = default_fft_length(n, 64)
    mag = np.abs(np.fft.fft(w, pad))
    mag /= mag[0]
    first_below = int(np.argmax(mag < 0.5))
    # linear interpolation of the -6 dB crossing
    k0 = first_below - 1
    frac = (mag[k0] - 0.5) / (mag[k0] - mag[first_below])
    return 2.0 * (k0 + frac) * sample_rate / pad


@functools.lru_cache(maxsize=32)
def window_sidelobe_db(name: str, n: int = 256) -> float:
    """Peak sidelobe level (dB, negative) of the window's amplitude response.

    About -13.3 dB for the rectangular window and -31.5 dB for Hann.
    """
    w = window_samples(name, n)
    pad = default_fft_length(n, 64)
    mag = np.abs(np.fft.fft(w, pad))[: pad // 2]
    mag /= mag[0]
    rising = np.flatnonzero(np.diff(mag) > 0)
    if rising.size == 0:
        return -math.inf
    peak = mag[rising[0]:].max()
    return 20.0 * math.log10(peak) if peak > 0 else -math.inf


def to_db(power: np.ndarray) -> np.ndarray:
    """10 log10(power) with values below DB_FLOOR mapped to -inf."""
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(power)
    db[db < DB_FLOOR] = -np.inf
    return db


@dataclass(frozen=True, eq=False)
class DopplerSpectrum:
    """Magnitude spectrum of one dwell, ascending in frequency.

    ``magnitudes_db`` is referenced to full scale: a unit-amplitude complex
    tone centred on a bin reads 0 dB whatever the window.
    """

    magnitudes_db: np.ndarray
    frequency_axis: np.ndarray
    velocity_axis: np.ndarray | None
    resolution: float
    sample_rate: float
    n_samples: int
    window: str = DEFAULT_WINDOW
    wavelength: float | None = None
    # sum(w)^2 / sum(w^2): converts bin power back to mean windowed sample power
    power_scale: float = 1.0

    @property
    def fft_length(self) -> int:
        return self.magnitudes_db.size

    @property
    def power(self) -> np.ndarray:
        return 10.0 ** (self.magnitudes_db / 10.0)

    def total_power(self) -> float:
        """Parseval estimate of the mean sample power.

        Exact for the rectangular window; for tapered windows it is the
        power of the windowed record normalized by the window energy.
        """
        return float(np.sum(self.power) * self.power_scale / self.fft_length)

    def bin_of(self, frequency: float) -> int:
        return int(np.argmin(np.abs(self.frequency_axis - frequency)))

    def shifted_db(self, offset_db: float) -> "DopplerSpectrum":
        return dataclasses.replace(self, magnitudes_db=self.magnitudes_db + offset_db)


@dataclass(frozen=True, eq=False)
class TimeFrequencyMap:
    frames: tuple[DopplerSpectrum, ...]
    frame_times: np.ndarray
    hop: float

    @property
    def magnitudes_db(self) -> np.ndarray:
        """(n_frames, fft_length) array."""
        return np.stack([f.magnitudes_db for f in self.frames])

    @property
    def frequency_axis(self) -> np.ndarray:
        return self.frames[0].frequency_axis

    def ridge(self) -> np.ndarray:
        """Per-frame frequency of the strongest bin."""
        return np.array([f.frequency_axis[int(np.argmax(f.magnitudes_db))] for f in self.frames])


def _spectrum(samples: np.ndarray, sample_rate: float, window: str, fft_length: int,
              wavelength: float | None) -> DopplerSpectrum:
    n = samples.size
    w = window_samples(window, n)
    coherent = float(np.sum(w))
    if coherent == 0.0:
        raise InvalidArgumentError(f"window {window!r} sums to zero for n={n}")
    spectrum = np.fft.fftshift(np.fft.fft(samples * w, fft_length)) / coherent
    freqs = np.fft.fftshift(np.fft.fftfreq(fft_length, 1.0 / sample_rate))
    velocities = doppler_velocity(freqs, wavelength) if wavelength is not None else None
    return DopplerSpectrum(
        magnitudes_db=to_db(np.abs(spectrum) ** 2),
        frequency_axis=freqs,
        velocity_axis=velocities,
        resolution=sample_rate / fft_length,
        sample_rate=sample_rate,
        n_samples=n,
        window=window,
        wavelength=wavelength,
        power_scale=coherent ** 2 / float(np.sum(w * w)),
    )


def periodogram(iq: IqSeries, window: str = DEFAULT_WINDOW, fft_length: int | None = None,
                wavelength: float | None = None) -> DopplerSpectrum:
    """Windowed, zero-padded periodogram of a dwell.

    Args:
        iq: the dwell.
        window: scipy window name or ``"rectangular"``.
        fft_length: >= len(iq); defaults to :func:`default_fft_length`.
        wavelength: when given, the velocity axis is attached.
    """
    n = len(iq)
    if n == 0:
        raise InvalidArgumentError("periodogram of an empty series")
    if fft_length is None:
        fft_length = default_fft_length(n)
    if fft_length < n:
        raise InvalidArgumentError(f"fft_length {fft_length} shorter than {n} samples")
    return _spectrum(iq.samples, iq.sample_rate, window, fft_length, wavelength)


def stft(iq: IqSeries, window: str = DEFAULT_WINDOW, frame_length: int = 256, hop: int = 64,
         fft_length: int | None = None, wavelength: float | None = None) -> TimeFrequencyMap:
    """Short-time spectra over sliding frames.

    Frame i covers samples [i*hop, i*hop + frame_length); ``frame_times`` are
    frame centres.  The frame count is floor((n - frame_length) / hop) + 1.
    """
    n = len(iq)
    if frame_length < 1 or frame_length > n:
        raise InvalidArgumentError(f"frame_length {frame_length} must lie in [1, {n}]")
    if hop < 1:
        raise InvalidArgumentError(f"hop must be >= 1, got {hop}")
    if fft_length is None:
        fft_length = frame_length
    if fft_length < frame_length:
        raise InvalidArgumentError("fft_length shorter than frame_length")
    n_frames = (n - frame_length) // hop + 1
    starts = np.arange(n_frames) * hop
    frames = tuple(_spectrum(iq.samples[s:s + frame_length], iq.sample_rate, window, fft_length, wavelength)
                   for s in starts)
    times = (starts + frame_length / 2.0) / iq.sample_rate
    return TimeFrequencyMap(frames, times, hop / iq.sample_rate)


def velocity_axis(spectrum: DopplerSpectrum, wavelength: float) -> DopplerSpectrum:
    """Return the spectrum with its velocity axis set to -f * wavelength / 2."""
    return dataclasses.replace(spectrum, velocity_axis=doppler_velocity(spectrum.frequency_axis, wavelength),
                               wavelength=wavelength)
