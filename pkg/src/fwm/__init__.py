"""Flock wing-beat modulation (FWM) toolkit: micro-Doppler synthesis, spectral
peak analysis, bird counting, wingbeat estimation, tracking and density."""

from .core_model import (
    BirdKinematics,
    CornerGeometry,
    FlockScenario,
    PhaseAngle,
    RadarConfig,
    doppler_shift,
    doppler_velocity,
    dwell_micro_doppler,
    formation_phases,
    fwm_amplitude,
    instantaneous_micro_doppler,
    wcr_rcs,
)
from .density import DensityErrorReport, DensityInput, bird_density, density_error_bounds
from .echo_synth import ClutterSpec, IqSeries, add_noise, add_sea_clutter, synthesize_dwell
from .fwm_detect import (
    DetectionParams,
    FwmEstimate,
    PeakSet,
    analyze_dwell,
    count_birds,
    detect_fwm_peaks,
    mean_wingbeat,
    wing_radial_velocities,
)
from .spectral import DopplerSpectrum, periodogram, stft, velocity_axis
from .tracker import TrackConfig, TrackReport, TrackState, simulate_track, track_summary, track_update

__version__ = "0.1.0"
