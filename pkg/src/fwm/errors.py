"""Exception hierarchy shared by every fwm module."""


class FwmError(Exception):
    """Base class for toolkit errors."""


class InvalidArgumentError(FwmError, ValueError):
    """An argument is non-finite, out of domain or otherwise malformed."""


class ConfigurationError(FwmError, ValueError):
    """A scenario/radar combination cannot be synthesized."""


class NyquistError(ConfigurationError):
    """A bird's Doppler extent exceeds the sampling bandwidth."""

    def __init__(self, bird_index: int, required_hz: float, sample_rate: float):
        self.bird_index = bird_index
        self.required_hz = required_hz
        self.sample_rate = sample_rate
        super().__init__(
            f"bird {bird_index}: Doppler extent {required_hz:.1f} Hz needs "
            f"sample_rate > {2 * required_hz:.1f} Hz (got {sample_rate:.1f} Hz)"
        )


class NoTargetError(FwmError):
    """No spectral peak survives outside the clutter exclusion zone."""


class InsufficientPeaksError(FwmError):
    """Fewer peaks than an estimator needs."""


class TrackOrderError(FwmError, ValueError):
    """Track updates must arrive with strictly increasing time."""


class EmptyTrackError(FwmError):
    """A summary was requested for a track without updates."""


class DensityDomainError(InvalidArgumentError, ZeroDivisionError):
    """Reflectivity-derived density is undefined for a zero mean RCS."""


class ScenarioError(FwmError, ValueError):
    """A scenario or parameter file failed to parse or validate.

    ``field`` carries a dotted path such as ``flock.birds[2].wing_length_m``
    and ``line`` the 1-based source line when known.
    """

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(field)
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class SchemaVersionError(FwmError, ValueError):
    """A result bundle was written with an incompatible schema version."""
