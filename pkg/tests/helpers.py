"""Small builders shared by several test modules."""

from fwm.fwm_detect import FwmEstimate


def estimate_with_count(count: int, wingbeat_hz: float | None = 7.0) -> FwmEstimate:
    """A synthetic per-dwell estimate reporting ``count`` birds."""
    if count == 0:
        return FwmEstimate(1, 0, (), None, None, None)
    spacing = None if wingbeat_hz is None else wingbeat_hz * count * count
    group = None if wingbeat_hz is None else wingbeat_hz * count
    return FwmEstimate(count + 1, count, tuple(float(i) for i in range(count)), spacing, wingbeat_hz, group)


def counts_averaging_363(updates: int = 5, dwells: int = 20) -> list[list[int]]:
    """Per-update dwell counts, 63 fours and 37 threes over 100 dwells, interleaved."""
    total = updates * dwells
    fours = round(0.63 * total)
    flat = [4 if (i * fours) % total < fours else 3 for i in range(total)]
    return [flat[k * dwells:(k + 1) * dwells] for k in range(updates)]
