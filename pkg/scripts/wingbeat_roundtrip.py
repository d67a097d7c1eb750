"""Direct-following flocks with random size and flap rate: how often is the
count exact and the wingbeat within 15 %?

Usage: python scripts/wingbeat_roundtrip.py [trials] [seed]
"""

import sys

import numpy as np

from fwm.echo_synth import synthesize_dwell
from fwm.fwm_detect import analyze_dwell
from fwm.scenarios import direct_following_trial


def main(trials: int = 200, seed: int = 123):
    rng = np.random.default_rng(seed)
    hits = 0
    errors = []
    for k in range(trials):
        n = int(rng.integers(2, 7))
        flap = float(rng.uniform(3.0, 10.0))
        scenario, radar = direct_following_trial(n, flap)
        est = analyze_dwell(synthesize_dwell(scenario, radar, k), radar.wavelength).estimate
        ok = est.bird_count == n and est.wingbeat_hz is not None and abs(est.wingbeat_hz - flap) <= 0.15 * flap
        hits += ok
        if est.wingbeat_hz is not None:
            errors.append((est.wingbeat_hz - flap) / flap)
    print(f"{hits}/{trials} trials correct ({100 * hits / trials:.1f} %)")
    print(f"relative wingbeat error: median {np.median(errors):+.4f}, worst {np.max(np.abs(errors)):.4f}")


if __name__ == "__main__":
    args = [int(a) for a in sys.argv[1:3]]
    main(*args)
