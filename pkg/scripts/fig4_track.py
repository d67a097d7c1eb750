"""Five-update synthetic track: counts, wing velocities and SNR/SCR per update.

Usage: python scripts/fig4_track.py [scenario.yaml] [seed]
"""

import sys
from pathlib import Path

from fwm import io as fio
from fwm.tracker import TrackConfig, simulate_track, track_summary

DEFAULT = Path(__file__).resolve().parents[1] / "scenarios" / "track.yaml"


def main(path=DEFAULT, seed=None):
    spec = fio.load_scenario(path)
    config = spec.track or TrackConfig()
    state = simulate_track(spec.scenario, spec.radar, config, spec.seed if seed is None else seed, spec.detection)
    print(f"{'t [s]':>6} {'R [km]':>7} {'birds':>6} {'SNR [dB]':>9} {'SCR [dB]':>9}  wing velocities [m/s]")
    for u in state.updates:
        wings = " ".join(f"{v:+.1f}" for v in sorted(set(round(v, 1) for v in u.wing_velocities)))
        print(f"{u.time:6.0f} {u.range_km:7.2f} {u.bird_count:6.2f} {u.snr_db:9.2f} {u.scr_db:9.2f}  {wings}")
    report = track_summary(state)
    print(f"\nmean count {report.mean_bird_count:.2f} -> {report.bird_count_ceiling} birds, "
          f"mean wingbeat {report.mean_wingbeat_hz or float('nan'):.2f} Hz")
    print(f"SNR {report.snr_range_db[0]:.2f}..{report.snr_range_db[1]:.2f} dB "
          f"(fluctuation {report.snr_fluctuation_db:.2f} dB), "
          f"SCR {report.scr_range_db[0]:.2f}..{report.scr_range_db[1]:.2f} dB "
          f"(fluctuation {report.scr_fluctuation_db:.2f} dB)")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else DEFAULT, int(sys.argv[2]) if len(sys.argv) > 2 else None)
