"""``fwm`` command-line front end.

Exit status:
    0  success
    1  I/O error (missing or unwritable file)
    2  parse / validation error, bad parameters, schema-version mismatch
    3  Nyquist violation in a scenario
    4  no target: no spectral peak outside the clutter zone
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import io as fio
from .density import density_error_bounds
from .echo_synth import synthesize_dwell
from .errors import FwmError, NoTargetError, NyquistError, SchemaVersionError
from .fwm_detect import analyze_dwell
from .tracker import TrackConfig, simulate_track, track_summary

logger = logging.getLogger("fwm")

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_NYQUIST = 3
EXIT_NO_TARGET = 4

IQ_NAME = "dwell.iq"
SPECTRUM_NAME = "spectrum.csv"
ESTIMATE_NAME = "estimate.json"
TRACK_REPORT_NAME = "track.json"
TRACK_TRACE_NAME = "track_updates.csv"

DEFAULT_REFLECTIVITY = 1.0
DEFAULT_MEAN_RCS = 0.01


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(scenario_path: str, out_path: str, seed: int | None = None) -> int:
    spec = fio.load_scenario(scenario_path)
    seed = spec.seed if seed is None else seed
    iq = synthesize_dwell(spec.scenario, spec.radar, seed, wing_model=spec.wing_model)
    iq_file, side = fio.write_iq(_outdir(out_path) / IQ_NAME, iq, spec.radar)
    logger.info("wrote %d samples to %s (+ %s)", len(iq), iq_file, side.name)
    return EXIT_OK


def cmd_analyze(iq_path: str, params_path: str | None, out_path: str) -> int:
    params = fio.load_params(params_path) if params_path else fio.AnalysisParams()
    iq, wavelength = fio.read_iq(iq_path)
    analysis = analyze_dwell(iq, wavelength, params.detection, params.window, params.fft_length, params.statistic)
    out = _outdir(out_path)
    fio.write_spectrum_csv(out / SPECTRUM_NAME, analysis.spectrum)
    meta = {"iq_file": Path(iq_path).name, "scenario_hash": iq.origin.scenario_hash, "seed": iq.origin.seed,
            "wavelength_m": wavelength, "window": params.window}
    fio.write_json(out / ESTIMATE_NAME, fio.estimate_dict(analysis, meta))
    logger.info("%d peaks, %d birds", analysis.estimate.n_peaks, analysis.estimate.bird_count)
    return EXIT_OK


def cmd_track(scenario_path: str, out_path: str, seed: int | None = None) -> int:
    spec = fio.load_scenario(scenario_path)
    config = spec.track if spec.track is not None else TrackConfig()
    seed = spec.seed if seed is None else seed
    state = simulate_track(spec.scenario, spec.radar, config, seed, spec.detection)
    report = track_summary(state)
    out = _outdir(out_path)
    fio.write_track_csv(out / TRACK_TRACE_NAME, state)
    fio.write_json(out / TRACK_REPORT_NAME, fio.track_report_dict(report, config))
    logger.info("%d updates, mean count %.3f", report.n_updates, report.mean_bird_count)
    return EXIT_OK


def build_report(results_dir: str | Path, reflectivity: float = DEFAULT_REFLECTIVITY,
                 mean_rcs: float = DEFAULT_MEAN_RCS, fluctuation_db: float | None = None) -> dict:
    """Aggregate every JSON bundle under ``results_dir`` into one summary.

    Density bounds use ``fluctuation_db`` when given, else the largest SNR
    fluctuation among the track reports, else 0 dB.

    Raises:
        SchemaVersionError: a bundle has another schema version, or there is
            nothing to report.
    """
    root = Path(results_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"results directory not found: {root}")
    files = sorted(p for p in root.rglob("*.json") if p.is_file())
    estimates, tracks = [], []
    for path in files:
        doc = fio.read_json(path)
        rel = path.relative_to(root).as_posix()
        if doc.get("kind") == "estimate":
            estimates.append({"file": rel, "bird_count": doc["bird_count"], "n_peaks": doc["n_peaks"],
                              "wingbeat_hz": doc["wingbeat_hz"], "mean_spacing_hz": doc["mean_spacing_hz"]})
        elif doc.get("kind") == "track_report":
            tracks.append({"file": rel, "mean_bird_count": doc["mean_bird_count"],
                           "bird_count_ceiling": doc["bird_count_ceiling"],
                           "mean_wingbeat_hz": doc["mean_wingbeat_hz"],
                           "snr_range_db": doc["snr_range_db"], "scr_range_db": doc["scr_range_db"],
                           "snr_fluctuation_db": doc["snr_fluctuation_db"]})
    if not estimates and not tracks:
        raise SchemaVersionError(f"{root}: no estimate or track_report bundles to report on")
    if fluctuation_db is None:
        fluctuation_db = max((t["snr_fluctuation_db"] for t in tracks), default=0.0)
    bounds = density_error_bounds(reflectivity, mean_rcs, fluctuation_db)
    return {
        "schema_version": fio.SCHEMA_VERSION,
        "kind": "report",
        "estimates": estimates,
        "tracks": tracks,
        "density": {
            "reflectivity_linear": reflectivity,
            "mean_rcs_m2": mean_rcs,
            "fluctuation_db": bounds.fluctuation_db,
            "nominal_density_birds_per_km3": bounds.nominal_density,
            "low_density_birds_per_km3": bounds.low_density,
            "high_density_birds_per_km3": bounds.high_density,
            "error_ratio": bounds.error_ratio,
        },
    }


def cmd_report(results_dir: str, out_path: str, reflectivity: float = DEFAULT_REFLECTIVITY,
               mean_rcs: float = DEFAULT_MEAN_RCS, fluctuation_db: float | None = None) -> int:
    report = build_report(results_dir, reflectivity, mean_rcs, fluctuation_db)
    out = Path(out_path)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    fio.write_json(out, report)
    logger.info("report written to %s", out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fwm", description="Flock wing-beat modulation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize one dwell from a scenario file")
    p.add_argument("scenario")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("analyze", help="spectrum + FWM estimate for an I/Q file")
    p.add_argument("iq")
    p.add_argument("--params", default=None)
    p.add_argument("-o", "--out", required=True)

    p = sub.add_parser("track", help="synthesize and summarize a track")
    p.add_argument("scenario")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("report", help="aggregate result bundles")
    p.add_argument("results")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--reflectivity", type=float, default=DEFAULT_REFLECTIVITY, help="linear Z")
    p.add_argument("--rcs", type=float, default=DEFAULT_MEAN_RCS, help="mean single-bird RCS, m^2")
    p.add_argument("--fluctuation-db", type=float, default=None)
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "simulate":
        return cmd_simulate(args.scenario, args.out, args.seed)
    if args.command == "analyze":
        return cmd_analyze(args.iq, args.params, args.out)
    if args.command == "track":
        return cmd_track(args.scenario, args.out, args.seed)
    return cmd_report(args.results, args.out, args.reflectivity, args.rcs, args.fluctuation_db)


def main(argv: list[str] | None = None) -> int:
    level = logging.getLevelName(os.environ.get("FWM_LOG", "WARNING").upper())
    logging.basicConfig(level=level if isinstance(level, int) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, 0 for --help
        return int(exc.code or 0)
    try:
        return _dispatch(args)
    except NyquistError as exc:
        print(f"fwm: Nyquist violation: {exc}", file=sys.stderr)
        return EXIT_NYQUIST
    except NoTargetError as exc:
        print(f"fwm: no target: {exc}", file=sys.stderr)
        return EXIT_NO_TARGET
    except OSError as exc:
        print(f"fwm: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (FwmError, ValueError) as exc:
        print(f"fwm: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
