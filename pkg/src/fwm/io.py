"""Scenario files, I/Q files and result bundles.

Scenario and parameter files are YAML.  Validation errors name the offending
field path and its source line.  Result bundles are CSV (spectra, track
traces) and JSON (estimates, track reports, summary reports); the frozen
column and key names are listed in ``docs/schema.md``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .core_model import TWO_PI, BirdKinematics, CornerGeometry, FlockScenario, RadarConfig
from .echo_synth import WING_MODELS, IqSeries, Provenance
from .errors import FwmError, SchemaVersionError, ScenarioError
from .fwm_detect import SPACING_STATISTICS, DetectionParams, DwellAnalysis
from .scenarios import comb_flock, fwm_dwell_time
from .spectral import DopplerSpectrum
from .tracker import TrackConfig, TrackReport, TrackState

SCHEMA_VERSION = "1"

SPECTRUM_COLUMNS = ("bin", "frequency_hz", "velocity_mps", "magnitude_db")
TRACK_COLUMNS = ("time_s", "range_km", "bird_count", "wingbeat_hz", "snr_db", "scr_db", "wing_velocities_mps")


# --------------------------------------------------------------------------- YAML with line numbers

class _Doc:
    """A parsed YAML mapping plus the source line of every field path."""

    def __init__(self, data: Any, lines: dict[str, int]):
        self.data = data
        self.lines = lines

    def error(self, path: str, message: str) -> ScenarioError:
        line = self.lines.get(path)
        probe = path
        while line is None and probe:
            probe = probe.rsplit(".", 1)[0] if "." in probe else ""
            line = self.lines.get(probe)
        return ScenarioError(message, field=path, line=line)


def _construct(node: yaml.Node, path: str, lines: dict[str, int]) -> Any:
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for key_node, value_node in node.value:
            key = str(key_node.value)
            if key in out:
                raise ScenarioError("duplicate key", field=_join(path, key), line=key_node.start_mark.line + 1)
            out[key] = _construct(value_node, _join(path, key), lines)
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_construct(item, f"{path}[{i}]", lines) for i, item in enumerate(node.value)]
    return yaml.SafeLoader(_io.StringIO("")).construct_object(node, deep=True)


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def load_yaml(path: str | Path) -> _Doc:
    """Parse a YAML mapping, remembering field lines.

    Raises:
        OSError: the file cannot be read.
        ScenarioError: syntax error or the document is not a mapping.
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_yaml(text)


def parse_yaml(text: str) -> _Doc:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScenarioError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                            line=mark.line + 1 if mark is not None else None) from exc
    if node is None:
        return _Doc({}, {})
    if not isinstance(node, yaml.MappingNode):
        raise ScenarioError("top level must be a mapping", line=node.start_mark.line + 1)
    lines: dict[str, int] = {}
    return _Doc(_construct(node, "", lines), lines)


class _Section:
    """Typed accessors over one mapping of a _Doc; every read is path-checked."""

    def __init__(self, doc: _Doc, path: str, data: Any):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise doc.error(path, "expected a mapping")
        self.doc, self.path, self.data = doc, path, data
        self.seen: set[str] = set()

    def _path(self, key: str) -> str:
        return _join(self.path, key)

    def has(self, key: str) -> bool:
        return key in self.data

    def number(self, key: str, default: Any = ..., *, positive: bool = False, allow_inf: bool = False):
        self.seen.add(key)
        if key not in self.data:
            if default is ...:
                raise self.doc.error(self._path(key), "required field missing")
            return default
        value = self.data[key]
        if isinstance(value, str) and allow_inf and value.strip().lower() in ("inf", ".inf", "off", "none"):
            return math.inf
        if value is None and default is not ...:
            return default
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.doc.error(self._path(key), f"expected a number, got {value!r}")
        value = float(value)
        if math.isnan(value) or (math.isinf(value) and not allow_inf):
            raise self.doc.error(self._path(key), f"expected a finite number, got {value!r}")
        if positive and not value > 0:
            raise self.doc.error(self._path(key), f"must be > 0, got {value!r}")
        return value

    def integer(self, key: str, default: Any = ...):
        self.seen.add(key)
        if key not in self.data:
            if default is ...:
                raise self.doc.error(self._path(key), "required field missing")
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.doc.error(self._path(key), f"expected an integer, got {value!r}")
        return value

    def string(self, key: str, default: Any = ..., choices=None):
        self.seen.add(key)
        if key not in self.data:
            if default is ...:
                raise self.doc.error(self._path(key), "required field missing")
            return default
        value = self.data[key]
        if not isinstance(value, str):
            raise self.doc.error(self._path(key), f"expected a string, got {value!r}")
        if choices is not None and value not in choices:
            raise self.doc.error(self._path(key), f"must be one of {list(choices)}, got {value!r}")
        return value

    def section(self, key: str) -> "_Section | None":
        self.seen.add(key)
        if key not in self.data:
            return None
        return _Section(self.doc, self._path(key), self.data[key])

    def items(self, key: str) -> list["_Section"]:
        self.seen.add(key)
        value = self.data.get(key)
        if not isinstance(value, list) or not value:
            raise self.doc.error(self._path(key), "expected a non-empty list")
        return [_Section(self.doc, f"{self._path(key)}[{i}]", item) for i, item in enumerate(value)]

    def numbers(self, key: str) -> list[float]:
        self.seen.add(key)
        value = self.data.get(key)
        path = self._path(key)
        if not isinstance(value, list) or not value:
            raise self.doc.error(path, "expected a non-empty list of numbers")
        out = []
        for i, v in enumerate(value):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise self.doc.error(f"{path}[{i}]", f"expected a finite number, got {v!r}")
            out.append(float(v))
        return out

    def finish(self) -> None:
        """Reject keys nobody asked for (typos must not pass silently)."""
        for key in self.data:
            if key not in self.seen:
                raise self.doc.error(self._path(key), "unknown field")


def _guard(doc: _Doc, path: str, build):
    """Run a constructor and re-raise domain validation errors with the field path."""
    try:
        return build()
    except ScenarioError:
        raise
    except (FwmError, ValueError) as exc:
        raise doc.error(path, str(exc)) from exc


# --------------------------------------------------------------------------- scenario files

@dataclass(frozen=True)
class ScenarioFile:
    radar: RadarConfig
    scenario: FlockScenario
    seed: int = 0
    wing_model: str = "dwell"
    track: TrackConfig | None = None
    detection: DetectionParams | None = None


def _corner(sec: _Section | None, doc: _Doc) -> CornerGeometry:
    if sec is None:
        return CornerGeometry()
    corner = _guard(doc, sec.path, lambda: CornerGeometry(sec.number("face_length_m", 0.1, positive=True),
                                                          sec.number("face_width_m", 0.1, positive=True)))
    sec.finish()
    return corner


def _birds(flock: _Section, doc: _Doc, radar_sec: _Section) -> tuple[tuple[BirdKinematics, ...], dict]:
    """Bird list from one of three layouts: ``birds``, ``phase_grid_deg`` or ``peak_velocities_mps``."""
    layouts = [k for k in ("birds", "phase_grid_deg", "peak_velocities_mps") if flock.has(k)]
    if len(layouts) != 1:
        raise doc.error(flock.path, "give exactly one of birds, phase_grid_deg, peak_velocities_mps")
    body_v = flock.number("body_velocity_mps", 0.0)
    corner = _corner(flock.section("corner"), doc)
    layout = layouts[0]
    if layout == "birds":
        birds = []
        for item in flock.items("birds"):
            bird = _guard(doc, item.path, lambda item=item: BirdKinematics(
                item.number("wing_length_m", positive=True),
                TWO_PI * item.number("flap_rate_hz"),
                math.radians(item.number("initial_phase_deg", 0.0)),
                item.number("body_velocity_mps", body_v),
                _corner(item.section("corner"), doc) if item.has("corner") else corner,
            ))
            item.finish()
            birds.append(bird)
        return tuple(birds), {}
    wing_length = flock.number("wing_length_m", None)
    flap_hz = flock.number("flap_rate_hz", positive=True)
    if layout == "phase_grid_deg":
        grid = flock.section("phase_grid_deg")
        start, stop, step = grid.number("start"), grid.number("stop"), grid.number("step", positive=True)
        grid.finish()
        if stop < start:
            raise doc.error(grid.path, "stop must be >= start")
        if wing_length is None or not wing_length > 0:
            raise doc.error(flock._path("wing_length_m"), "required positive number for phase_grid_deg")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        phases = np.deg2rad(start + step * np.arange(count))
        birds = tuple(_guard(doc, flock.path, lambda p=p: BirdKinematics.from_hz(wing_length, flap_hz, float(p),
                                                                                  body_v, corner))
                      for p in phases)
        return birds, {}
    # peak list: the comb builder picks the wing length and phases
    if wing_length is not None:
        raise doc.error(flock._path("wing_length_m"), "not used with peak_velocities_mps")
    return (), {"peak_velocities_mps": flock.numbers("peak_velocities_mps"), "flap_hz": flap_hz,
                "body_velocity": body_v, "corner": corner}


def parse_scenario(doc: _Doc) -> ScenarioFile:
    """Validate a scenario document into domain objects.

    Raises:
        ScenarioError: with the offending field path and line.
    """
    top = _Section(doc, "", doc.data)
    radar_sec = top.section("radar")
    flock = top.section("flock")
    if radar_sec is None:
        raise doc.error("radar", "required section missing")
    if flock is None:
        raise doc.error("flock", "required section missing")

    birds, comb = _birds(flock, doc, radar_sec)
    dwell_raw = radar_sec.data.get("dwell_time_s")
    if dwell_raw == "auto":
        radar_sec.seen.add("dwell_time_s")
        rates = {b.flap_hz for b in birds} or {comb.get("flap_hz")}
        if len(rates) != 1:
            raise doc.error("radar.dwell_time_s", "'auto' needs a single flap rate")
        dwell = fwm_dwell_time(rates.pop())
    else:
        dwell = radar_sec.number("dwell_time_s", positive=True)
    radar = _guard(doc, "radar", lambda: RadarConfig(
        radar_sec.number("wavelength_m", positive=True), dwell,
        radar_sec.number("sample_rate_hz", 80_000.0, positive=True),
        radar_sec.number("range_resolution_m", 12.0, positive=True),
        radar_sec.number("velocity_resolution_mps", 0.3, positive=True)))
    radar_sec.finish()

    noise = top.section("noise") or _Section(doc, "noise", {})
    snr = noise.number("snr_db", None, allow_inf=True)
    noise.finish()
    clutter = top.section("clutter") or _Section(doc, "clutter", {})
    scenario_kwargs = dict(
        flight_wavelength=flock.number("flight_wavelength", 0.0),
        noise_snr_db=snr,
        clutter_scr_db=clutter.number("scr_db", None, allow_inf=True),
        clutter_spread_velocity=clutter.number("spread_velocity_mps", 0.5, positive=True),
        clutter_center_velocity=clutter.number("center_velocity_mps", 0.0),
    )
    clutter.finish()
    if comb:
        wings = [v for v in comb["peak_velocities_mps"] if v != comb["body_velocity"]]
        if not wings:
            raise doc.error("flock.peak_velocities_mps", "needs at least one velocity besides the body")
        # f = -2 v / wavelength, so offsets follow from velocity differences
        offsets = [-2.0 * (v - comb["body_velocity"]) / radar.wavelength for v in wings]
        scenario = _guard(doc, "flock", lambda: comb_flock(offsets, comb["flap_hz"], radar, comb["body_velocity"],
                                                           corner=comb["corner"], **scenario_kwargs))
    else:
        scenario = _guard(doc, "flock", lambda: FlockScenario(birds, **scenario_kwargs))
    flock.finish()

    synth = top.section("synthesis") or _Section(doc, "synthesis", {})
    seed = synth.integer("seed", 0)
    wing_model = synth.string("wing_model", "dwell", choices=WING_MODELS)
    synth.finish()

    track = None
    track_sec = top.section("track")
    if track_sec is not None:
        track = _guard(doc, "track", lambda: TrackConfig(
            duration=track_sec.number("duration_s", 300.0, positive=True),
            update_interval=track_sec.number("update_interval_s", 60.0, positive=True),
            range_start_km=track_sec.number("range_start_km", 4.84, positive=True),
            range_end_km=track_sec.number("range_end_km", 8.75, positive=True),
            dwells_per_update=track_sec.integer("dwells_per_update", 1),
            reference_snr_db=track_sec.number("reference_snr_db", 20.0),
            reference_range_km=track_sec.number("reference_range_km", None),
            scr_db=track_sec.number("scr_db", 10.0),
            rcs_fluctuation_db=track_sec.number("rcs_fluctuation_db", 0.0),
        ))
        track_sec.finish()

    detection = None
    det = top.section("detection")
    if det is not None:
        detection = _detection(det, doc)
    top.finish()
    return ScenarioFile(radar, scenario, seed, wing_model, track, detection)


def _detection(sec: _Section, doc: _Doc) -> DetectionParams:
    defaults = DetectionParams()
    params = _guard(doc, sec.path, lambda: DetectionParams(
        sec.number("min_prominence_db", defaults.min_prominence_db),
        sec.number("max_depth_below_body_db", defaults.max_depth_below_body_db),
        sec.number("clutter_exclusion_velocity_mps", defaults.clutter_exclusion_velocity),
        sec.integer("min_separation_bins", defaults.min_separation_bins),
    ))
    sec.finish()
    return params


def load_scenario(path: str | Path) -> ScenarioFile:
    return parse_scenario(load_yaml(path))


@dataclass(frozen=True)
class AnalysisParams:
    detection: DetectionParams = DetectionParams()
    window: str = "hann"
    fft_length: int | None = None
    statistic: str = "mean"


def parse_params(doc: _Doc) -> AnalysisParams:
    """Analysis parameter file: an optional ``detection`` section plus spectrum options."""
    top = _Section(doc, "", doc.data)
    det = top.section("detection")
    detection = _detection(det, doc) if det is not None else DetectionParams()
    window = top.string("window", "hann")
    fft_length = top.integer("fft_length", None)
    if fft_length is not None and fft_length < 1:
        raise doc.error("fft_length", "must be >= 1")
    statistic = top.string("statistic", "mean", choices=SPACING_STATISTICS)
    top.finish()
    return AnalysisParams(detection, window, fft_length, statistic)


def load_params(path: str | Path) -> AnalysisParams:
    return parse_params(load_yaml(path))


# --------------------------------------------------------------------------- I/Q files

def _radar_dict(radar: RadarConfig) -> dict:
    return {"wavelength_m": radar.wavelength, "dwell_time_s": radar.dwell_time,
            "sample_rate_hz": radar.sample_rate}


def dumps_json(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _check_schema(meta: dict, source: str | Path, kind: str | None = None) -> None:
    version = meta.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(f"{source}: schema_version {version!r}, expected {SCHEMA_VERSION!r}")
    if kind is not None and meta.get("kind") != kind:
        raise SchemaVersionError(f"{source}: kind {meta.get('kind')!r}, expected {kind!r}")


def sidecar_path(iq_path: str | Path) -> Path:
    return Path(iq_path).with_suffix(".json")


def write_iq(path: str | Path, iq: IqSeries, radar: RadarConfig) -> tuple[Path, Path]:
    """Write interleaved little-endian float32 I/Q plus the JSON sidecar next to it."""
    path = Path(path)
    interleaved = np.empty(2 * len(iq), dtype="<f4")
    interleaved[0::2] = iq.samples.real
    interleaved[1::2] = iq.samples.imag
    path.write_bytes(interleaved.tobytes())
    meta = {
        "schema_version": SCHEMA_VERSION,
        "kind": "iq",
        "format": "interleaved float32 little-endian I,Q",
        "sample_rate_hz": iq.sample_rate,
        "duration_s": len(iq) / iq.sample_rate,
        "n_samples": len(iq),
        "radar": _radar_dict(radar),
        "scenario_hash": iq.origin.scenario_hash,
        "seed": iq.origin.seed,
        "stages": list(iq.origin.stages),
    }
    side = sidecar_path(path)
    side.write_text(dumps_json(meta), encoding="utf-8")
    return path, side


def read_iq(path: str | Path) -> tuple[IqSeries, float]:
    """Read an I/Q file and its sidecar; returns the series and the wavelength.

    Raises:
        OSError: either file is missing or unreadable.
        SchemaVersionError: the sidecar has another schema version.
        ScenarioError: sidecar fields are missing or inconsistent.
    """
    path = Path(path)
    side = sidecar_path(path)
    raw = path.read_bytes()
    try:
        meta = json.loads(side.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"sidecar is not valid JSON: {exc}", field=str(side)) from exc
    _check_schema(meta, side, "iq")
    try:
        n = int(meta["n_samples"])
        fs = float(meta["sample_rate_hz"])
        wavelength = float(meta["radar"]["wavelength_m"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"sidecar field missing or malformed: {exc}", field=str(side)) from exc
    if len(raw) != 8 * n:
        raise ScenarioError(f"{path} holds {len(raw) // 8} samples, sidecar says {n}", field="n_samples")
    values = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    samples = values[0::2] + 1j * values[1::2]
    origin = Provenance(meta.get("scenario_hash", ""), meta.get("seed"), tuple(meta.get("stages", ())))
    return IqSeries(samples, fs, origin), wavelength


# --------------------------------------------------------------------------- spectra

def _fmt(x: float) -> str:
    return repr(float(x))


def spectrum_csv(spectrum: DopplerSpectrum) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SPECTRUM_COLUMNS)
    velocities = spectrum.velocity_axis if spectrum.velocity_axis is not None else np.full(spectrum.fft_length, np.nan)
    for k in range(spectrum.fft_length):
        writer.writerow((k, _fmt(spectrum.frequency_axis[k]), _fmt(velocities[k]), _fmt(spectrum.magnitudes_db[k])))
    return buf.getvalue()


def write_spectrum_csv(path: str | Path, spectrum: DopplerSpectrum) -> Path:
    path = Path(path)
    path.write_text(spectrum_csv(spectrum), encoding="utf-8")
    return path


def read_spectrum_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Columns of a spectrum CSV as arrays keyed by header name."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != SPECTRUM_COLUMNS:
            raise SchemaVersionError(f"{path}: unexpected columns {header}")
        rows = list(reader)
    cols = list(zip(*rows)) if rows else [()] * len(SPECTRUM_COLUMNS)
    out = {name: np.array([float(v) for v in col]) for name, col in zip(SPECTRUM_COLUMNS, cols)}
    out["bin"] = out["bin"].astype(int)
    return out


# --------------------------------------------------------------------------- estimates

def estimate_dict(analysis: DwellAnalysis, meta: dict | None = None) -> dict:
    est = analysis.estimate
    peaks = analysis.peaks
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "estimate",
        "n_peaks": est.n_peaks,
        "bird_count": est.bird_count,
        "peaks": [{"frequency_hz": p.frequency, "velocity_mps": p.velocity, "magnitude_db": p.magnitude_db}
                  for p in peaks.peaks],
        "body_index": peaks.body_index,
        "body_velocity_mps": peaks.body.velocity,
        "wing_velocities_mps": list(est.wing_velocities),
        "mean_spacing_hz": est.mean_spacing_hz,
        "wingbeat_hz": est.wingbeat_hz,
        "group_rate_hz": est.group_rate_hz,
    }
    if meta:
        doc["source"] = meta
    return doc


def write_json(path: str | Path, obj: dict) -> Path:
    path = Path(path)
    path.write_text(dumps_json(obj), encoding="utf-8")
    return path


def read_json(path: str | Path, kind: str | None = None) -> dict:
    """Read a result document and check its schema version (and kind, if given)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaVersionError(f"{path}: not a JSON result document ({exc})") from exc
    if not isinstance(obj, dict):
        raise SchemaVersionError(f"{path}: not a JSON result document")
    _check_schema(obj, path, kind)
    return obj


# --------------------------------------------------------------------------- tracks

def track_report_dict(report: TrackReport, config: TrackConfig | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "track_report",
        "n_updates": report.n_updates,
        "mean_bird_count": report.mean_bird_count,
        "bird_count_ceiling": report.bird_count_ceiling,
        "mean_wingbeat_hz": report.mean_wingbeat_hz,
        "snr_range_db": list(report.snr_range_db),
        "scr_range_db": list(report.scr_range_db),
        "snr_fluctuation_db": report.snr_fluctuation_db,
        "scr_fluctuation_db": report.scr_fluctuation_db,
        "wing_velocity_traces_mps": [list(t) for t in report.wing_velocity_traces],
    }
    if config is not None:
        doc["config"] = {f.name: getattr(config, f.name) for f in fields(config)}
    return doc


def track_csv(state: TrackState) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACK_COLUMNS)
    for u in state.updates:
        rate = "" if u.wingbeat_hz is None else _fmt(u.wingbeat_hz)
        writer.writerow((_fmt(u.time), _fmt(u.range_km), _fmt(u.bird_count), rate, _fmt(u.snr_db),
                         _fmt(u.scr_db), ";".join(_fmt(v) for v in u.wing_velocities)))
    return buf.getvalue()


def write_track_csv(path: str | Path, state: TrackState) -> Path:
    path = Path(path)
    path.write_text(track_csv(state), encoding="utf-8")
    return path


def read_track_csv(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TRACK_COLUMNS:
            raise SchemaVersionError(f"{path}: unexpected columns {header}")
        rows = []
        for row in reader:
            rec = dict(zip(TRACK_COLUMNS, row))
            rows.append({
                "time_s": float(rec["time_s"]),
                "range_km": float(rec["range_km"]),
                "bird_count": float(rec["bird_count"]),
                "wingbeat_hz": float(rec["wingbeat_hz"]) if rec["wingbeat_hz"] else None,
                "snr_db": float(rec["snr_db"]),
                "scr_db": float(rec["scr_db"]),
                "wing_velocities_mps": [float(v) for v in rec["wing_velocities_mps"].split(";") if v],
            })
    return rows
