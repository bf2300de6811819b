"""Command-line interface.

Exit codes: 0 success, 1 unreadable or invalid input file, 2 usage or
configuration error, 3 eye absent, 4 calibration did not reach tolerance.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import __version__
from .errors import CycloneEyeError, ConfigurationError, RangeError
from .geo import GeoBounds, GeoPoint
from .imaging import load_gray, save_png
from .locator import PipelineConfig, load_fields, load_manifest, locate_eye
from .storm import DEFAULT_PRESENCE_THRESHOLD, INPUT_NAMES, build_storm_fis, calibrate, load_config
from .track import (
    FIXTURES,
    LocatedEye,
    assemble_track,
    compare_tracks,
    comparison_to_csv,
    fixture_table_csv,
    load_fixture,
    read_track_csv,
    track_to_csv,
    track_to_geojson,
)

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_ABSENT, EXIT_CALIBRATION = 0, 1, 2, 3, 4
CONFIG_ENV = "CYCLONE_EYE_CONFIG"
OUTPUT_SHAPES = ("fis-eval", "detect", "track", "compare-fixture", "compare-tracks", "synth", "calibrate")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    fis_config: str | None = None
    threshold_method: str = "otsu"
    threshold_value: float | None = None
    se_radius: int = 1
    presence_threshold: float = DEFAULT_PRESENCE_THRESHOLD
    crop_margin: int = 1
    sample_count: int | None = None
    debug_images: bool = False

    def __post_init__(self):
        self.pipeline()  # validates threshold/se/margin
        if not 0.0 <= self.presence_threshold <= 1.0:
            raise ConfigurationError("presence_threshold must lie in [0, 1]")
        if self.sample_count is not None and self.sample_count < 2:
            raise ConfigurationError("sample_count must be at least 2")

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigurationError(f"unknown run-config keys: {unknown}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: not valid JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise ConfigurationError(f"{path}: run config must be a JSON object")
        cfg = cls.from_dict(doc)
        if cfg.fis_config and not Path(cfg.fis_config).is_absolute() and cfg.fis_config not in ("default", "calibrated"):
            cfg = dataclasses.replace(cfg, fis_config=str(Path(path).parent / cfg.fis_config))
        return cfg

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(self.threshold_method, self.threshold_value, self.se_radius, self.crop_margin)

    def fis(self):
        return build_storm_fis(self.fis_config, self.presence_threshold, self.sample_count)


def output_schema(command: str) -> dict:
    """JSON Schema for the ``--json`` output of ``command``.

    ``compare`` has two shapes: ``compare-fixture`` and ``compare-tracks``.
    """
    doc = json.loads(resources.files("cyclone_eye.data").joinpath("cli_output.schema.json").read_text())
    if command not in OUTPUT_SHAPES:
        raise KeyError(f"no output schema for {command!r}")
    return {**doc, "$ref": f"#/$defs/{command}"}


def _parse_inputs(text: str) -> dict[str, float]:
    values = {}
    for part in text.split(","):
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in INPUT_NAMES:
            raise UsageError(f"bad --inputs item {part!r}; expected D=..,W=..,PD=..,EP=..")
        try:
            values[key] = float(val)
        except ValueError:
            raise UsageError(f"--inputs {key}: {val!r} is not a number") from None
    missing = [k for k in INPUT_NAMES if k not in values]
    if missing:
        raise UsageError(f"--inputs missing {missing}")
    return values


def _point(text: str) -> GeoPoint:
    try:
        return GeoPoint.parse(text)
    except RangeError as exc:
        raise UsageError(str(exc)) from None


def _bounds(text: str) -> GeoBounds:
    try:
        s, n, w, e = (float(v) for v in text.split(","))
        return GeoBounds(s, n, w, e)
    except (ValueError, RangeError):
        raise UsageError(f"expected --bounds south,north,west,east, got {text!r}") from None


def _read(fn, path, what):
    try:
        return fn(path)
    except (OSError, ValueError, KeyError, CycloneEyeError) as exc:
        raise DataError(f"cannot read {what} {path}: {exc}") from None


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _debug_dir(args, cfg: RunConfig):
    if cfg.debug_images and not args.debug_dir:
        raise UsageError("debug_images is set; name the output directory with --debug-dir")
    return args.debug_dir


def _write_debug(debug_dir, prefix, eye):
    if debug_dir is None or eye is None:
        return
    d = Path(debug_dir)
    d.mkdir(parents=True, exist_ok=True)
    if eye.binary is not None:
        save_png(eye.binary, d / f"{prefix}binary.png")
    if eye.denoised is not None:
        save_png(eye.denoised, d / f"{prefix}denoised.png")


# --- commands --------------------------------------------------------------

def cmd_fis_eval(args, cfg: RunConfig) -> int:
    inputs = _parse_inputs(args.inputs)
    fis = build_storm_fis(args.fis or cfg.fis_config, cfg.presence_threshold, cfg.sample_count)
    v = fis.judge(inputs)
    rules = [{"rule": k, "strength": s, "text": str(r)}
             for k, (s, r) in enumerate(zip(v.strengths, fis.system.rules), 1)]
    payload = {"inputs": inputs, "crisp": v.crisp, "present": v.present, "rules": rules}
    lines = [f"crisp: {v.crisp:.6f}", f"present: {str(v.present).lower()}", "rule strength"]
    lines += [f"{r['rule']:>4} {r['strength']:.6f}" for r in rules]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_detect(args, cfg: RunConfig) -> int:
    prior = _point(args.prior_center)
    bounds = _bounds(args.bounds) if args.bounds else None
    frame = _read(load_gray, args.image, "image")
    obs = _read(load_fields, args.fields, "fields file")
    debug = _debug_dir(args, cfg)
    det = locate_eye(prior, obs, frame, cfg.fis(), cfg.pipeline(), bounds)
    _write_debug(debug, "", det.eye)
    if det.absent:
        _emit(args, det.to_dict(), "absent")
        return EXIT_ABSENT
    p = det.eye.position
    _emit(args, det.to_dict(), f"{p.lat:.4f},{p.lon:.4f} {det.eye.quality}")
    return EXIT_OK


def run_track(entries, fis, pipeline, prior=None, debug_dir=None):
    """Chain detection over manifest entries; returns (located eyes, absent timestamps)."""
    located, absent = [], []
    for k, entry in enumerate(entries):
        if k == 0:
            prior = entry.prior_center or prior
            if prior is None:
                raise UsageError("first manifest entry has no prior_center; pass --prior-center")
        frame = _read(load_gray, entry.image, "image")
        obs = _read(load_fields, entry.fields, "fields file")
        det = locate_eye(prior, obs, frame, fis, pipeline, entry.bounds)
        _write_debug(debug_dir, f"{k:03d}_", det.eye)
        if det.absent:
            absent.append(entry.timestamp)
            continue
        located.append(LocatedEye(entry.timestamp, det.eye.position, det.eye.quality, prior))
        prior = det.eye.position
    return located, absent


def cmd_track(args, cfg: RunConfig) -> int:
    entries = _read(load_manifest, args.manifest, "manifest")
    prior = _point(args.prior_center) if args.prior_center else None
    debug = _debug_dir(args, cfg)
    located, absent = run_track(entries, cfg.fis(), cfg.pipeline(), prior, debug)
    for stamp in absent:
        print(f"warning: no eye found at {stamp}", file=sys.stderr)
    if not located:
        _emit(args, {"track": None, "absent": absent}, "absent")
        return EXIT_ABSENT
    track = assemble_track(located, Path(args.manifest).stem)
    csv_text, geo = track_to_csv(track), track_to_geojson(track)
    if args.out_csv:
        Path(args.out_csv).write_text(csv_text)
    if args.out_geojson:
        Path(args.out_geojson).write_text(json.dumps(geo, indent=2) + "\n")
    points = [{"timestamp": p.timestamp, **p.position.to_dict(), "quality": p.quality,
               "prior_center": p.prior_center.to_dict() if p.prior_center else None} for p in track]
    payload = {"points": points, "geojson": geo, "absent": absent, "links": [list(l) for l in track.links]}
    _emit(args, payload, csv_text.rstrip("\n"))
    return EXIT_OK


def cmd_compare(args, cfg: RunConfig) -> int:
    if args.fixture:
        table = load_fixture(args.fixture)
        text = fixture_table_csv(table)
        imd, cimss, method = (table.track(s) for s in ("IMD", "CIMSS", "METHOD"))
        a = compare_tracks(imd, cimss, match="order")
        b = compare_tracks(imd, method, match="order")
        payload = {
            "fixture": table.name,
            "rows": [
                {"imd": ra.reference.to_dict(), "cimss": ra.candidate.to_dict(), "method": rb.candidate.to_dict(),
                 "a_lat": ra.lat_err_pct, "a_lon": ra.lon_err_pct, "b_lat": rb.lat_err_pct, "b_lon": rb.lon_err_pct,
                 "printed": {c: row[c] for c in ("a_lat", "a_lon", "b_lat", "b_lon")}}
                for ra, rb, row in zip(a, b, table.rows)
            ],
            "summary": {"a": a.summary, "b": b.summary},
        }
    else:
        if not (args.reference and args.candidate):
            raise UsageError("compare needs --fixture or both --reference and --candidate")
        ref = _read(read_track_csv, args.reference, "reference track")
        cand = _read(read_track_csv, args.candidate, "candidate track")
        try:
            cmp = compare_tracks(ref, cand, match=args.match)
        except CycloneEyeError as exc:
            raise DataError(str(exc)) from None
        text = comparison_to_csv(cmp)
        payload = {
            "rows": [{"timestamp": t, "reference": r.reference.to_dict(), "candidate": r.candidate.to_dict(),
                      "lat_err_pct": r.lat_err_pct, "lon_err_pct": r.lon_err_pct}
                     for t, r in zip(cmp.timestamps, cmp.rows)],
            "summary": cmp.summary,
        }
    if args.out:
        Path(args.out).write_text(text)
    _emit(args, payload, text.rstrip("\n"))
    return EXIT_OK


def cmd_synth(args, cfg: RunConfig) -> int:
    from .synth import DEFAULT_CENTER, make_scene, make_track_scenes, write_bundle

    center = _point(args.center) if args.center else DEFAULT_CENTER
    if args.frames < 1:
        raise UsageError("--frames must be at least 1")
    if args.frames == 1:
        scenes = [make_scene(args.seed, center, args.resolution)]
    else:
        scenes = make_track_scenes(args.seed, args.frames, center, args.resolution)
    manifest = write_bundle(scenes, args.out)
    payload = {"manifest": str(manifest), "frames": len(scenes),
               "truth": [s.truth.to_dict() for s in scenes]}
    _emit(args, payload, str(manifest))
    return EXIT_OK


def cmd_calibrate(args, cfg: RunConfig) -> int:
    start = args.fis or "default"
    doc = _read(load_config, start, "FIS config") if start not in ("default", "calibrated") else load_config(start)
    result = calibrate(doc, max_sweeps=args.max_sweeps, seed=args.seed)
    Path(args.out).write_text(json.dumps(result.config, indent=2) + "\n")
    report = result.report()
    _emit(args, report, "\n".join(f"{k}: {v}" for k, v in report.items()))
    return EXIT_OK if result.converged else EXIT_CALIBRATION


# --- parser ----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cyclone-eye", description="Locate tropical cyclone eyes and compare tracks.")
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"run-config JSON (default: ${CONFIG_ENV})")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("fis-eval", parents=[common], help="evaluate the storm FIS for one set of inputs")
    s.add_argument("--inputs", required=True, help="D=..,W=..,PD=..,EP=..")
    s.add_argument("--fis", help="FIS definition JSON (default: shipped calibrated)")
    s.set_defaults(func=cmd_fis_eval)

    s = sub.add_parser("detect", parents=[common], help="locate the eye in one frame")
    s.add_argument("--image", required=True)
    s.add_argument("--fields", required=True)
    s.add_argument("--prior-center", required=True, help="lat,lon")
    s.add_argument("--bounds", help="frame footprint south,north,west,east (default: focus grid)")
    s.add_argument("--debug-dir", help="write binary/denoised crops here")
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("track", parents=[common], help="chain detection over a frame manifest")
    s.add_argument("manifest")
    s.add_argument("--prior-center", help="lat,lon seed when the first entry has none")
    s.add_argument("--out-csv")
    s.add_argument("--out-geojson")
    s.add_argument("--debug-dir")
    s.set_defaults(func=cmd_track)

    s = sub.add_parser("compare", parents=[common], help="error-percentage table between tracks")
    s.add_argument("--fixture", choices=FIXTURES)
    s.add_argument("--reference")
    s.add_argument("--candidate")
    s.add_argument("--match", choices=("timestamp", "order"), default="timestamp")
    s.add_argument("--out")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("synth", parents=[common], help="write a seeded synthetic bundle")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--frames", type=int, default=1)
    s.add_argument("--center", help="lat,lon of the first focus grid")
    s.add_argument("--resolution", type=float, default=0.01, help="degrees per pixel")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("calibrate", parents=[common], help="fit MF breakpoints to the worked example")
    s.add_argument("--fis", help="starting FIS JSON (default: shipped default)")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--max-sweeps", type=int, default=200)
    s.set_defaults(func=cmd_calibrate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config_path = args.config or os.environ.get(CONFIG_ENV)
        cfg = RunConfig.load(config_path) if config_path else RunConfig()
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"cyclone-eye: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"cyclone-eye: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigurationError, RangeError) as exc:
        print(f"cyclone-eye: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cyclone-eye: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CycloneEyeError as exc:
        print(f"cyclone-eye: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
