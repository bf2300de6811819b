"""Single-frame eye location: focus grid, FIS block selection, image refinement.

Grid cells are indexed ``(row, col)``, 1-based, with row 1 the northernmost
row and col 1 the westernmost column, matching image row order.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigurationError, NoMassError, RangeError, UnsupportedLatitudeError
from .geo import GeoBounds, GeoPoint, great_circle_km
from .imaging import BinaryImage, GrayImage, binarize, center_of_gravity, denoise
from .storm import CrispInputs, EyeVerdict, StormFIS

EXTENT_DEG = 13.2
EXTENT_KM = 1400.0
BLOCKS_PER_SIDE = 15
CELL_DEG = EXTENT_DEG / BLOCKS_PER_SIDE
KM_PER_DEG = EXTENT_KM / EXTENT_DEG
MAX_ABS_LAT = 75.0
CENTER_CELL = (BLOCKS_PER_SIDE + 1) // 2


@dataclass(frozen=True)
class FocusGrid:
    center: GeoPoint
    extent_deg: float = EXTENT_DEG
    blocks_per_side: int = BLOCKS_PER_SIDE

    @property
    def cell_deg(self) -> float:
        return self.extent_deg / self.blocks_per_side

    @property
    def km_per_deg(self) -> float:
        return KM_PER_DEG

    @property
    def half(self) -> float:
        return self.extent_deg / 2

    @property
    def bounds(self) -> GeoBounds:
        c, h = self.center, self.half
        return GeoBounds(c.lat - h, c.lat + h, c.lon - h, c.lon + h)

    @property
    def corner(self) -> GeoPoint:
        """South-west corner."""
        b = self.bounds
        return GeoPoint(b.south, b.west)

    def _check(self, row: int, col: int) -> None:
        n = self.blocks_per_side
        if not (1 <= row <= n and 1 <= col <= n):
            raise RangeError(f"block ({row}, {col}) outside 1..{n}")

    def cell_bounds(self, row: int, col: int) -> GeoBounds:
        self._check(row, col)
        b, d = self.bounds, self.cell_deg
        north = b.north - (row - 1) * d
        west = b.west + (col - 1) * d
        return GeoBounds(north - d, north, west, west + d)

    def cell_center(self, row: int, col: int) -> GeoPoint:
        return self.cell_bounds(row, col).center

    def region_bounds(self, row: int, col: int, margin: int) -> GeoBounds:
        """Bounds of the block plus ``margin`` cells on each side, clipped to the grid."""
        self._check(row, col)
        n = self.blocks_per_side
        r0, r1 = max(1, row - margin), min(n, row + margin)
        c0, c1 = max(1, col - margin), min(n, col + margin)
        nw, se = self.cell_bounds(r0, c0), self.cell_bounds(r1, c1)
        return GeoBounds(se.south, nw.north, nw.west, se.east)

    def locate(self, p: GeoPoint) -> tuple[int, int] | None:
        """Cell containing ``p``; None when outside the grid."""
        b = self.bounds
        if not b.contains(p):
            return None
        n = self.blocks_per_side
        row = min(n, int((b.north - p.lat) / self.cell_deg) + 1)
        col = min(n, int((p.lon - b.west) / self.cell_deg) + 1)
        return row, col

    def to_dict(self) -> dict:
        return {"center": self.center.to_dict(), "extent_deg": self.extent_deg,
                "blocks_per_side": self.blocks_per_side, "cell_deg": self.cell_deg,
                "km_per_deg": self.km_per_deg, "bounds": self.bounds.to_dict()}


def build_grid(prior_center: GeoPoint) -> FocusGrid:
    if abs(prior_center.lat) > MAX_ABS_LAT:
        raise UnsupportedLatitudeError(
            f"prior center latitude {prior_center.lat} beyond +/-{MAX_ABS_LAT}; flat cell mapping unsupported"
        )
    grid = FocusGrid(prior_center)
    b = grid.bounds
    if b.west < -180.0 or b.east > 180.0:
        raise RangeError("focus area crosses the antimeridian")
    return grid


@dataclass(frozen=True)
class BlockObservation:
    row: int
    col: int
    inputs: CrispInputs

    def __post_init__(self):
        for v in (self.row, self.col):
            if int(v) != v or not 1 <= v <= BLOCKS_PER_SIDE:
                raise RangeError(f"block index ({self.row}, {self.col}) outside 1..{BLOCKS_PER_SIDE}")
        object.__setattr__(self, "row", int(self.row))
        object.__setattr__(self, "col", int(self.col))

    @property
    def block(self) -> tuple[int, int]:
        return self.row, self.col

    def to_dict(self) -> dict:
        return {"row": self.row, "col": self.col, **self.inputs.as_mapping()}


@dataclass(frozen=True)
class BlockSelection:
    """Outcome of the FIS stage; ``block`` is None when no block has an eye."""

    block: tuple[int, int] | None
    verdict: EyeVerdict | None
    verdicts: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def present(self) -> bool:
        return self.block is not None


def select_block(grid: FocusGrid, obs: Sequence[BlockObservation], fis: StormFIS) -> BlockSelection:
    """Highest-crisp block among those judged present.

    Ties on crisp go to the block nearest the grid center (great circle),
    then to row-major order.
    """
    obs = list(obs)
    if not obs:
        raise ValueError("select_block needs at least one block observation")
    seen = set()
    for o in obs:
        if o.block in seen:
            raise ValueError(f"block {o.block} observed twice")
        seen.add(o.block)
    verdicts = {o.block: fis.judge(o.inputs) for o in obs}
    candidates = [b for b, v in verdicts.items() if v.present]
    if not candidates:
        return BlockSelection(None, None, verdicts)

    def key(b):
        return (-verdicts[b].crisp, great_circle_km(grid.cell_center(*b), grid.center), b)

    best = min(candidates, key=key)
    return BlockSelection(best, verdicts[best], verdicts)


@dataclass(frozen=True)
class PipelineConfig:
    threshold_method: str = "otsu"
    threshold_value: float | None = None
    se_radius: int = 1
    crop_margin: int = 1

    def __post_init__(self):
        if self.threshold_method not in ("otsu", "fixed"):
            raise ConfigurationError(f"threshold method must be 'otsu' or 'fixed', got {self.threshold_method!r}")
        if self.threshold_method == "fixed" and (self.threshold_value is None or not 0 <= self.threshold_value <= 255):
            raise ConfigurationError("fixed thresholding needs threshold_value in [0, 255]")
        if int(self.se_radius) != self.se_radius or self.se_radius < 1:
            raise ConfigurationError("se_radius must be a positive integer")
        if int(self.crop_margin) != self.crop_margin or self.crop_margin < 0:
            raise ConfigurationError("crop_margin must be a non-negative integer")


@dataclass(frozen=True, eq=False)
class RefinedEye:
    position: GeoPoint
    quality: str
    block: tuple[int, int]
    crop_bounds: GeoBounds
    binary: BinaryImage | None = None
    denoised: BinaryImage | None = None

    @property
    def degraded(self) -> bool:
        return self.quality == "degraded"


def _pixel_window(frame_bounds: GeoBounds, shape, region: GeoBounds):
    h, w = shape
    dlat = (frame_bounds.north - frame_bounds.south) / h
    dlon = (frame_bounds.east - frame_bounds.west) / w
    eps = 1e-9
    c0 = max(0, math.floor((region.west - frame_bounds.west) / dlon + eps))
    c1 = min(w, math.ceil((region.east - frame_bounds.west) / dlon - eps))
    r0 = max(0, math.floor((frame_bounds.north - region.north) / dlat + eps))
    r1 = min(h, math.ceil((frame_bounds.north - region.south) / dlat - eps))
    return r0, r1, c0, c1, dlat, dlon


def refine_eye(grid: FocusGrid, block: tuple[int, int], frame: GrayImage,
               cfg: PipelineConfig = PipelineConfig(), frame_bounds: GeoBounds | None = None) -> RefinedEye:
    """Center of gravity of the denoised bright cloud mass around ``block``.

    ``frame_bounds`` gives the geographic footprint of ``frame``; it defaults
    to the grid bounds. Pixels map linearly to latitude/longitude.
    """
    fb = frame_bounds or grid.bounds
    region = grid.region_bounds(*block, cfg.crop_margin).intersect(fb)
    r0, r1, c0, c1, dlat, dlon = _pixel_window(fb, frame.pixels.shape, region)
    if r1 <= r0 or c1 <= c0:
        raise RangeError(f"frame does not cover block {block}")
    crop_bounds = GeoBounds(fb.north - r1 * dlat, fb.north - r0 * dlat, fb.west + c0 * dlon, fb.west + c1 * dlon)
    crop = frame.crop(r0, r1, c0, c1)
    binary = binarize(crop, cfg.threshold_method, cfg.threshold_value)
    clean = denoise(binary, cfg.se_radius)
    try:
        cog = center_of_gravity(clean)
    except NoMassError:
        return RefinedEye(grid.cell_center(*block), "degraded", block, crop_bounds, binary, clean)
    lon = fb.west + (c0 + cog.c_x - 0.5) * dlon
    lat = fb.north - (r0 + cog.c_y - 0.5) * dlat
    gb = grid.bounds
    lat = min(max(lat, gb.south), gb.north)
    lon = min(max(lon, gb.west), gb.east)
    return RefinedEye(GeoPoint(lat, lon), "normal", block, crop_bounds, binary, clean)


@dataclass(frozen=True, eq=False)
class Detection:
    prior_center: GeoPoint
    grid: FocusGrid
    selection: BlockSelection
    eye: RefinedEye | None

    @property
    def absent(self) -> bool:
        return self.eye is None

    def to_dict(self) -> dict:
        out = {
            "prior_center": self.prior_center.to_dict(),
            "present": not self.absent,
            "block": list(self.selection.block) if self.selection.block else None,
            "verdict": self.selection.verdict.to_dict() if self.selection.verdict else None,
        }
        if self.eye is not None:
            out["eye"] = self.eye.position.to_dict()
            out["quality"] = self.eye.quality
            out["crop_bounds"] = self.eye.crop_bounds.to_dict()
        else:
            out["eye"] = None
        return out


def locate_eye(prior_center: GeoPoint, obs: Sequence[BlockObservation], frame: GrayImage, fis: StormFIS,
               cfg: PipelineConfig = PipelineConfig(), frame_bounds: GeoBounds | None = None) -> Detection:
    grid = build_grid(prior_center)
    selection = select_block(grid, obs, fis)
    eye = None
    if selection.present:
        eye = refine_eye(grid, selection.block, frame, cfg, frame_bounds)
    return Detection(prior_center, grid, selection, eye)


# --- files -----------------------------------------------------------------

def load_fields(path) -> list[BlockObservation]:
    """Read a fields file: a JSON list of ``{row, col, D, W, PD, EP}``."""
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, dict) and "blocks" in doc:
        doc = doc["blocks"]
    if not isinstance(doc, list):
        raise ConfigurationError(f"{path}: fields file must be a JSON list of block records")
    out = []
    for k, rec in enumerate(doc):
        try:
            out.append(BlockObservation(rec["row"], rec["col"],
                                        CrispInputs(rec["D"], rec["W"], rec["PD"], rec["EP"])))
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"{path}: record {k} malformed ({exc!r})") from None
    return out


def dump_fields(obs: Iterable[BlockObservation], path) -> None:
    Path(path).write_text(json.dumps([o.to_dict() for o in obs], indent=1) + "\n")


@dataclass(frozen=True)
class ManifestEntry:
    timestamp: str
    image: Path
    fields: Path
    prior_center: GeoPoint | None = None
    bounds: GeoBounds | None = None


def load_manifest(path) -> list[ManifestEntry]:
    """Frame manifest: JSON list of ``{timestamp, image, fields, prior_center?, bounds?}``.

    Relative paths resolve against the manifest's directory.
    """
    path = Path(path)
    doc = json.loads(path.read_text())
    if isinstance(doc, dict) and "frames" in doc:
        doc = doc["frames"]
    if not isinstance(doc, list) or not doc:
        raise ConfigurationError(f"{path}: manifest must be a non-empty JSON list")
    base = path.parent
    out = []
    for k, rec in enumerate(doc):
        try:
            prior = rec.get("prior_center")
            bounds = rec.get("bounds")
            out.append(ManifestEntry(
                str(rec["timestamp"]),
                base / rec["image"],
                base / rec["fields"],
                GeoPoint(prior["lat"], prior["lon"]) if prior else None,
                GeoBounds.from_dict(bounds) if bounds else None,
            ))
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"{path}: entry {k} malformed ({exc!r})") from None
    return out
