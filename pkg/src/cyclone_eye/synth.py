"""Seeded synthetic scenes with known eye positions.

A scene is a gray IR-like frame over the focus grid (noisy dark background,
salt speckle, a few bright distractor cloud masses far from the eye, and a
blurred bright disc centered on the true eye) together with a fields file
in which only the true block carries eye-favourable meteorology.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .geo import GeoBounds, GeoPoint
from .imaging import GrayImage, save_png
from .locator import BLOCKS_PER_SIDE, BlockObservation, FocusGrid, build_grid, dump_fields
from .storm import CrispInputs

DEFAULT_CENTER = GeoPoint(15.0, 72.6)
DEFAULT_RESOLUTION = 0.01  # degrees per pixel
START_TIME = datetime(2021, 5, 14, 0, 0, tzinfo=timezone.utc)
STEP = timedelta(hours=6)

EDGE_MARGIN_DEG = 0.15
DISC_RADIUS_DEG = 0.25


@dataclass(frozen=True, eq=False)
class Scene:
    frame: GrayImage
    bounds: GeoBounds
    fields: tuple[BlockObservation, ...]
    truth: GeoPoint
    truth_block: tuple[int, int]
    grid: FocusGrid


def _point_in_block(rng, grid: FocusGrid, block) -> GeoPoint:
    b = grid.cell_bounds(*block)
    m = EDGE_MARGIN_DEG
    return GeoPoint(rng.uniform(b.south + m, b.north - m), rng.uniform(b.west + m, b.east - m))


def _fields(rng, truth_block) -> tuple[BlockObservation, ...]:
    out = []
    for row in range(1, BLOCKS_PER_SIDE + 1):
        for col in range(1, BLOCKS_PER_SIDE + 1):
            if (row, col) == truth_block:
                inputs = CrispInputs(rng.uniform(70, 90), rng.uniform(116, 124),
                                     rng.uniform(36, 39), rng.uniform(921, 925))
            else:
                inputs = CrispInputs(rng.uniform(1, 15), rng.uniform(20, 130),
                                     rng.uniform(1, 80), rng.uniform(900, 1000))
            out.append(BlockObservation(row, col, inputs))
    return tuple(out)


def _render(rng, grid: FocusGrid, truth: GeoPoint, truth_block, resolution: float) -> GrayImage:
    b = grid.bounds
    n = int(round(grid.extent_deg / resolution))
    rows, cols = np.mgrid[0:n, 0:n]
    lat = b.north - (rows + 0.5) * resolution
    lon = b.west + (cols + 0.5) * resolution
    canvas = np.zeros((n, n))

    # distractors: at least 4 cells (Chebyshev) from the eye block
    far = [(r, c) for r in range(1, BLOCKS_PER_SIDE + 1) for c in range(1, BLOCKS_PER_SIDE + 1)
           if max(abs(r - truth_block[0]), abs(c - truth_block[1])) >= 4]
    for k in rng.choice(len(far), size=3, replace=False):
        centre = grid.cell_center(*far[k])
        radius = rng.uniform(0.2, 0.4)
        canvas[(lat - centre.lat) ** 2 + (lon - centre.lon) ** 2 <= radius ** 2] = rng.uniform(0.75, 0.9)

    canvas[(lat - truth.lat) ** 2 + (lon - truth.lon) ** 2 <= DISC_RADIUS_DEG ** 2] = 1.0
    canvas = gaussian_filter(canvas, sigma=2.0)
    img = 55.0 + 175.0 * canvas + rng.normal(0.0, 10.0, size=canvas.shape)
    speckle = rng.random(canvas.shape) < 0.002
    img[speckle] = 255.0
    return GrayImage(np.clip(np.rint(img), 0, 255).astype(np.uint8))


def make_scene(seed: int, prior_center: GeoPoint = DEFAULT_CENTER, resolution: float = DEFAULT_RESOLUTION,
               truth_block: tuple[int, int] | None = None, truth: GeoPoint | None = None,
               rng: np.random.Generator | None = None) -> Scene:
    rng = rng if rng is not None else np.random.default_rng(seed)
    grid = build_grid(prior_center)
    if truth is not None:
        truth_block = grid.locate(truth)
    if truth_block is None:
        truth_block = (int(rng.integers(6, 11)), int(rng.integers(6, 11)))
    if truth is None:
        truth = _point_in_block(rng, grid, truth_block)
    fields = _fields(rng, truth_block)
    frame = _render(rng, grid, truth, truth_block, resolution)
    return Scene(frame, grid.bounds, fields, truth, truth_block, grid)


def make_track_scenes(seed: int, frames: int = 3, start: GeoPoint = DEFAULT_CENTER,
                      resolution: float = DEFAULT_RESOLUTION) -> list[Scene]:
    """Scenes for a storm drifting roughly north; frame t is centered on truth t-1."""
    rng = np.random.default_rng(seed)
    scenes = []
    center = start
    c = (BLOCKS_PER_SIDE + 1) // 2
    for t in range(frames):
        if t == 0:
            block = (c, c)
        else:
            block = (c - 1, c + int(rng.integers(-1, 2)))
        scene = make_scene(seed, center, resolution, truth_block=block, rng=rng)
        scenes.append(scene)
        center = scene.truth
    return scenes


def write_bundle(scenes: list[Scene], out_dir) -> Path:
    """Write frames, fields, ``truth.json`` and ``manifest.json``; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest, truth = [], []
    for t, s in enumerate(scenes):
        stamp = (START_TIME + t * STEP).isoformat()
        img_name, fields_name = f"frame_{t:03d}.png", f"fields_{t:03d}.json"
        save_png(s.frame, out / img_name)
        dump_fields(s.fields, out / fields_name)
        entry = {"timestamp": stamp, "image": img_name, "fields": fields_name, "bounds": s.bounds.to_dict()}
        if t == 0:
            entry["prior_center"] = s.grid.center.to_dict()
        manifest.append(entry)
        truth.append({"timestamp": stamp, "eye": s.truth.to_dict(), "block": list(s.truth_block),
                      "grid_center": s.grid.center.to_dict()})
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    (out / "truth.json").write_text(json.dumps(truth, indent=1, sort_keys=True) + "\n")
    return out / "manifest.json"
