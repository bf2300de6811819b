"""IR frame processing: thresholding, morphological opening, center of gravity.

Arrays are stored the usual way, ``pixels[row, col]`` with shape
``(height, width)``. Coordinates reported to callers follow the centroid
convention used throughout the package: ``x`` (``i``) is the 1-based column
(horizontal) index, ``y`` (``j``) the 1-based row (vertical) index.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import _kernels
from .errors import NoMassError, RangeError

FALLBACK_THRESHOLD = 128


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GrayImage:
    pixels: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.pixels)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise RangeError(f"gray image must be a non-empty 2-D array, got shape {a.shape}")
        if a.dtype != np.uint8:
            if np.any(a < 0) or np.any(a > 255) or not np.all(np.isfinite(a)):
                raise RangeError("gray intensities must lie in [0, 255]")
            a = np.rint(a).astype(np.uint8)
        object.__setattr__(self, "pixels", _frozen(a))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def crop(self, row0: int, row1: int, col0: int, col1: int) -> "GrayImage":
        """Half-open ``[row0, row1) x [col0, col1)`` sub-image (0-based)."""
        return GrayImage(self.pixels[row0:row1, col0:col1])


@dataclass(frozen=True, eq=False)
class BinaryImage:
    """0/1 raster; ``threshold`` and ``warnings`` record how it was produced."""

    pixels: np.ndarray
    threshold: float | None = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        a = np.asarray(self.pixels)
        if a.ndim != 2:
            raise RangeError(f"binary image must be 2-D, got shape {a.shape}")
        if a.size and not np.isin(a, (0, 1)).all():
            raise RangeError("binary pixels must be 0 or 1")
        object.__setattr__(self, "pixels", _frozen(a.astype(np.uint8)))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def mass(self) -> int:
        return int(self.pixels.sum(dtype=np.int64))

    def __eq__(self, other):
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))


@dataclass(frozen=True)
class Centroid:
    c_x: float
    c_y: float
    mass: int


def otsu_threshold(img: GrayImage) -> int | None:
    """Threshold ``t`` in 1..255 maximising between-class variance.

    Pixels ``>= t`` form the bright class. Returns None when every pixel has
    the same intensity (no split exists). Ties go to the smallest ``t``.
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.float64)
    levels = np.arange(256, dtype=np.float64)
    total = hist.sum()
    n0 = np.cumsum(hist)[:-1]          # counts below t, t = 1..255
    s0 = np.cumsum(hist * levels)[:-1]
    n1 = total - n0
    s1 = s0[-1] + hist[-1] * 255.0 - s0
    valid = (n0 > 0) & (n1 > 0)
    if not valid.any():
        return None
    with np.errstate(invalid="ignore", divide="ignore"):
        mu0 = s0 / n0
        mu1 = s1 / n1
        between = n0 * n1 * (mu1 - mu0) ** 2
    between[~valid] = -1.0
    return int(np.argmax(between)) + 1


def binarize(img: GrayImage, method: str = "otsu", threshold: float | None = None) -> BinaryImage:
    """Map pixels to 1 where intensity >= threshold (bright, cold cloud tops)."""
    warnings = ()
    if method == "fixed":
        if threshold is None or not 0 <= threshold <= 255:
            raise RangeError(f"fixed threshold must be in [0, 255], got {threshold}")
        t = float(threshold)
    elif method == "otsu":
        t = otsu_threshold(img)
        if t is None:
            t = FALLBACK_THRESHOLD
            warnings = (f"constant image; otsu fell back to fixed({FALLBACK_THRESHOLD})",)
    else:
        raise RangeError(f"unknown threshold method {method!r}")
    return BinaryImage((img.pixels >= t).astype(np.uint8), float(t), warnings)


def erode(img: BinaryImage, se_radius: int = 1) -> BinaryImage:
    return BinaryImage(_kernels.erode(img.pixels, _radius(se_radius)))


def dilate(img: BinaryImage, se_radius: int = 1) -> BinaryImage:
    return BinaryImage(_kernels.dilate(img.pixels, _radius(se_radius)))


def _radius(r) -> int:
    if int(r) != r or r < 1:
        raise RangeError(f"structuring-element radius must be a positive integer, got {r}")
    return int(r)


def denoise(img: BinaryImage, se_radius: int = 1) -> BinaryImage:
    """Morphological opening with a square ``(2r+1)`` structuring element.

    Pixels outside the frame count as background.
    """
    r = _radius(se_radius)
    if img.pixels.size == 0:
        return img
    opened = _kernels.dilate(_kernels.erode(img.pixels, r), r)
    return BinaryImage(opened, img.threshold, img.warnings)


def center_of_gravity(img: BinaryImage) -> Centroid:
    mass, sx, sy = _kernels.mass_moments(img.pixels)
    if mass == 0:
        raise NoMassError("binary image has no foreground pixels")
    return Centroid(sx / mass, sy / mass, mass)


# --- I/O -------------------------------------------------------------------

def load_gray(path) -> GrayImage:
    """Read a PNG or PGM (P2/P5) as 8-bit grayscale.

    Deeper images are rescaled linearly onto 0..255 (Pillow widens 16-bit
    PGM and PNG data to the full 0..65535 range first).
    """
    with Image.open(path) as im:
        im.load()
        if im.mode == "L":
            return GrayImage(np.asarray(im))
        if im.mode in ("I;16", "I;16B", "I;16L", "I"):
            a = np.asarray(im, dtype=np.float64)
            return GrayImage(np.rint(np.clip(a, 0, 65535) * 255.0 / 65535.0))
        if im.mode == "1":
            return GrayImage(np.asarray(im, dtype=np.uint8) * 255)
        raise RangeError(f"{path}: unsupported image mode {im.mode!r}; grayscale input expected")


def save_png(img, path) -> None:
    """Write a gray or binary image; binary pixels are scaled to 0/255."""
    a = img.pixels
    if isinstance(img, BinaryImage):
        a = a * 255
    Image.fromarray(np.ascontiguousarray(a, dtype=np.uint8)).save(Path(path), format="PNG")
