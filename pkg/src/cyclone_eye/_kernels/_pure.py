"""NumPy implementations of the hot loops, used when the extension is absent."""
import numpy as np

BACKEND = "python"


def aggregate(terms, strengths):
    strengths = np.asarray(strengths, dtype=np.float64)
    clipped = np.minimum(terms, strengths[:, None])
    # max over terms, floored at 0 so that negative strengths never leak through
    return np.maximum(clipped.max(axis=0), 0.0)


def _weights(n):
    # trapezoid weights: the two end samples count half
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    return w


def coa(xs, mu):
    wmu = _weights(len(mu)) * mu
    den = float(np.sum(wmu))
    if den <= 0.0:
        return float("nan")
    return float(np.dot(xs, wmu)) / den


def aggregate_coa_batch(terms, xs, strengths, chunk=2048):
    strengths = np.asarray(strengths, dtype=np.float64)
    out = np.empty(strengths.shape[0], dtype=np.float64)
    for start in range(0, strengths.shape[0], chunk):
        s = strengths[start:start + chunk]
        agg = np.minimum(terms[None, :, :], s[:, :, None]).max(axis=1)
        np.maximum(agg, 0.0, out=agg)
        agg *= _weights(agg.shape[1])
        den = agg.sum(axis=1)
        num = agg @ xs
        with np.errstate(invalid="ignore", divide="ignore"):
            out[start:start + chunk] = np.where(den > 0.0, num / den, np.nan)
    return out


def _window_count(a, r, axis):
    # ones inside a (2r+1) window along ``axis``; zero padding outside
    pad = [(0, 0), (0, 0)]
    pad[axis] = (r + 1, r)
    c = np.cumsum(np.pad(a.astype(np.int64), pad), axis=axis)
    n = a.shape[axis]
    hi = np.take(c, np.arange(2 * r + 1, 2 * r + 1 + n), axis=axis)
    lo = np.take(c, np.arange(0, n), axis=axis)
    return hi - lo


def erode(img, radius):
    a = np.asarray(img, dtype=np.uint8)
    side = 2 * radius + 1
    rows = (_window_count(a, radius, 1) == side).astype(np.uint8)
    return (_window_count(rows, radius, 0) == side).astype(np.uint8)


def dilate(img, radius):
    a = np.asarray(img, dtype=np.uint8)
    rows = (_window_count(a, radius, 1) > 0).astype(np.uint8)
    return (_window_count(rows, radius, 0) > 0).astype(np.uint8)


def mass_moments(img):
    """(mass, sum of 1-based column index, sum of 1-based row index)."""
    a = np.asarray(img).astype(bool)
    col_mass = a.sum(axis=0, dtype=np.int64)
    row_mass = a.sum(axis=1, dtype=np.int64)
    mass = int(col_mass.sum())
    sx = int(np.dot(col_mass, np.arange(1, a.shape[1] + 1, dtype=np.int64)))
    sy = int(np.dot(row_mass, np.arange(1, a.shape[0] + 1, dtype=np.int64)))
    return mass, sx, sy
