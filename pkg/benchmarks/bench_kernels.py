"""Compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--json]

Each kernel is timed with both backends on the same inputs, results are
checked for agreement, and the best-of-N wall time is reported. The last
section times whole pipeline calls in a subprocess per backend (the backend
is fixed at import, so switching needs a fresh interpreter).
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from cyclone_eye._kernels import available_backends
from cyclone_eye.storm import build_storm_fis

PIPELINE_SNIPPET = r"""
import json, timeit
import numpy as np
from cyclone_eye import BACKEND
from cyclone_eye.storm import CrispInputs, build_storm_fis, INPUT_NAMES, RANGES
from cyclone_eye.locator import locate_eye
from cyclone_eye.synth import make_scene
fis = build_storm_fis()
lo = np.array([RANGES[k][0] for k in INPUT_NAMES]); hi = np.array([RANGES[k][1] for k in INPUT_NAMES])
vals = np.random.default_rng(0).uniform(lo, hi, size=(10000, 4))
s = make_scene(0)
r = {REPEAT}
out = {
    "backend": BACKEND,
    "judge_many_10k": min(timeit.repeat(lambda: fis.judge_many(vals), number=1, repeat=r)),
    "judge_scalar_1k": min(timeit.repeat(lambda: [fis.judge(CrispInputs(*v)) for v in vals[:1000]], number=1, repeat=r)),
    "locate_eye": min(timeit.repeat(lambda: locate_eye(s.grid.center, s.fields, s.frame, fis), number=1, repeat=r)),
}
print(json.dumps(out))
"""


def kernel_cases(rng):
    fis = build_storm_fis()
    system = fis.system
    terms = np.ascontiguousarray(system._term_samples)
    xs = system._xs
    n_terms = terms.shape[0]
    strengths = rng.random(n_terms)
    batch = np.ascontiguousarray(rng.random((10_000, n_terms)))
    img = (rng.random((1320, 1320)) < 0.4).astype(np.uint8)
    crop = (rng.random((264, 264)) < 0.4).astype(np.uint8)
    return {
        "aggregate (1001 samples)": lambda k: k.aggregate(terms, strengths),
        "coa (1001 samples)": lambda k: k.coa(xs, terms[0]),
        "aggregate_coa_batch (10k)": lambda k: k.aggregate_coa_batch(terms, xs, batch),
        "erode r=1 (264x264)": lambda k: k.erode(crop, 1),
        "dilate r=1 (264x264)": lambda k: k.dilate(crop, 1),
        "erode r=3 (1320x1320)": lambda k: k.erode(img, 3),
        "mass_moments (1320x1320)": lambda k: k.mass_moments(img),
    }


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return bool(np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=0, atol=1e-12))


def run_kernels(repeat: int) -> list[dict]:
    backends = available_backends()
    rows = []
    for name, fn in kernel_cases(np.random.default_rng(1)).items():
        row = {"kernel": name}
        outputs = {}
        for bname, mod in backends.items():
            outputs[bname] = fn(mod)
            number = 5
            row[bname] = min(timeit.repeat(lambda: fn(mod), number=number, repeat=repeat)) / number
        if len(outputs) == 2:
            row["agree"] = _same(outputs["python"], outputs["cython"])
            row["speedup"] = row["python"] / row["cython"]
        rows.append(row)
    return rows


def run_pipeline(repeat: int) -> list[dict]:
    out = []
    for force in ("1", "0"):
        env = {**os.environ, "CYCLONE_EYE_PURE_PYTHON": force}
        code = PIPELINE_SNIPPET.replace("{REPEAT}", str(repeat))
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        out.append(json.loads(res.stdout))
    # without the extension both runs report "python"
    return [r for k, r in enumerate(out) if k == 0 or r["backend"] != out[0]["backend"]]


def _fmt(sec: float) -> str:
    return f"{sec * 1e3:9.3f} ms" if sec >= 1e-3 else f"{sec * 1e6:9.1f} us"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    kernels, pipeline = run_kernels(args.repeat), run_pipeline(args.repeat)
    if args.json:
        print(json.dumps({"kernels": kernels, "pipeline": pipeline}, indent=2))
        return 0
    have_c = "cython" in available_backends()
    print(f"backends: {', '.join(available_backends())}")
    print(f"{'kernel':28} {'python':>12} {'cython':>12} {'speedup':>8}  agree")
    for r in kernels:
        c = _fmt(r["cython"]) if have_c else "-"
        sp = f"{r['speedup']:7.1f}x" if have_c else "-"
        print(f"{r['kernel']:28} {_fmt(r['python']):>12} {c:>12} {sp:>8}  {r.get('agree', '-')}")
    print()
    print(f"{'pipeline call':28} " + " ".join(f"{p['backend']:>12}" for p in pipeline))
    for key in ("judge_many_10k", "judge_scalar_1k", "locate_eye"):
        print(f"{key:28} " + " ".join(f"{_fmt(p[key]):>12}" for p in pipeline))
    return 0


if __name__ == "__main__":
    sys.exit(main())
