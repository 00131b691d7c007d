"""Seeded random test signals and on-disk corpora with a hash manifest."""

import hashlib
import os

import numpy as np

from .dyadic import HAAR, Grid2D, Signal2D, synth, synth2
from .io import dumps, signal_to_json

TAGS = ("gaussian", "sparse", "tensor")
SPARSE_DENSITY = 0.1


def _gaussian_line(rng, n):
    c = rng.standard_normal(1 << n)
    c[0] = 0.0
    return synth(c, -1, HAAR)


def random_signal(tag, grid, rng):
    """One signal with i.i.d. Gaussian cancellative coefficients.

    ``sparse`` keeps each coefficient with probability 0.1 (at least one);
    ``tensor`` is b(x) c(y) with Gaussian line coefficients.
    """
    if tag == "tensor":
        b = _gaussian_line(rng, grid.n1)
        c = _gaussian_line(rng, grid.n2)
        return Signal2D(grid, np.outer(b, c))
    heap = np.zeros(grid.shape)
    cc = rng.standard_normal((grid.shape[0] - 1, grid.shape[1] - 1))
    if tag == "sparse":
        keep = rng.random(cc.shape) < SPARSE_DENSITY
        keep.flat[rng.integers(keep.size)] = True
        cc = np.where(keep, cc, 0.0)
    elif tag != "gaussian":
        raise ValueError(f"unknown distribution tag {tag!r}; expected one of {TAGS}")
    heap[1:, 1:] = cc
    return Signal2D(grid, synth2(heap, HAAR, HAAR))


def generate_signals(tag, count, seed, n1, n2=None):
    if tag not in TAGS:
        raise ValueError(f"unknown distribution tag {tag!r}; expected one of {TAGS}")
    if count < 1:
        raise ValueError("count must be at least 1")
    grid = Grid2D(n1, n1 if n2 is None else n2)
    children = np.random.SeedSequence(seed).spawn(count)
    return [random_signal(tag, grid, np.random.default_rng(c)) for c in children]


def generate_corpus(tag, count, seed, n1, n2=None, outdir="."):
    """Write ``count`` signal files plus ``manifest.json``; returns the file paths."""
    signals = generate_signals(tag, count, seed, n1, n2)
    os.makedirs(outdir, exist_ok=True)
    paths, files = [], []
    for i, f in enumerate(signals):
        name = f"{tag}_{i:04d}.json"
        data = dumps(signal_to_json(f)).encode()
        path = os.path.join(outdir, name)
        with open(path, "wb") as fh:
            fh.write(data)
        paths.append(path)
        files.append({"file": name, "sha256": hashlib.sha256(data).hexdigest()})
    manifest = {
        "tag": tag,
        "count": count,
        "seed": seed,
        "resolution": list(signals[0].grid.resolution),
        "files": files,
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        fh.write(dumps(manifest))
    return paths
