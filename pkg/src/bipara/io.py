"""JSON interchange for signals, coefficients, rectangle families and
atomic decompositions.

Output is deterministic: keys are sorted and floats use ``repr``, so
identical inputs give byte-identical files.
"""

import json

import numpy as np

from .dyadic import (
    DyadicError,
    DyadicInterval,
    DyadicRectangle,
    Grid1D,
    Grid2D,
    HaarCoeffs1D,
    HaarCoeffs2D,
    Signal1D,
    Signal2D,
    haar_inverse_1d,
    haar_inverse_2d,
)
from .sparse import RectFamily


class InputError(ValueError):
    """Malformed input; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _require(obj, key, where=""):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{where}{key}", "missing field")
    return obj[key]


def _grid(obj):
    dims = _require(obj, "dims")
    res = _require(obj, "resolution")
    if dims not in (1, 2):
        raise InputError("dims", f"expected 1 or 2, got {dims!r}")
    if not isinstance(res, list) or len(res) != dims or not all(isinstance(n, int) for n in res):
        raise InputError("resolution", f"expected {dims} integer(s), got {res!r}")
    try:
        return Grid1D(res[0]) if dims == 1 else Grid2D(res[0], res[1])
    except DyadicError as e:
        raise InputError("resolution", str(e)) from None


# ---------------------------------------------------------------------------
# signals and coefficients
# ---------------------------------------------------------------------------

def signal_to_json(f):
    return {
        "dims": f.dims,
        "resolution": list(f.grid.resolution),
        "values": [float(v) for v in np.asarray(f.values).ravel()],
    }


def signal_from_json(obj):
    grid = _grid(obj)
    values = _require(obj, "values")
    try:
        arr = np.asarray(values, dtype=np.float64).ravel()
    except (TypeError, ValueError):
        raise InputError("values", "entries must be numbers") from None
    if arr.size != grid.size:
        raise InputError("values", f"expected {grid.size} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InputError("values", "entries must be finite")
    return Signal1D(grid, arr) if isinstance(grid, Grid1D) else Signal2D(grid, arr)


def coeffs_to_json(c):
    """Nonzero entries only; missing entries read back as zero."""
    entries = []
    if isinstance(c, HaarCoeffs1D):
        for i, v in enumerate(c.detail, start=1):
            if v != 0:
                I = DyadicInterval.from_heap(i)
                entries.append({"block": "c", "lx": I.level, "kx": I.index, "value": float(v)})
        return {"dims": 1, "resolution": [c.grid.n], "mean": c.mean, "entries": entries}
    h = c.heap
    for i, j in zip(*np.nonzero(h)):
        e = {"value": float(h[i, j])}
        if i and j:
            e["block"] = "cc"
        elif i:
            e["block"] = "cm"
        elif j:
            e["block"] = "mc"
        else:
            continue
        if i:
            I = DyadicInterval.from_heap(int(i))
            e["lx"], e["kx"] = I.level, I.index
        if j:
            J = DyadicInterval.from_heap(int(j))
            e["ly"], e["ky"] = J.level, J.index
        entries.append(e)
    return {"dims": 2, "resolution": list(c.grid.resolution), "mm": c.mm, "entries": entries}


def _slot(e, lev, idx, n, where):
    try:
        I = DyadicInterval(int(_require(e, lev, where)), int(_require(e, idx, where)))
    except DyadicError as err:
        raise InputError(where + lev, str(err)) from None
    if I.level >= n:
        raise InputError(where + lev, f"level {I.level} is not cancellative at resolution {n}")
    return I.heap_index


def coeffs_from_json(obj):
    grid = _grid(obj)
    entries = _require(obj, "entries")
    if not isinstance(entries, list):
        raise InputError("entries", "expected a list")
    if isinstance(grid, Grid1D):
        heap = np.zeros(grid.size)
        heap[0] = float(obj.get("mean", 0.0))
        for k, e in enumerate(entries):
            where = f"entries[{k}]."
            heap[_slot(e, "lx", "kx", grid.n, where)] = float(_require(e, "value", where))
        return HaarCoeffs1D.from_heap(grid, heap)
    heap = np.zeros(grid.shape)
    heap[0, 0] = float(obj.get("mm", obj.get("mean", 0.0)))
    for k, e in enumerate(entries):
        where = f"entries[{k}]."
        block = _require(e, "block", where)
        if block not in ("cc", "cm", "mc", "mm"):
            raise InputError(where + "block", f"unknown block {block!r}")
        i = _slot(e, "lx", "kx", grid.n1, where) if block in ("cc", "cm") else 0
        j = _slot(e, "ly", "ky", grid.n2, where) if block in ("cc", "mc") else 0
        heap[i, j] = float(_require(e, "value", where))
    return HaarCoeffs2D(grid, heap)


def load_any(obj):
    """A signal from a signal or coefficient document, bare or inside a CLI report."""
    if isinstance(obj, dict) and isinstance(obj.get("result"), dict):
        obj = obj["result"]
    if isinstance(obj, dict) and "values" in obj:
        return signal_from_json(obj)
    if isinstance(obj, dict) and "entries" in obj:
        c = coeffs_from_json(obj)
        return haar_inverse_1d(c) if isinstance(c, HaarCoeffs1D) else haar_inverse_2d(c)
    raise InputError("values", "document is neither a signal nor a coefficient set")


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(str(path), "file not found") from None
    except json.JSONDecodeError as e:
        raise InputError(str(path), f"invalid JSON ({e.msg} at line {e.lineno})") from None


# ---------------------------------------------------------------------------
# families and decompositions
# ---------------------------------------------------------------------------

def family_to_json(fam):
    out = []
    for R in fam.rects:
        e = {"lx": R.ix.level, "kx": R.ix.index, "ly": R.iy.level, "ky": R.iy.index}
        if fam.labels is not None:
            e["label"] = fam.labels[R]
        out.append(e)
    return out


def family_from_json(obj, grid):
    if not isinstance(obj, list):
        raise InputError("family", "expected a list of rectangles")
    rects, labels = [], {}
    for k, e in enumerate(obj):
        where = f"family[{k}]."
        try:
            R = DyadicRectangle.from_levels(
                int(_require(e, "lx", where)),
                int(_require(e, "kx", where)),
                int(_require(e, "ly", where)),
                int(_require(e, "ky", where)),
            )
        except DyadicError as err:
            raise InputError(where + "lx", str(err)) from None
        rects.append(R)
        if "label" in e:
            labels[R] = int(e["label"])
    if labels and len(labels) != len(rects):
        raise InputError("family", "labels must be given for every rectangle or none")
    try:
        return RectFamily(grid, tuple(rects), labels or None)
    except DyadicError as err:
        raise InputError("family", str(err)) from None


def _cells(mask):
    return [[int(x), int(y)] for x, y in zip(*np.nonzero(mask))]


def decomposition_to_json(d):
    atoms = []
    for atom in d.atoms:
        c = HaarCoeffs2D(d.grid, atom.coeffs)
        atoms.append(coeffs_to_json(c)["entries"])
    return {
        "resolution": list(d.grid.resolution),
        "p": d.p,
        "s": d.s,
        "omegas": [_cells(o) for o in d.omegas],
        "scalars": [float(a) for a in d.scalars],
        "atoms": atoms,
        "size": d.size() if len(d) else 0.0,
    }
