"""Norms and sublinear operators on dyadic signals.

Covers L^p, the dyadic maximal and square functions in one and two
parameters, the four mixed square/maximal operators, dyadic BMO on the
line, product BMO (brute force on tiny grids, a candidate-family lower
bound elsewhere) and the slice-mixed norms.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dyadic import (
    AVG,
    HAAR,
    DyadicError,
    DyadicInterval,
    DyadicRectangle,
    Signal1D,
    Signal2D,
    analyze,
    analyze2,
    haar_forward_1d,
    haar_forward_2d,
    synth,
    synth2,
)

EXACT_BMO_CELL_CAP = 4  # n1 + n2 for brute-force product BMO


class GridTooLargeError(DyadicError):
    pass


_TAGS = {
    "lp",
    "hp_square",
    "hp_maximal",
    "bmo_line",
    "product_bmo_exact",
    "product_bmo_heuristic",
    "slice_bmo_sup",
    "slice_hr_lr",
}
_EXPONENT_TAGS = {"lp", "hp_square", "hp_maximal", "slice_hr_lr"}


@dataclass(frozen=True)
class NormKind:
    """A norm selector; ``p`` is the exponent (``r`` for ``slice_hr_lr``)."""

    tag: str
    p: float = 2.0

    def __post_init__(self):
        tag = self.tag.replace("-", "_").lower()
        if tag not in _TAGS:
            raise ValueError(f"unknown norm kind {self.tag!r}")
        object.__setattr__(self, "tag", tag)
        p = float(self.p)
        if not p > 0:
            raise ValueError(f"exponent must be positive, got {self.p}")
        if math.isinf(p) and tag != "lp":
            raise ValueError("p = inf is only supported for lp")
        object.__setattr__(self, "p", p)

    @classmethod
    def parse(cls, text, p=None):
        """Parse ``"hp-square"``, ``"hp-square:1"`` or ``"lp:inf"``."""
        tag, _, exp = text.partition(":")
        if exp:
            p = float(exp)
        return cls(tag, 2.0 if p is None else p)

    def __str__(self):
        if self.tag in _EXPONENT_TAGS:
            return f"{self.tag.replace('_', '-')}:{self.p:g}"
        return self.tag.replace("_", "-")


def Lp(p):
    return NormKind("lp", p)


def HpSquare(p):
    return NormKind("hp_square", p)


def HpMaximal(p):
    return NormKind("hp_maximal", p)


def SliceHrLr(r):
    return NormKind("slice_hr_lr", r)


BmoLine = NormKind("bmo_line")
ProductBmoExact = NormKind("product_bmo_exact")
ProductBmoHeuristic = NormKind("product_bmo_heuristic")
SliceBmoSup = NormKind("slice_bmo_sup")


# ---------------------------------------------------------------------------
# L^p
# ---------------------------------------------------------------------------

def lp_values(values, p, cell_measure, axes=None):
    """(sum |v|^p * cell)^(1/p) over ``axes`` (all by default)."""
    a = np.abs(np.asarray(values, dtype=np.float64))
    if math.isinf(p):
        return np.max(a, axis=axes)
    if p <= 0:
        raise ValueError(f"exponent must be positive, got {p}")
    return (np.sum(a**p, axis=axes) * cell_measure) ** (1.0 / p)


def lp_norm(f, p):
    p = float(p)
    if not p > 0:
        raise ValueError(f"exponent must be positive, got {p}")
    return float(lp_values(f.values, p, f.grid.cell_measure))


# ---------------------------------------------------------------------------
# maximal and square functions
# ---------------------------------------------------------------------------

def maximal_1d(f):
    return Signal1D(f.grid, kernels.maximal_last(f.values[None, :])[0])


def strong_maximal_2d(f):
    return Signal2D(f.grid, kernels.strong_maximal(f.values))


def square_from_detail(detail_heap, eps=0.0):
    """S values from 1D heap coefficients (slot 0 ignored), batched on the last axis."""
    e = np.asarray(detail_heap, dtype=np.float64) ** 2
    e[..., 0] = 0.0
    return np.sqrt(np.maximum(synth(e, -1, AVG), 0.0) + eps)


def square_from_heap(heap, eps=0.0):
    """S values from 2D heap coefficients; only the cc block enters."""
    e = np.asarray(heap, dtype=np.float64) ** 2
    e[..., 0, :] = 0.0
    e[..., :, 0] = 0.0
    s2 = synth2(e, AVG, AVG)
    return np.sqrt(np.maximum(s2, 0.0) + eps)


def square_1d(f):
    heap = haar_forward_1d(f).heap
    return Signal1D(f.grid, square_from_detail(heap))


def square_2d(f):
    return Signal2D(f.grid, square_from_heap(haar_forward_2d(f).heap))


# ---------------------------------------------------------------------------
# mixed square/maximal operators
# ---------------------------------------------------------------------------

def _s2m1(values):
    h = analyze(values, 1, HAAR)  # (x, J)
    m = kernels.maximal_last(np.ascontiguousarray(h.T)).T
    e = m**2
    e[:, 0] = 0.0
    return np.sqrt(synth(e, 1, AVG))


def _m1s2(values):
    h = analyze(values, 1, HAAR)
    h[:, 0] = 0.0
    levels = [h]
    while levels[-1].shape[0] > 1:
        a = levels[-1]
        levels.append(0.5 * (a[0::2] + a[1::2]))
    q = [np.sqrt(synth(a**2, 1, AVG)) for a in levels]
    out = q[-1]
    for lv in reversed(q[:-1]):
        out = np.maximum(np.repeat(out, 2, axis=0), lv)
    return out


MIXED_KINDS = ("S2M1", "M1S2", "S1M2", "M2S1")


def mixed_operator(f, kind):
    """One of the four mixed square-maximal operators, evaluated per cell.

    ``S2M1`` takes the maximal function in x of each y-slice coefficient
    f_J and sums squares in y; ``M1S2`` takes the sup over x-intervals of
    the averaged slice square sum. ``S1M2`` and ``M2S1`` swap the axes.
    """
    if not isinstance(f, Signal2D):
        raise DyadicError("mixed operators need a 2D signal")
    kind = kind.upper()
    if kind == "S2M1":
        return f.like(_s2m1(f.values))
    if kind == "M1S2":
        return f.like(_m1s2(f.values))
    if kind == "S1M2":
        return f.like(_s2m1(f.values.T).T)
    if kind == "M2S1":
        return f.like(_m1s2(f.values.T).T)
    raise ValueError(f"unknown mixed operator {kind!r}")


# ---------------------------------------------------------------------------
# BMO on the line
# ---------------------------------------------------------------------------

def _subtree_sums(w, axis=-1):
    """Heap subtree sums along ``axis``: s[i] = w[i] + s[2i] + s[2i+1]."""
    s = np.moveaxis(np.array(w, dtype=np.float64), axis, -1).copy()
    n = s.shape[-1]
    half = n // 2
    while half >= 2:
        parent = half // 2
        s[..., parent:half] += s[..., half:2 * half:2] + s[..., half + 1:2 * half:2]
        half = parent
    return np.moveaxis(s, -1, axis)


def _heap_inverse_measure(n):
    lv = np.zeros(n)
    for j in range(int(n).bit_length() - 1):
        lv[1 << j:2 << j] = 2.0**j
    return lv


def bmo_from_detail(detail_heap):
    """sup_I (|I|^-1 sum_{I' in I} c_I'^2)^(1/2) over the last axis."""
    d = np.asarray(detail_heap, dtype=np.float64)
    e = d**2
    e[..., 0] = 0.0
    s = _subtree_sums(e)
    s[..., 0] = 0.0
    return np.sqrt(np.max(s * _heap_inverse_measure(d.shape[-1]), axis=-1))


def bmo_line(f):
    return float(bmo_from_detail(haar_forward_1d(f).heap))


# ---------------------------------------------------------------------------
# product BMO
# ---------------------------------------------------------------------------

def _cell_bitmasks(grid):
    """Bitmask over finest cells (bit x * 2**n2 + y) for each cc rectangle."""
    n1, n2 = grid.shape
    idx = (np.arange(n1)[:, None] * n2 + np.arange(n2)[None, :]).astype(np.int64)
    bits = np.left_shift(np.int64(1), idx)
    masks = np.zeros(grid.shape, dtype=np.int64)
    for i in range(1, n1):
        lx = i.bit_length() - 1
        wx = n1 >> lx
        kx = i - (1 << lx)
        xs = slice(kx * wx, (kx + 1) * wx)
        for j in range(1, n2):
            ly = j.bit_length() - 1
            wy = n2 >> ly
            ky = j - (1 << ly)
            masks[i, j] = np.bitwise_or.reduce(bits[xs, ky * wy:(ky + 1) * wy], axis=None)
    return masks


def _cc_energy(f):
    if not isinstance(f, Signal2D):
        raise DyadicError("product BMO needs a 2D signal")
    e = haar_forward_2d(f).heap ** 2
    e[0, :] = 0.0
    e[:, 0] = 0.0
    return e


def product_bmo_exact_witness(f):
    """Exact product BMO by enumerating every union of finest cells.

    Returns ``(value, omega)`` with ``omega`` a boolean cell mask.
    """
    grid = f.grid
    if grid.n1 + grid.n2 > EXACT_BMO_CELL_CAP:
        raise GridTooLargeError("grid too large for exact product BMO")
    e = _cc_energy(f)
    masks = _cell_bitmasks(grid)[1:, 1:].ravel()
    weights = e[1:, 1:].ravel()
    num, cnt, best = kernels.subset_ratio_max(masks, weights, grid.size)
    bits = (best >> np.arange(grid.size)) & 1
    omega = bits.astype(bool).reshape(grid.shape)
    return math.sqrt(num / (cnt * grid.cell_measure)), omega


def contained_heap(omega):
    """Boolean heap array: [I, J] is True iff the cc rectangle I x J lies in omega."""
    avg = analyze2(np.asarray(omega, dtype=np.float64), AVG, AVG)
    inside = avg == 1.0
    inside[0, :] = False
    inside[:, 0] = False
    return inside


def product_bmo_at(f, omega):
    """(|omega|^-1 sum_{R in omega} f_R^2)^(1/2) for one open set omega."""
    omega = np.asarray(omega, dtype=bool)
    area = omega.sum() * f.grid.cell_measure
    if area == 0:
        raise DyadicError("omega must have positive measure")
    e = _cc_energy(f)
    return math.sqrt(float(e[contained_heap(omega)].sum()) / area)


def _rect_min_heap(field):
    """min of ``field`` over each cc rectangle, heap layout (slot 0 = +inf)."""
    n1, n2 = field.shape
    out = np.full((n1, n2), np.inf)
    for lx in range(n1.bit_length() - 1):
        a = n1 >> lx
        for ly in range(n2.bit_length() - 1):
            b = n2 >> ly
            blk = field.reshape(1 << lx, a, 1 << ly, b).min(axis=(1, 3))
            out[1 << lx:2 << lx, 1 << ly:2 << ly] = blk
    return out


def _nested_family_best(e, field, thresholds, cell):
    """Best ratio over the superlevel sets {field > t} for t in thresholds."""
    mins = _rect_min_heap(field)[1:, 1:].ravel()
    w = e[1:, 1:].ravel()
    order = np.argsort(mins)
    mins_sorted = mins[order]
    tail = np.concatenate((np.cumsum(w[order][::-1])[::-1], [0.0]))
    cells_sorted = np.sort(field.ravel())
    best = (0.0, None)
    for t in thresholds:
        count = cells_sorted.size - np.searchsorted(cells_sorted, t, side="right")
        if count == 0:
            continue
        energy = tail[np.searchsorted(mins_sorted, t, side="right")]
        r = energy / (count * cell)
        if r > best[0]:
            best = (r, t)
    return best


def product_bmo_heuristic_witness(f, use_sparse=True):
    """Lower bound for product BMO over a structured candidate family.

    Candidates: every single cc rectangle, the superlevel sets of S(f) at
    each of its distinct values, the sets {M(f) > 2**k}, and the unions of
    the 1/2-sparse families extracted from the level-set rectangles of M(f).
    Returns ``(value, omega, label)``.
    """
    grid = f.grid
    cell = grid.cell_measure
    e = _cc_energy(f)

    # single rectangles: energy of all cc rectangles inside R, over |R|
    sub = _subtree_sums(_subtree_sums(e, axis=0), axis=1)
    inv = np.outer(_heap_inverse_measure(grid.shape[0]), _heap_inverse_measure(grid.shape[1]))
    ratios = sub * inv
    ratios[0, :] = 0.0
    ratios[:, 0] = 0.0
    i, j = np.unravel_index(int(np.argmax(ratios)), ratios.shape)
    best_r = float(ratios[i, j])
    rect = DyadicRectangle(DyadicInterval.from_heap(i), DyadicInterval.from_heap(j)) if best_r > 0 else None
    best = (best_r, rect.mask(grid) if rect is not None else np.ones(grid.shape, bool), "rectangle")

    s = square_from_heap(haar_forward_2d(f).heap)
    r, t = _nested_family_best(e, s, np.unique(s)[:-1], cell)
    if r > best[0]:
        best = (r, s > t, "square-superlevel")

    m = kernels.strong_maximal(f.values)
    mpos = m[m > 0]
    ks = []
    if mpos.size:
        ks = list(range(math.ceil(math.log2(mpos.min())) - 1, math.ceil(math.log2(mpos.max()))))
        r, t = _nested_family_best(e, m, [2.0**k for k in ks], cell)
        if r > best[0]:
            best = (r, m > t, "maximal-superlevel")

    if use_sparse:
        from .sparse import family_union, level_set_rectangles, sparse_extract

        for k in ks:
            fam = level_set_rectangles(f, 2.0**k)
            if not fam.rects:
                continue
            omega = family_union(sparse_extract(fam).base)
            area = omega.sum() * cell
            r = float(e[contained_heap(omega)].sum()) / area
            if r > best[0]:
                best = (r, omega, "sparse-union")
    return math.sqrt(best[0]), best[1], best[2]


def product_bmo_exact(f):
    return product_bmo_exact_witness(f)[0]


def product_bmo_heuristic(f):
    return product_bmo_heuristic_witness(f)[0]


# ---------------------------------------------------------------------------
# slice-mixed norms
# ---------------------------------------------------------------------------

def slice_bmo_sup(f):
    """max over finest y-cells of the line BMO norm of x -> f(x, y)."""
    d = analyze(f.values, 0, HAAR)  # (I, y)
    return float(np.max(bmo_from_detail(np.ascontiguousarray(d.T))))


def slice_hr_lr(f, r):
    """(int int (sum_I f_I(y)^2 chi_I(x)/|I|)^(r/2) dx dy)^(1/r)."""
    d = analyze(f.values, 0, HAAR)
    s = square_from_detail(np.ascontiguousarray(d.T))  # (y, x)
    return float(lp_values(s, r, f.grid.cell_measure))


# ---------------------------------------------------------------------------
# dispatcher
# ---------------------------------------------------------------------------

def norm(f, kind):
    if isinstance(kind, str):
        kind = NormKind.parse(kind)
    tag, p = kind.tag, kind.p
    if tag == "lp":
        return lp_norm(f, p)
    if tag == "hp_square":
        s = square_1d(f) if isinstance(f, Signal1D) else square_2d(f)
        return lp_norm(s, p)
    if tag == "hp_maximal":
        m = maximal_1d(f) if isinstance(f, Signal1D) else strong_maximal_2d(f)
        return lp_norm(m, p)
    if tag == "bmo_line":
        if not isinstance(f, Signal1D):
            raise DyadicError("bmo-line needs a 1D signal")
        return bmo_line(f)
    if not isinstance(f, Signal2D):
        raise DyadicError(f"{kind} needs a 2D signal")
    if tag == "product_bmo_exact":
        return product_bmo_exact(f)
    if tag == "product_bmo_heuristic":
        return product_bmo_heuristic(f)
    if tag == "slice_bmo_sup":
        return slice_bmo_sup(f)
    return slice_hr_lr(f, p)
