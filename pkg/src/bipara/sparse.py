"""Carleson and sparse rectangle families, level-set rectangles, and the
atomic decomposition of product Hardy space functions.

Open sets are boolean masks over the finest cells of a :class:`Grid2D`.
"""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from . import kernels
from .dyadic import (
    HAAR,
    DyadicError,
    DyadicInterval,
    DyadicRectangle,
    Grid2D,
    Signal2D,
    haar_forward_2d,
    synth2,
)
from .functionals import GridTooLargeError, contained_heap, lp_values, square_from_heap

SUBFAMILY_CAP = 16
CELL_SUBSET_CAP = 4  # n1 + n2


class ContractingError(DyadicError):
    pass


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RectFamily:
    grid: Grid2D
    rects: Tuple[DyadicRectangle, ...]
    labels: Optional[Dict[DyadicRectangle, int]] = None

    def __post_init__(self):
        rects = tuple(self.rects)
        if len(set(rects)) != len(rects):
            raise DyadicError("duplicate rectangles in family")
        for R in rects:
            if R.ix.level > self.grid.n1 or R.iy.level > self.grid.n2:
                raise DyadicError(f"rectangle {R.key()} is finer than the grid")
        if self.labels is not None and set(self.labels) != set(rects):
            raise DyadicError("labels must be defined on every rectangle")
        object.__setattr__(self, "rects", rects)

    def __len__(self):
        return len(self.rects)

    def cover(self):
        """(m, ncells) boolean matrix of rectangle membership."""
        out = np.zeros((len(self.rects), self.grid.size), dtype=bool)
        for r, R in enumerate(self.rects):
            out[r] = R.mask(self.grid).ravel()
        return out

    def measures(self):
        return np.array([R.measure for R in self.rects])


def family_union(fam):
    m = np.zeros(fam.grid.shape, dtype=bool)
    for R in fam.rects:
        m[R.cells(fam.grid)] = True
    return m


def overlap_count(fam):
    c = np.zeros(fam.grid.shape, dtype=np.int64)
    for R in fam.rects:
        c[R.cells(fam.grid)] += 1
    return c


@dataclass(frozen=True, eq=False)
class SparseFamily:
    """A family with pairwise disjoint witness sets E_R (flat cell indices)."""

    base: RectFamily
    witness: Dict[DyadicRectangle, np.ndarray]
    eta: float = 0.5
    union_ratio: float = 1.0

    def is_sparse(self):
        """Exact check of disjointness and |E_R| >= eta |R| by cell counting."""
        grid = self.base.grid
        seen = np.zeros(grid.size, dtype=bool)
        for R in self.base.rects:
            E = np.asarray(self.witness[R], dtype=np.int64)
            if E.size != np.unique(E).size or seen[E].any():
                return False
            if not R.mask(grid).ravel()[E].all():
                return False
            # integer counts: |E| >= eta |R|  <=>  |E| >= eta * ncells(R)
            if E.size < self.eta * R.ncells(grid):
                return False
            seen[E] = True
        return True


def sparse_extract(fam):
    """Greedy 1/2-sparse subfamily.

    Rectangles are visited by decreasing measure (ties broken by
    ``(lx, kx, ly, ky)``); R is kept when at least half its cells are not
    yet covered by kept rectangles, and those cells become E_R.
    """
    grid = fam.grid
    order = sorted(fam.rects, key=lambda R: (R.ix.level + R.iy.level,) + R.key())
    covered = np.zeros(grid.size, dtype=bool)
    kept = []
    witness = {}
    for R in order:
        cells = np.flatnonzero(R.mask(grid).ravel())
        free = cells[~covered[cells]]
        if 2 * free.size >= cells.size:
            kept.append(R)
            witness[R] = free
            covered[cells] = True
    all_union = family_union(fam).sum()
    ratio = covered.sum() / all_union if all_union else 1.0
    labels = None if fam.labels is None else {R: fam.labels[R] for R in kept}
    return SparseFamily(RectFamily(grid, tuple(kept), labels), witness, 0.5, float(ratio))


# ---------------------------------------------------------------------------
# Carleson constant
# ---------------------------------------------------------------------------

def _greedy_carleson(fam):
    cover = fam.cover().astype(np.float64)
    w = fam.measures()
    cell = fam.grid.cell_measure
    sizes = cover.sum(axis=1)
    # start from the rectangle whose own region scores best
    inside = (cover @ cover.T) == sizes[:, None]  # inside[r, c]: rect r within rect c
    start = (w @ inside) / (sizes * cell)
    c0 = int(np.argmax(start))
    omega = cover[c0].astype(bool)
    best = float(start[c0])
    while True:
        out = ~omega
        outside = cover[:, out].sum(axis=1)  # cells of each rect outside omega
        # cells of rect r outside (omega u rect c) = outside[r] - |r n c n out|
        shared = cover[:, out] @ cover[:, out].T
        remaining = outside[:, None] - shared  # [r, c]
        num = w @ (remaining == 0)
        area = omega.sum() + outside
        ratios = num / (area * cell)
        c = int(np.argmax(ratios))
        if ratios[c] <= best * (1 + 1e-15):
            break
        best = float(ratios[c])
        omega = omega | cover[c].astype(bool)
    return best, omega.reshape(fam.grid.shape)


def carleson_witness(fam, mode="exact"):
    """Packing constant max_Omega sum_{R in Omega} |R| / |Omega| and a maximizer.

    ``exact`` enumerates all unions of subfamilies (at most 16 rectangles)
    or all unions of finest cells (grids with n1 + n2 <= 4). ``restricted``
    enumerates subfamilies when possible and otherwise adds rectangles
    greedily while the ratio improves; it never exceeds ``exact``.
    """
    if not fam.rects:
        return 0.0, np.zeros(fam.grid.shape, dtype=bool)
    grid = fam.grid
    cell = grid.cell_measure
    w = fam.measures()
    if len(fam) <= SUBFAMILY_CAP:
        num, cnt, chosen = kernels.subfamily_ratio_max(fam.cover(), w)
        members = [r for r in range(len(fam)) if (chosen >> r) & 1]
        omega = fam.cover()[members].any(axis=0).reshape(grid.shape)
        return num / (cnt * cell), omega
    if mode == "exact":
        if grid.n1 + grid.n2 > CELL_SUBSET_CAP:
            raise GridTooLargeError("family too large for exact Carleson constant")
        n2 = grid.shape[1]
        masks = []
        for R in fam.rects:
            sx, sy = R.cells(grid)
            bits = 0
            for x in range(sx.start, sx.stop):
                for y in range(sy.start, sy.stop):
                    bits |= 1 << (x * n2 + y)
            masks.append(bits)
        num, cnt, best = kernels.subset_ratio_max(np.array(masks, dtype=np.int64), w, grid.size)
        omega = (((best >> np.arange(grid.size)) & 1) == 1).reshape(grid.shape)
        return num / (cnt * cell), omega
    if mode == "restricted":
        return _greedy_carleson(fam)
    raise ValueError(f"unknown Carleson mode {mode!r}")


def carleson_constant(fam, mode="exact"):
    return carleson_witness(fam, mode)[0]


def first_generations_family(n, grid=None):
    """All rectangles with both levels below n."""
    grid = grid or Grid2D(max(n, 1), max(n, 1))
    rects = [
        DyadicRectangle(DyadicInterval(i, a), DyadicInterval(j, b))
        for i in range(n)
        for j in range(n)
        for a in range(1 << i)
        for b in range(1 << j)
    ]
    return RectFamily(grid, tuple(rects))


def jn_profile(sf, p):
    """||sum_R chi_R||_p / |union R|^(1/p) for a sparse family."""
    p = float(p)
    if not p > 0:
        raise ValueError(f"exponent must be positive, got {p}")
    fam = sf.base if isinstance(sf, SparseFamily) else sf
    counts = overlap_count(fam)
    area = (counts > 0).sum() * fam.grid.cell_measure
    if area == 0:
        return 0.0
    return float(lp_values(counts, p, fam.grid.cell_measure)) / area ** (1.0 / p)


# ---------------------------------------------------------------------------
# level sets of the strong maximal function
# ---------------------------------------------------------------------------

def _average_pyramid(values):
    """avgs[jx][jy] with shape (2**jx, 2**jy), computed in kernel order."""
    xs = [values]
    v = values
    while v.shape[0] > 1:
        v = 0.5 * (v[0::2] + v[1::2])
        xs.append(v)
    xs.reverse()
    out = []
    for block in xs:
        ys = [block]
        b = block
        while b.shape[1] > 1:
            b = 0.5 * (b[:, 0::2] + b[:, 1::2])
            ys.append(b)
        ys.reverse()
        out.append(ys)
    return out


def level_set_rectangles(g, threshold):
    """Maximal dyadic rectangles R with |<g>_R| > threshold.

    Their union is exactly {strong_maximal_2d(g) > threshold}.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    avgs = _average_pyramid(np.asarray(g.values, dtype=np.float64))
    rects = []
    qual_prev = cov_prev = None
    for jx, row in enumerate(avgs):
        qual_row, cov_row = [], []
        for jy, a in enumerate(row):
            q = np.abs(a) > threshold
            c = np.zeros_like(q)
            if jx > 0:
                c |= np.repeat(qual_prev[jy] | cov_prev[jy], 2, axis=0)
            if jy > 0:
                c |= np.repeat(qual_row[jy - 1] | cov_row[jy - 1], 2, axis=1)
            for kx, ky in zip(*np.nonzero(q & ~c)):
                rects.append(DyadicRectangle(DyadicInterval(jx, int(kx)), DyadicInterval(jy, int(ky))))
            qual_row.append(q)
            cov_row.append(c)
        qual_prev, cov_prev = qual_row, cov_row
    return RectFamily(g.grid, tuple(rects))


# ---------------------------------------------------------------------------
# contracting families and atoms
# ---------------------------------------------------------------------------

def validate_contracting(omegas):
    for i in range(len(omegas) - 1):
        a, b = np.asarray(omegas[i], bool), np.asarray(omegas[i + 1], bool)
        if (b & ~a).any():
            raise ContractingError(f"set {i + 1} is not contained in set {i}")
        if 2 * b.sum() > a.sum():
            raise ContractingError(f"set {i + 1} is more than half of set {i}")


def contracting_family_maximal(g, omegas):
    """sup over the sets containing each cell of the average of |g| over that set."""
    validate_contracting(omegas)
    out = np.zeros(g.grid.shape)
    a = np.abs(g.values)
    for om in omegas:
        om = np.asarray(om, bool)
        if om.any():
            out[om] = np.maximum(out[om], a[om].mean())
    return g.like(out)


@dataclass(frozen=True, eq=False)
class Atom:
    """sum_{R in support} c_R h_R with ||.||_{L^s} <= |support|^(1/s)."""

    grid: Grid2D
    support: np.ndarray
    coeffs: np.ndarray  # full heap array, only the cc block is used
    s: float

    def signal(self):
        h = np.zeros(self.grid.shape)
        h[1:, 1:] = self.coeffs[1:, 1:]
        return Signal2D(self.grid, synth2(h, HAAR, HAAR))

    def measure(self):
        return float(np.count_nonzero(self.support)) * self.grid.cell_measure

    def check(self, slack=1e-12):
        """Coefficient support inside the set and the L^s size bound."""
        nz = np.abs(self.coeffs) > 0
        nz[0, :] = False
        nz[:, 0] = False
        if (nz & ~contained_heap(self.support)).any():
            return False
        size = float(lp_values(self.signal().values, self.s, self.grid.cell_measure))
        return size <= self.measure() ** (1.0 / self.s) * (1 + slack) + slack


@dataclass(frozen=True, eq=False)
class AtomicDecomposition:
    grid: Grid2D
    omegas: list
    scalars: np.ndarray
    atoms: list
    p: float
    s: float

    def __len__(self):
        return len(self.atoms)

    def reconstruct(self):
        v = np.zeros(self.grid.shape)
        for a, atom in zip(self.scalars, self.atoms):
            v += a * atom.signal().values
        return Signal2D(self.grid, v)

    def size(self):
        """(sum_i a_i^p |Omega_i|)^(1/p)."""
        meas = np.array([np.count_nonzero(o) * self.grid.cell_measure for o in self.omegas])
        return float(np.sum(np.asarray(self.scalars) ** self.p * meas) ** (1.0 / self.p))


def atomic_decompose(f, p, s):
    """Split the cc part of f into L^s atoms on a contracting family.

    The sets are superlevel sets {S(f) > 2**k}, thinned so that each kept
    set has at most half the measure of the previous one. Atom i gathers the
    rectangles inside Omega_i but not inside Omega_(i+1).
    """
    p, s = float(p), float(s)
    if not (p > 0 and s > max(1.0, p)):
        raise ValueError("need p > 0 and s > max(1, p)")
    grid = f.grid
    heap = haar_forward_2d(f).heap.copy()
    heap[0, :] = 0.0
    heap[:, 0] = 0.0
    if not np.any(heap):
        return AtomicDecomposition(grid, [], np.zeros(0), [], p, s)
    S = square_from_heap(heap)
    pos = S[S > 0]
    k0 = math.ceil(math.log2(pos.min())) - 1
    k1 = math.ceil(math.log2(pos.max())) - 1
    omegas = [S > 2.0**k0]
    for k in range(k0 + 1, k1 + 1):
        cand = S > 2.0**k
        n = np.count_nonzero(cand)
        if n and 2 * n <= np.count_nonzero(omegas[-1]):
            omegas.append(cand)
    inside = [contained_heap(o) for o in omegas] + [np.zeros(grid.shape, bool)]
    scalars, atoms = [], []
    for i, om in enumerate(omegas):
        shell = np.where(inside[i] & ~inside[i + 1], heap, 0.0)
        vals = synth2(shell, HAAR, HAAR)
        meas = np.count_nonzero(om) * grid.cell_measure
        a = float(lp_values(vals, s, grid.cell_measure)) / meas ** (1.0 / s)
        if a > 0:
            shell = shell / a
        scalars.append(a)
        atoms.append(Atom(grid, om, shell, s))
    return AtomicDecomposition(grid, omegas, np.array(scalars), atoms, p, s)


@dataclass(frozen=True)
class LocalImageReport:
    support_contained: bool
    outside_max: float
    ratio: float
    q: float


def local_image_check(op, atom, q):
    """Check that op maps the atom into a function supported on the atom's set."""
    q = float(q)
    if not 1 < q < atom.s:
        raise ValueError(f"q must lie in (1, {atom.s})")
    if op.tag not in ("Pi3", "Pi4"):
        raise ValueError("local image check is defined for Pi3 and Pi4")
    image = op.apply(atom.signal()).values
    scale = max(1.0, float(np.abs(image).max(initial=0.0)))
    outside = float(np.abs(image[~atom.support]).max(initial=0.0))
    meas = atom.measure()
    ratio = float(lp_values(image, q, atom.grid.cell_measure)) / meas ** (1.0 / q) if meas else 0.0
    return LocalImageReport(outside <= 1e-12 * scale, outside, ratio, q)
