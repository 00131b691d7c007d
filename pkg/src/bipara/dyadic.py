"""Dyadic geometry on [0,1) and [0,1)^2, signals, and exact Haar analysis.

Signals are piecewise constant on the finest cells of a dyadic grid.
``Signal2D.values`` has shape ``(2**n1, 2**n2)`` with the x cell as the
first index, so ``values.ravel()`` is the x-major row order used on disk.

Haar functions are L2-normalized with the sign convention
``h_I = |I|**-0.5 * (chi_left - chi_right)``. Coefficients are stored in
a heap layout per axis (see :mod:`bipara.kernels`): slot 0 is the global
mean and slot ``2**j + k`` is the coefficient of the interval ``(j, k)``.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import kernels

MAX_RESOLUTION = 16

HAAR = 1
AVG = 0


class DyadicError(ValueError):
    """Base class for invalid dyadic inputs."""


class GridMismatchError(DyadicError):
    pass


class SubgridRegionError(DyadicError):
    pass


def _log2_exact(n):
    n = int(n)
    if n < 1 or n & (n - 1):
        raise DyadicError(f"length {n} is not a power of two")
    return n.bit_length() - 1


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class DyadicInterval:
    """``[index * 2**-level, (index + 1) * 2**-level)``."""

    level: int
    index: int

    def __post_init__(self):
        if self.level < 0:
            raise DyadicError(f"negative level {self.level}")
        if not 0 <= self.index < (1 << self.level):
            raise DyadicError(f"index {self.index} out of range for level {self.level}")

    @property
    def measure(self):
        return 2.0 ** -self.level

    @property
    def heap_index(self):
        return (1 << self.level) + self.index

    @classmethod
    def from_heap(cls, i):
        level = int(i).bit_length() - 1
        return cls(level, int(i) - (1 << level))

    def contains(self, other):
        if other.level < self.level:
            return False
        return (other.index >> (other.level - self.level)) == self.index

    def cells(self, resolution):
        """Slice of finest-cell indices covered on a grid of ``resolution``."""
        if self.level > resolution:
            raise SubgridRegionError("subgrid region")
        w = 1 << (resolution - self.level)
        return slice(self.index * w, (self.index + 1) * w)

    def children(self):
        return DyadicInterval(self.level + 1, 2 * self.index), DyadicInterval(self.level + 1, 2 * self.index + 1)


ROOT = DyadicInterval(0, 0)


@dataclass(frozen=True, order=True)
class DyadicRectangle:
    ix: DyadicInterval
    iy: DyadicInterval

    @classmethod
    def from_levels(cls, lx, kx, ly, ky):
        return cls(DyadicInterval(lx, kx), DyadicInterval(ly, ky))

    @property
    def measure(self):
        return 2.0 ** -(self.ix.level + self.iy.level)

    @property
    def levels(self):
        return self.ix.level, self.iy.level

    def key(self):
        return (self.ix.level, self.ix.index, self.iy.level, self.iy.index)

    def contains(self, other):
        return self.ix.contains(other.ix) and self.iy.contains(other.iy)

    def cells(self, grid):
        return self.ix.cells(grid.n1), self.iy.cells(grid.n2)

    def mask(self, grid):
        m = np.zeros(grid.shape, dtype=bool)
        m[self.cells(grid)] = True
        return m

    def ncells(self, grid):
        return 1 << ((grid.n1 - self.ix.level) + (grid.n2 - self.iy.level))


ROOT_SQUARE = DyadicRectangle(ROOT, ROOT)


@dataclass(frozen=True)
class Grid1D:
    n: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_RESOLUTION:
            raise DyadicError(f"resolution {self.n} outside [1, {MAX_RESOLUTION}]")

    @property
    def size(self):
        return 1 << self.n

    @property
    def shape(self):
        return (self.size,)

    @property
    def cell_measure(self):
        return 2.0 ** -self.n

    @property
    def resolution(self):
        return (self.n,)


@dataclass(frozen=True)
class Grid2D:
    n1: int
    n2: int

    def __post_init__(self):
        for n in (self.n1, self.n2):
            if not 1 <= n <= MAX_RESOLUTION:
                raise DyadicError(f"resolution {n} outside [1, {MAX_RESOLUTION}]")

    @property
    def shape(self):
        return (1 << self.n1, 1 << self.n2)

    @property
    def size(self):
        return 1 << (self.n1 + self.n2)

    @property
    def cell_measure(self):
        return 2.0 ** -(self.n1 + self.n2)

    @property
    def resolution(self):
        return (self.n1, self.n2)

    def refine(self, by=1):
        return Grid2D(self.n1 + by, self.n2 + by)


def intervals(resolution):
    """All cancellative intervals (level < resolution) in heap order."""
    return [DyadicInterval.from_heap(i) for i in range(1, 1 << resolution)]


def rectangles(grid):
    """All cancellative rectangles of ``grid`` in (x heap, y heap) order."""
    return [DyadicRectangle(I, J) for I in intervals(grid.n1) for J in intervals(grid.n2)]


# ---------------------------------------------------------------------------
# signals and coefficients
# ---------------------------------------------------------------------------

def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Signal1D:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values).reshape(-1)
        if v.shape != self.grid.shape:
            raise DyadicError(f"expected {self.grid.size} values, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise DyadicError("signal values must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, values):
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        return cls(Grid1D(_log2_exact(values.size)), values)

    def like(self, values):
        return Signal1D(self.grid, values)

    @property
    def dims(self):
        return 1

    def __add__(self, other):
        _same_grid(self, other)
        return self.like(self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return self.like(self.values - other.values)

    def __mul__(self, c):
        return self.like(self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self.like(-self.values)


@dataclass(frozen=True, eq=False)
class Signal2D:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim == 1 and v.size == self.grid.size:
            v = v.reshape(self.grid.shape)
            v.setflags(write=False)
        if v.shape != self.grid.shape:
            raise DyadicError(f"expected shape {self.grid.shape}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DyadicError("signal values must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, values):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2:
            raise DyadicError("2D signal values must be a 2D array")
        return cls(Grid2D(_log2_exact(values.shape[0]), _log2_exact(values.shape[1])), values)

    def like(self, values):
        return Signal2D(self.grid, values)

    @property
    def dims(self):
        return 2

    def transpose(self):
        return Signal2D(Grid2D(self.grid.n2, self.grid.n1), self.values.T)

    def refine(self, by=1):
        """Same function sampled on a grid ``by`` generations finer."""
        f = 1 << by
        return Signal2D(self.grid.refine(by), np.repeat(np.repeat(self.values, f, axis=0), f, axis=1))

    def __add__(self, other):
        _same_grid(self, other)
        return self.like(self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return self.like(self.values - other.values)

    def __mul__(self, c):
        return self.like(self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return self.like(-self.values)


Signal = Union[Signal1D, Signal2D]


def _same_grid(a, b):
    if type(a) is not type(b) or a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


@dataclass(frozen=True, eq=False)
class HaarCoeffs1D:
    """``mean`` = <f>_[0,1); ``detail[2**j - 1 + k]`` = <f, h_(j,k)>."""

    grid: Grid1D
    mean: float
    detail: np.ndarray

    def __post_init__(self):
        d = _frozen(self.detail).reshape(-1)
        if d.size != self.grid.size - 1:
            raise DyadicError(f"expected {self.grid.size - 1} detail entries, got {d.size}")
        object.__setattr__(self, "detail", d)
        object.__setattr__(self, "mean", float(self.mean))

    @classmethod
    def from_heap(cls, grid, heap):
        heap = np.asarray(heap, dtype=np.float64)
        return cls(grid, heap[0], heap[1:])

    @property
    def heap(self):
        return np.concatenate(([self.mean], self.detail))

    def __getitem__(self, interval):
        if interval.level >= self.grid.n:
            return 0.0
        return float(self.detail[interval.heap_index - 1])


@dataclass(frozen=True, eq=False)
class HaarCoeffs2D:
    """Tensor Haar coefficients stored as one heap-by-heap array.

    ``heap[i, j]`` pairs x slot ``i`` with y slot ``j``; the four blocks are
    ``cc = heap[1:, 1:]``, ``cm = heap[1:, 0]`` (x cancellative, y mean),
    ``mc = heap[0, 1:]`` and ``mm = heap[0, 0]``.
    """

    grid: Grid2D
    heap: np.ndarray

    def __post_init__(self):
        h = _frozen(self.heap)
        if h.shape != self.grid.shape:
            raise DyadicError(f"expected coefficient shape {self.grid.shape}, got {h.shape}")
        object.__setattr__(self, "heap", h)

    @classmethod
    def from_blocks(cls, grid, cc=None, cm=None, mc=None, mm=0.0):
        h = np.zeros(grid.shape)
        if cc is not None:
            h[1:, 1:] = cc
        if cm is not None:
            h[1:, 0] = cm
        if mc is not None:
            h[0, 1:] = mc
        h[0, 0] = mm
        return cls(grid, h)

    @property
    def cc(self):
        return self.heap[1:, 1:]

    @property
    def cm(self):
        return self.heap[1:, 0]

    @property
    def mc(self):
        return self.heap[0, 1:]

    @property
    def mm(self):
        return float(self.heap[0, 0])

    def cc_only(self):
        return HaarCoeffs2D.from_blocks(self.grid, cc=self.cc)

    def __getitem__(self, rect):
        if rect.ix.level >= self.grid.n1 or rect.iy.level >= self.grid.n2:
            return 0.0
        return float(self.heap[rect.ix.heap_index, rect.iy.heap_index])


@dataclass(frozen=True, eq=False)
class SliceCoeffs:
    """Per-interval coefficient signals along one axis.

    For ``axis == "y"``, ``slices[J.heap_index - 1]`` holds ``f_J(x)`` and
    ``mean_slice`` holds ``int f(x, y) dy``. For ``axis == "x"`` the roles of
    the variables swap.
    """

    axis: str
    grid: Grid2D
    slices: np.ndarray
    mean_slice: np.ndarray

    def _other_grid(self):
        return Grid1D(self.grid.n1 if self.axis == "y" else self.grid.n2)

    def __getitem__(self, interval):
        return Signal1D(self._other_grid(), self.slices[interval.heap_index - 1])

    def mean(self):
        return Signal1D(self._other_grid(), self.mean_slice)

    def __len__(self):
        return self.slices.shape[0]


# ---------------------------------------------------------------------------
# axis helpers shared by the other modules
# ---------------------------------------------------------------------------

_ANALYZE = {HAAR: "analyze_haar", AVG: "analyze_avg"}
_SYNTH = {HAAR: "synth_haar", AVG: "synth_avg"}


def axis_apply(arr, axis, name):
    """Run the 1D kernel ``name`` along ``axis`` of an array of any rank."""
    fn = getattr(kernels, name)
    arr = np.asarray(arr, dtype=np.float64)
    moved = np.moveaxis(arr, axis, -1)
    flat = moved.reshape(-1, moved.shape[-1])
    out = fn(flat).reshape(moved.shape)
    return np.moveaxis(out, -1, axis)


def analyze(arr, axis, kind):
    return axis_apply(arr, axis, _ANALYZE[kind])


def synth(arr, axis, kind):
    return axis_apply(arr, axis, _SYNTH[kind])


def analyze2(values, kx, ky):
    """Heap array of <f, h^kx_I (x) h^ky_J> for all (I, J), kinds 0/1 per axis."""
    return analyze(analyze(values, -2, kx), -1, ky)


def synth2(heap, kx, ky):
    """Signal values of sum_{I,J} c_IJ h^kx_I (x) h^ky_J (slot 0 = constant)."""
    return synth(synth(heap, -1, ky), -2, kx)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def haar_forward_1d(f):
    heap = kernels.analyze_haar(f.values[None, :])[0]
    return HaarCoeffs1D.from_heap(f.grid, heap)


def haar_inverse_1d(c):
    return Signal1D(c.grid, kernels.synth_haar(c.heap[None, :])[0])


def haar_forward_2d(f):
    return HaarCoeffs2D(f.grid, analyze2(f.values, HAAR, HAAR))


def haar_inverse_2d(c):
    return Signal2D(c.grid, synth2(c.heap, HAAR, HAAR))


def slice_transform(f, axis="y"):
    """Haar-transform each fibre of ``f`` along ``axis``.

    ``axis="y"`` gives ``f_J(x) = <f(x, .), h_J>``; ``axis="x"`` gives
    ``f_I(y) = <f(., y), h_I>``.
    """
    if axis == "y":
        heap = analyze(f.values, 1, HAAR)  # (x, J)
        return SliceCoeffs("y", f.grid, heap[:, 1:].T.copy(), heap[:, 0].copy())
    if axis == "x":
        heap = analyze(f.values, 0, HAAR)  # (I, y)
        return SliceCoeffs("x", f.grid, heap[1:, :].copy(), heap[0, :].copy())
    raise DyadicError(f"axis must be 'x' or 'y', got {axis!r}")


def average_over(f, region):
    if isinstance(f, Signal1D):
        if not isinstance(region, DyadicInterval):
            raise DyadicError("1D signals are averaged over dyadic intervals")
        return float(np.mean(f.values[region.cells(f.grid.n)]))
    if not isinstance(region, DyadicRectangle):
        raise DyadicError("2D signals are averaged over dyadic rectangles")
    return float(np.mean(f.values[region.cells(f.grid)]))


def inner_product(f, g):
    _same_grid(f, g)
    return float(np.sum(f.values * g.values) * f.grid.cell_measure)


# ---------------------------------------------------------------------------
# elementary signals
# ---------------------------------------------------------------------------

def haar_function_1d(interval, grid):
    v = np.zeros(grid.shape)
    s = interval.cells(grid.n)
    w = s.stop - s.start
    if w < 2:
        raise SubgridRegionError("subgrid region")
    amp = interval.measure ** -0.5
    v[s.start:s.start + w // 2] = amp
    v[s.start + w // 2:s.stop] = -amp
    return Signal1D(grid, v)


def haar_function_2d(rect, grid):
    hx = haar_function_1d(rect.ix, Grid1D(grid.n1)).values
    hy = haar_function_1d(rect.iy, Grid1D(grid.n2)).values
    return Signal2D(grid, np.outer(hx, hy))


def indicator_1d(interval, grid):
    v = np.zeros(grid.shape)
    v[interval.cells(grid.n)] = 1.0
    return Signal1D(grid, v)


def indicator_2d(rect, grid):
    return Signal2D(grid, rect.mask(grid).astype(float))


def constant(grid, c=1.0):
    if isinstance(grid, Grid1D):
        return Signal1D(grid, np.full(grid.shape, float(c)))
    return Signal2D(grid, np.full(grid.shape, float(c)))


def tensor(b, c):
    """The function b(x) c(y) from two 1D signals."""
    return Signal2D(Grid2D(b.grid.n, c.grid.n), np.outer(b.values, c.values))
