import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from bipara import (
    DyadicError,
    DyadicInterval,
    DyadicRectangle,
    Grid1D,
    Grid2D,
    GridMismatchError,
    HaarCoeffs2D,
    Signal1D,
    Signal2D,
    SubgridRegionError,
    average_over,
    haar_forward_1d,
    haar_forward_2d,
    haar_inverse_1d,
    haar_inverse_2d,
    inner_product,
    slice_transform,
)
from bipara.dyadic import (
    haar_function_1d,
    haar_function_2d,
    indicator_2d,
    intervals,
    rectangles,
    tensor,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def line_values(max_n=6):
    return st.integers(1, max_n).flatmap(lambda n: arrays(np.float64, 1 << n, elements=finite))


def plane_values(max_n=4):
    return st.tuples(st.integers(1, max_n), st.integers(1, max_n)).flatmap(
        lambda s: arrays(np.float64, (1 << s[0], 1 << s[1]), elements=finite)
    )


class TestIntervals:
    def test_heap_index_roundtrip(self):
        for j in range(6):
            for k in range(1 << j):
                I = DyadicInterval(j, k)
                assert DyadicInterval.from_heap(I.heap_index) == I

    def test_measure_and_containment(self):
        I = DyadicInterval(1, 1)
        assert I.measure == 0.5
        assert I.contains(DyadicInterval(3, 7))
        assert not I.contains(DyadicInterval(3, 3))
        assert I.children() == (DyadicInterval(2, 2), DyadicInterval(2, 3))

    def test_rejects_out_of_range_index(self):
        with pytest.raises(DyadicError):
            DyadicInterval(2, 4)

    def test_rectangle_measure_and_cells(self):
        R = DyadicRectangle.from_levels(1, 0, 2, 3)
        grid = Grid2D(3, 3)
        assert R.measure == 0.125
        assert R.mask(grid).sum() == R.ncells(grid) == 8

    def test_enumeration_counts(self):
        assert len(intervals(4)) == 15
        assert len(rectangles(Grid2D(2, 3))) == 3 * 7


class TestGrids:
    def test_non_power_of_two_rejected(self):
        with pytest.raises(DyadicError):
            Signal1D.from_values(np.ones(6))

    def test_grid_mismatch(self):
        a = Signal2D.from_values(np.ones((4, 4)))
        b = Signal2D.from_values(np.ones((4, 8)))
        with pytest.raises(GridMismatchError):
            inner_product(a, b)

    def test_refine_preserves_averages(self, rng):
        f = Signal2D.from_values(rng.standard_normal((4, 8)))
        g = f.refine(1)
        assert g.grid == Grid2D(3, 4)
        R = DyadicRectangle.from_levels(1, 1, 2, 0)
        assert average_over(g, R) == pytest.approx(average_over(f, R))


class TestHaarFunctions:
    def test_coefficients_match_direct_integrals(self, rng):
        v = rng.standard_normal(16)
        c = haar_forward_1d(Signal1D.from_values(v))
        for I in oracles.intervals(4):
            assert c[DyadicInterval(*I)] == pytest.approx(oracles.coeff_1d(v, I), abs=1e-12)
        assert c.mean == pytest.approx(v.mean())

    def test_2d_coefficients_match_direct_integrals(self, rng):
        v = rng.standard_normal((8, 4))
        c = haar_forward_2d(Signal2D.from_values(v))
        for I in oracles.intervals(3):
            for J in oracles.intervals(2):
                R = DyadicRectangle(DyadicInterval(*I), DyadicInterval(*J))
                assert c[R] == pytest.approx(oracles.coeff_2d(v, I, J), abs=1e-12)

    def test_haar_function_is_positive_on_left_half(self):
        h = haar_function_1d(DyadicInterval(1, 0), Grid1D(3)).values
        assert np.array_equal(h, oracles.haar(3, (1, 0)))
        assert h[0] > 0 > h[3]

    def test_haar_function_orthonormal(self):
        grid = Grid2D(2, 2)
        rs = rectangles(grid)
        gram = np.array([[inner_product(haar_function_2d(a, grid), haar_function_2d(b, grid)) for b in rs] for a in rs])
        assert np.allclose(gram, np.eye(len(rs)), atol=1e-14)

    def test_subgrid_region(self):
        with pytest.raises(SubgridRegionError):
            haar_function_1d(DyadicInterval(3, 0), Grid1D(3))

    def test_single_rectangle_coefficient(self):
        grid = Grid2D(3, 3)
        R = DyadicRectangle.from_levels(1, 1, 2, 2)
        c = haar_forward_2d(haar_function_2d(R, grid))
        assert c[R] == pytest.approx(1.0)
        assert np.count_nonzero(np.abs(c.heap) > 1e-14) == 1


class TestTransforms:
    @given(line_values())
    def test_roundtrip_1d(self, v):
        f = Signal1D.from_values(v)
        assert np.allclose(haar_inverse_1d(haar_forward_1d(f)).values, v, atol=1e-9)

    @given(plane_values())
    def test_roundtrip_2d(self, v):
        f = Signal2D.from_values(v)
        assert np.allclose(haar_inverse_2d(haar_forward_2d(f)).values, v, atol=1e-9)

    @given(plane_values())
    def test_parseval_2d(self, v):
        c = haar_forward_2d(Signal2D.from_values(v))
        assert np.sum(c.heap**2) == pytest.approx(np.mean(v**2), rel=1e-10, abs=1e-9)

    @given(line_values(5), line_values(5))
    def test_linearity(self, a, b):
        if a.size != b.size:
            return
        fa, fb = Signal1D.from_values(a), Signal1D.from_values(b)
        lhs = haar_forward_1d(fa + 2.0 * fb).heap
        rhs = haar_forward_1d(fa).heap + 2.0 * haar_forward_1d(fb).heap
        assert np.allclose(lhs, rhs, atol=1e-9)

    def test_blocks(self, rng):
        f = Signal2D.from_values(rng.standard_normal((4, 4)))
        c = haar_forward_2d(f)
        assert c.mm == pytest.approx(f.values.mean())
        rebuilt = HaarCoeffs2D.from_blocks(f.grid, cc=c.cc, cm=c.cm, mc=c.mc, mm=c.mm)
        assert np.array_equal(rebuilt.heap, c.heap)
        # the cc part alone has zero mean along every x line and y line
        g = haar_inverse_2d(c.cc_only()).values
        assert np.allclose(g.sum(axis=0), 0) and np.allclose(g.sum(axis=1), 0)

    def test_slice_transform(self, rng):
        v = rng.standard_normal((8, 8))
        f = Signal2D.from_values(v)
        sl = slice_transform(f, "y")
        ref = oracles.slices_y(v)
        for J, fj in ref.items():
            assert np.allclose(sl[DyadicInterval(*J)].values, fj)
        assert np.allclose(sl.mean().values, v.mean(axis=1))
        sx = slice_transform(f, "x")
        assert np.allclose(sx[DyadicInterval(1, 1)].values, oracles.slices_y(v.T)[(1, 1)])

    def test_tensor_and_indicator(self):
        b = Signal1D.from_values([1.0, 2.0])
        c = Signal1D.from_values([3.0, 0.0, 1.0, 1.0])
        assert np.array_equal(tensor(b, c).values, np.outer([1, 2], [3, 0, 1, 1]))
        R = DyadicRectangle.from_levels(1, 0, 0, 0)
        assert indicator_2d(R, Grid2D(1, 1)).values.tolist() == [[1, 1], [0, 0]]

    def test_signals_are_immutable(self):
        f = Signal1D.from_values([1.0, 2.0])
        with pytest.raises(ValueError):
            f.values[0] = 3.0
