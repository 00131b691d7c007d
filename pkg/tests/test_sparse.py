import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from conftest import random_2d
from bipara import DyadicError, DyadicInterval, DyadicRectangle, Grid2D, Signal2D, haar_forward_2d, haar_inverse_2d
from bipara import functionals as F
from bipara import sparse as SP
from bipara.dyadic import haar_function_2d, rectangles
from bipara.paraproducts import NamedOperator


def all_rects(grid):
    return [
        DyadicRectangle(DyadicInterval(i, a), DyadicInterval(j, b))
        for i in range(grid.n1 + 1)
        for j in range(grid.n2 + 1)
        for a in range(1 << i)
        for b in range(1 << j)
    ]


def family_strategy(grid, max_size):
    pool = all_rects(grid)
    return st.lists(st.sampled_from(pool), min_size=1, max_size=max_size, unique=True).map(
        lambda rs: SP.RectFamily(grid, tuple(rs))
    )


plane = st.tuples(st.integers(1, 3), st.integers(1, 3)).flatmap(
    lambda s: arrays(np.float64, (1 << s[0], 1 << s[1]), elements=st.floats(-10, 10))
)


class TestLevelSets:
    @given(plane, st.floats(0.05, 5.0))
    def test_union_identity(self, v, lam):
        f = Signal2D.from_values(v)
        fam = SP.level_set_rectangles(f, lam)
        assert np.array_equal(SP.family_union(fam), F.strong_maximal_2d(f).values > lam)

    def test_rectangles_are_maximal(self, rng):
        f = random_2d(rng, 3)
        fam = SP.level_set_rectangles(f, 0.7)
        qualifying = [R for R in all_rects(f.grid) if abs(f.values[R.cells(f.grid)].mean()) > 0.7]
        for R in fam.rects:
            assert R in qualifying
            assert not any(Q != R and Q.contains(R) for Q in qualifying)
        for Q in qualifying:
            assert any(R.contains(Q) for R in fam.rects)

    def test_threshold_must_be_positive(self, rng):
        with pytest.raises(ValueError):
            SP.level_set_rectangles(random_2d(rng, 2), 0.0)


class TestSparseExtract:
    @given(family_strategy(Grid2D(2, 3), 20))
    def test_half_sparse(self, fam):
        sf = SP.sparse_extract(fam)
        assert sf.is_sparse()
        assert set(sf.base.rects) <= set(fam.rects)

    def test_is_sparse_detects_overlap(self):
        grid = Grid2D(1, 1)
        R = DyadicRectangle.from_levels(0, 0, 0, 0)
        Q = DyadicRectangle.from_levels(1, 0, 1, 0)
        bad = SP.SparseFamily(SP.RectFamily(grid, (R, Q)), {R: np.array([0, 1]), Q: np.array([0])})
        assert not bad.is_sparse()

    def test_duplicate_rectangles_rejected(self):
        R = DyadicRectangle.from_levels(0, 0, 0, 0)
        with pytest.raises(DyadicError):
            SP.RectFamily(Grid2D(1, 1), (R, R))


class TestCarleson:
    @pytest.mark.parametrize("n", [1, 2])
    def test_first_generations(self, n):
        fam = SP.first_generations_family(n)
        assert SP.carleson_constant(fam) == pytest.approx(n * n, abs=1e-12)

    def test_first_generations_restricted(self):
        fam = SP.first_generations_family(3)
        with pytest.raises(F.GridTooLargeError):
            SP.carleson_constant(fam, "exact")
        assert SP.carleson_constant(fam, "restricted") == pytest.approx(9.0)

    @given(family_strategy(Grid2D(1, 2), 10))
    def test_subfamily_mode_matches_brute(self, fam):
        grid = fam.grid
        ref = oracles.carleson_brute([R.mask(grid) for R in fam.rects], fam.measures(), grid.shape, grid.cell_measure)
        assert SP.carleson_constant(fam) == pytest.approx(ref)

    def test_cell_subset_mode_matches_brute(self):
        grid = Grid2D(1, 2)
        fam = SP.RectFamily(grid, tuple(all_rects(grid)))
        assert len(fam) > SP.SUBFAMILY_CAP
        ref = oracles.carleson_brute([R.mask(grid) for R in fam.rects], fam.measures(), grid.shape, grid.cell_measure)
        assert SP.carleson_constant(fam) == pytest.approx(ref)

    def test_restricted_below_exact(self, rng):
        grid = Grid2D(2, 2)
        pool = all_rects(grid)
        for _ in range(5):
            pick = rng.choice(len(pool), size=20, replace=False)
            fam = SP.RectFamily(grid, tuple(pool[i] for i in pick))
            exact = SP.carleson_constant(fam, "exact")
            assert SP.carleson_constant(fam, "restricted") <= exact + 1e-12

    def test_witness_attains_value(self):
        fam = SP.first_generations_family(2)
        value, omega = SP.carleson_witness(fam)
        inside = sum(R.measure for R in fam.rects if not (R.mask(fam.grid) & ~omega).any())
        assert inside / (omega.sum() * fam.grid.cell_measure) == pytest.approx(value)

    def test_sparse_family_constant_at_most_two(self, rng):
        f = random_2d(rng, 2)
        sf = SP.sparse_extract(SP.level_set_rectangles(f, 0.3))
        assert SP.carleson_constant(sf.base) <= 2.0 + 1e-12


class TestJohnNirenberg:
    def test_single_rectangle(self):
        fam = SP.RectFamily(Grid2D(2, 2), (DyadicRectangle.from_levels(1, 0, 0, 0),))
        for p in (0.5, 1, 2):
            assert SP.jn_profile(fam, p) == pytest.approx(1.0)

    @given(family_strategy(Grid2D(2, 2), 12))
    def test_sparse_profile_bounds(self, fam):
        sf = SP.sparse_extract(fam)
        # for a 1/2-sparse family sum |R| <= 2 |union|
        assert 1.0 - 1e-12 <= SP.jn_profile(sf, 1) <= 2.0 + 1e-12
        assert SP.jn_profile(sf, 0.5) <= 2.0 + 1e-12
        assert SP.jn_profile(sf, 2) >= SP.jn_profile(sf, 1) - 1e-12

    def test_rejects_bad_exponent(self):
        with pytest.raises(ValueError):
            SP.jn_profile(SP.first_generations_family(1), 0)


class TestContracting:
    def test_validate(self):
        a = np.ones((2, 2), bool)
        b = np.zeros((2, 2), bool)
        b[0, 0] = True
        SP.validate_contracting([a, b])
        with pytest.raises(SP.ContractingError):
            SP.validate_contracting([b, a])
        c = a.copy()
        c[1, 1] = False
        with pytest.raises(SP.ContractingError):
            SP.validate_contracting([a, c])

    def test_family_maximal(self):
        g = Signal2D.from_values(np.array([[4.0, 0.0], [0.0, 0.0]]))
        a = np.ones((2, 2), bool)
        b = np.array([[True, False], [False, False]])
        m = SP.contracting_family_maximal(g, [a, b]).values
        assert m[0, 0] == 4.0 and m[1, 1] == 1.0


class TestAtoms:
    def test_single_haar_gives_one_atom(self):
        grid = Grid2D(3, 3)
        R = DyadicRectangle.from_levels(1, 1, 1, 0)
        f = haar_function_2d(R, grid)
        d = SP.atomic_decompose(f, 1.0, 2.0)
        assert len(d) == 1
        assert np.array_equal(d.omegas[0], R.mask(grid))
        assert d.atoms[0].check()
        assert np.allclose(d.reconstruct().values, f.values)

    @pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
    def test_reconstruction_and_invariants(self, rng, p):
        for _ in range(5):
            f = random_2d(rng, 3)
            d = SP.atomic_decompose(f, p, max(1.0, p) + 1.0)
            cc = haar_inverse_2d(haar_forward_2d(f).cc_only())
            assert np.allclose(d.reconstruct().values, cc.values, atol=1e-10)
            SP.validate_contracting(d.omegas)
            assert all(a.check() for a in d.atoms)
            assert 1e-2 <= d.size() / F.norm(f, F.HpSquare(p)) <= 1e2

    def test_zero_signal(self):
        d = SP.atomic_decompose(Signal2D.from_values(np.ones((4, 4))), 1.0, 2.0)
        assert len(d) == 0

    def test_parameter_checks(self, rng):
        with pytest.raises(ValueError):
            SP.atomic_decompose(random_2d(rng, 2), 2.0, 2.0)

    def test_atom_check_fails_outside_support(self):
        grid = Grid2D(2, 2)
        heap = np.zeros(grid.shape)
        heap[1, 1] = 1.0
        support = np.zeros(grid.shape, bool)
        support[0, 0] = True
        assert not SP.Atom(grid, support, heap, 2.0).check()

    def test_local_image(self, rng):
        f = random_2d(rng, 3)
        d = SP.atomic_decompose(f, 1.0, 3.0)
        g = random_2d(rng, 3)
        for name in ("Pi3", "Pi4"):
            for atom in d.atoms:
                rep = SP.local_image_check(NamedOperator(name, g), atom, 2.0)
                assert rep.support_contained
                assert math.isfinite(rep.ratio)
        with pytest.raises(ValueError):
            SP.local_image_check(NamedOperator("Pi2", g), d.atoms[0], 2.0)


def test_rectangles_helper_counts():
    assert len(rectangles(Grid2D(2, 2))) == 9
