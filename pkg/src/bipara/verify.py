"""Batch property checks behind the ``verify`` subcommand.

Each suite returns a list of :class:`Check` rows; ``measured`` is the
worst value seen (a residual, a ratio or an envelope) and ``bound`` the
threshold it was compared with.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import functionals as F
from . import opnorm as O
from . import sparse as SP
from .corpus import generate_signals
from .dyadic import (
    Grid2D,
    HaarCoeffs2D,
    Signal1D,
    haar_forward_1d,
    haar_forward_2d,
    haar_inverse_1d,
    haar_inverse_2d,
    rectangles,
)
from .paraproducts import (
    NAMED_SIGNATURES,
    ONE_PARAMETER,
    TWO_PARAMETER,
    NamedOperator,
    adjoint_pair_check,
    para_one,
    para_two,
    root_mean_correction_1d,
    root_mean_correction_2d,
    transpose_symmetry_check,
)

SLACK = 1e-12
JN_ENVELOPE = 16.0


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    passed: bool
    measured: float
    bound: str

    def row(self):
        return [self.suite, self.name, "pass" if self.passed else "FAIL", f"{self.measured:.6g}", self.bound]


def _rng(seed):
    return np.random.default_rng(seed)


def _max_check(suite, name, worst, tol):
    return Check(suite, name, bool(worst <= tol), float(worst), f"<= {tol:g}")


def _range_check(suite, name, lo_val, hi_val, lo, hi):
    ok = lo <= lo_val and hi_val <= hi
    return Check(suite, name, bool(ok), float(hi_val / lo_val if lo_val else math.inf), f"in [{lo:g}, {hi:g}]: {lo_val:.4g}..{hi_val:.4g}")


def suite_calculus(seed, n, count):
    rng = _rng(seed)
    rt = pv = 0.0
    for _ in range(count):
        v = rng.standard_normal(1 << n)
        f = Signal1D.from_values(v)
        c = haar_forward_1d(f)
        rt = max(rt, np.max(np.abs(haar_inverse_1d(c).values - v)))
        pv = max(pv, abs(np.sum(c.heap**2) - np.sum(v**2) / v.size))
        w = rng.standard_normal((1 << n, 1 << n))
        g = generate_signals("gaussian", 1, int(rng.integers(2**31)), n)[0].like(w)
        c2 = haar_forward_2d(g)
        rt = max(rt, np.max(np.abs(haar_inverse_2d(c2).values - w)))
        pv = max(pv, abs(np.sum(c2.heap**2) - np.mean(w**2)))
    return [_max_check("calculus", "roundtrip", rt, 1e-10), _max_check("calculus", "parseval", pv, 1e-10)]


def suite_expansion(seed, n, count):
    rng = _rng(seed)
    r1 = r2 = 0.0
    for _ in range(count):
        f = Signal1D.from_values(rng.standard_normal(1 << n))
        g = Signal1D.from_values(rng.standard_normal(1 << n))
        tot = sum((para_one(s, f, g).values for s in ONE_PARAMETER), root_mean_correction_1d(f, g).values)
        r1 = max(r1, np.max(np.abs(tot - f.values * g.values)))
        a, b = (s.like(rng.standard_normal(s.grid.shape)) for s in generate_signals("gaussian", 2, int(rng.integers(2**31)), n))
        tot = sum((para_two(s, a, b).values for s in TWO_PARAMETER), root_mean_correction_2d(a, b).values)
        r2 = max(r2, np.max(np.abs(tot - a.values * b.values)))
    return [_max_check("expansion", "one-parameter", r1, 1e-10), _max_check("expansion", "two-parameter", r2, 1e-10)]


def suite_duality(seed, n, count):
    rng = _rng(seed)
    worst = {}
    for _ in range(count):
        g2, f2, h2 = (s.like(rng.standard_normal(s.grid.shape)) for s in generate_signals("gaussian", 3, int(rng.integers(2**31)), n))
        g1, f1, h1 = (Signal1D.from_values(rng.standard_normal(1 << n)) for _ in range(3))
        for name, sig in NAMED_SIGNATURES.items():
            args = (g1, f1, h1) if sig.dims == 1 else (g2, f2, h2)
            lhs, rhs = adjoint_pair_check(NamedOperator(name, args[0]), args[1], args[2])
            worst[name] = max(worst.get(name, 0.0), abs(lhs - rhs))
    return [_max_check("duality", name, w, 1e-10) for name, w in worst.items()]


def suite_pointwise(seed, n, count):
    fs = generate_signals("gaussian", 2 * count, seed, n)
    w2 = w3 = wm = -math.inf
    for f, g in zip(fs[0::2], fs[1::2]):
        lhs = F.square_2d(NamedOperator("Pi2", g).apply(f)).values
        rhs = F.square_2d(f).values * F.strong_maximal_2d(g).values
        w2 = max(w2, np.max(lhs - rhs * (1 + SLACK)))
        lhs = F.square_2d(NamedOperator("Pi3", g).apply(f)).values
        rhs = F.mixed_operator(f, "S2M1").values * F.mixed_operator(g, "M2S1").values
        w3 = max(w3, np.max(lhs - rhs * (1 + SLACK)))
        wm = max(wm, np.max(F.mixed_operator(f, "M1S2").values - F.mixed_operator(f, "S2M1").values * (1 + SLACK)))
    return [
        _max_check("pointwise", "S(pi2 f) <= S(f) M(g)", w2, 0.0),
        _max_check("pointwise", "S(pi3 f) <= S2M1(f) M2S1(g)", w3, 0.0),
        _max_check("pointwise", "M1S2(f) <= S2M1(f)", wm, 0.0),
    ]


def suite_sparse(seed, n, count):
    fs = generate_signals("gaussian", count, seed, n)
    sparse_ok = union_ok = True
    jn = {0.5: [], 1.0: [], 2.0: []}
    for f in fs:
        M = F.strong_maximal_2d(f).values
        lam = float(np.median(M))
        fam = SP.level_set_rectangles(f, lam)
        union_ok &= bool(np.array_equal(SP.family_union(fam), M > lam))
        sf = SP.sparse_extract(fam)
        sparse_ok &= sf.is_sparse()
        for p in jn:
            jn[p].append(SP.jn_profile(sf, p))
    out = [
        Check("sparse", "1/2-sparse witnesses", sparse_ok, 0.0, "exact"),
        Check("sparse", "level-set union identity", union_ok, 0.0, "cellwise"),
    ]
    for k in (1, 2):
        c = SP.carleson_constant(SP.first_generations_family(k))
        out.append(_max_check("sparse", f"Carleson first {k} generations = {k * k}", abs(c - k * k), 1e-12))
    # sum |R| <= 2 |union| for a 1/2-sparse family, so the profile is at most 2 for p <= 1
    for p, vals in jn.items():
        hi = 2.0 if p <= 1 else JN_ENVELOPE
        out.append(_range_check("sparse", f"John-Nirenberg profile p={p:g}", min(vals), max(vals), 1.0 - SLACK, hi))
    return out


def suite_atomic(seed, n, count):
    fs = generate_signals("gaussian", count, seed, n)
    rec = 0.0
    ok = True
    env = {0.5: [], 1.0: [], 2.0: []}
    for f in fs:
        for p in env:
            s = max(1.0, p) + 1.0
            d = SP.atomic_decompose(f, p, s)
            h = haar_forward_2d(f).cc_only()
            rec = max(rec, np.max(np.abs(d.reconstruct().values - haar_inverse_2d(h).values)))
            try:
                SP.validate_contracting(d.omegas)
            except SP.ContractingError:
                ok = False
            ok &= all(a.check() for a in d.atoms)
            env[p].append(d.size() / F.norm(f, F.HpSquare(p)))
    out = [
        _max_check("atomic", "reconstruction", rec, 1e-10),
        Check("atomic", "contracting sets and atom bounds", ok, 0.0, "exact"),
    ]
    for p, vals in env.items():
        out.append(_range_check("atomic", f"size / H^p envelope p={p:g}", min(vals), max(vals), 1e-2, 1e2))
    return out


def suite_opnorm(seed, n, count):
    fs = generate_signals("gaussian", max(1, count // 5), seed, min(n, 3))
    worst = 0.0
    for g in fs:
        for name in ("Pi1", "Pi1Adjoint", "Pi2", "Pi3", "Pi4"):
            op = NamedOperator(name, g)
            rep = O.opnorm_l2(op, seed=seed)
            dense = O.dense_opnorm(op)
            worst = max(worst, abs(rep.value - dense) / max(dense, 1e-300))
    return [_max_check("opnorm", "power iteration vs dense", worst, 1e-6)]


def suite_gaps(seed, n, count):
    out = []
    sizes = [k for k in (2, 4, 8) if k <= max(n, 2)]
    for k in sizes:
        h = O.build_hadamard_example(k)
        i = O.build_identity_example(k)
        hs, is_ = haar_inverse_2d(h), haar_inverse_2d(i)
        square = np.ones(h.grid.shape, dtype=bool)
        out.append(_max_check("gaps", f"hadamard n={k}: matrix bound - sqrt(n)", abs(O.pi4_matrix_bound(h).value - math.sqrt(k)), 1e-9))
        out.append(_max_check("gaps", f"hadamard n={k}: BMO at unit square - n", abs(F.product_bmo_at(hs, square) - k), 1e-9))
        out.append(_max_check("gaps", f"hadamard n={k}: L2 norm of pi4 - sqrt(n)", O.opnorm_l2(NamedOperator("Pi4", h), seed=seed).value - math.sqrt(k), 1e-6))
        out.append(_max_check("gaps", f"identity n={k}: matrix bound - 1", abs(O.pi4_matrix_bound(i).value - 1.0), 1e-9))
        out.append(_max_check("gaps", f"identity n={k}: BMO at unit square - sqrt(n)", abs(F.product_bmo_at(is_, square) - math.sqrt(k)), 1e-9))
        out.append(_max_check("gaps", f"identity n={k}: absolute-value norm", O.stronger_norm_estimate(i, seed=seed).value, 2.0))
    return out


def suite_bmo(seed, n, count):
    fs = generate_signals("gaussian", count, seed, 2)
    above = below = flip = 0.0
    for f in fs:
        exact = F.product_bmo_exact(f)
        heur = F.product_bmo_heuristic(f)
        c = haar_forward_2d(f).heap
        rect = _single_rect_sup(f)
        above = max(above, heur - exact)
        below = max(below, rect - heur)
        signs = np.where(_rng(seed).random(c.shape) < 0.5, -1.0, 1.0)
        g = haar_inverse_2d(HaarCoeffs2D(f.grid, c * signs))
        flip = max(flip, abs(F.product_bmo_exact(g) - exact))
    return [
        _max_check("bmo", "heuristic - exact", above, 1e-12),
        _max_check("bmo", "single rectangle - heuristic", below, 1e-12),
        _max_check("bmo", "sign-flip invariance", flip, 1e-12),
    ]


def _single_rect_sup(f):
    """sup over cancellative R of (sum_{R' in R} f_R'^2 / |R|)^(1/2), by direct enumeration."""
    c = haar_forward_2d(f)
    rects = rectangles(f.grid)
    best = 0.0
    for R in rects:
        tot = sum(c[Q] ** 2 for Q in rects if R.contains(Q))
        best = max(best, math.sqrt(tot / R.measure))
    return best


def suite_symmetry(seed, n, count):
    rng = _rng(seed)
    worst = 0.0
    grid = Grid2D(n, n)
    for _ in range(count):
        a = rng.standard_normal((grid.shape[0] - 1,) * 2)
        c = HaarCoeffs2D.from_blocks(grid, cc=a + a.T)
        f = generate_signals("gaussian", 1, int(rng.integers(2**31)), n)[0]
        worst = max(worst, transpose_symmetry_check(c, f))
    return [_max_check("symmetry", "transpose identity", worst, 1e-10)]


SUITES = {
    "calculus": suite_calculus,
    "expansion": suite_expansion,
    "duality": suite_duality,
    "pointwise": suite_pointwise,
    "sparse": suite_sparse,
    "atomic": suite_atomic,
    "opnorm": suite_opnorm,
    "gaps": suite_gaps,
    "bmo": suite_bmo,
    "symmetry": suite_symmetry,
}


def run_suites(names, seed=0, n=4, count=20):
    if "all" in names:
        names = list(SUITES)
    out = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; expected one of {sorted(SUITES)} or 'all'")
        out.extend(SUITES[name](seed, n, count))
    return out
