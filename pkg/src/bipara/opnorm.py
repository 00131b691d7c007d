"""Operator-norm estimation for paraproducts.

Exact L2 norms by power iteration (with a dense spectral oracle on small
grids), lower bounds by ratio ascent for arbitrary norm pairs, the
structured test functions that realise the H^p -> H^q lower bounds, the
per-point matrix bound for pi4, and the Hadamard / identity examples.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .dyadic import (
    AVG,
    HAAR,
    DyadicError,
    DyadicInterval,
    Grid1D,
    Grid2D,
    HaarCoeffs2D,
    Signal1D,
    Signal2D,
    analyze,
    analyze2,
    haar_forward_2d,
    synth,
    synth2,
)
from .functionals import (
    HpSquare,
    NormKind,
    lp_values,
    mixed_operator,
    norm,
    square_2d,
    square_from_detail,
    square_from_heap,
    strong_maximal_2d,
)
from .paraproducts import NamedOperator, as_signal
from .sparse import family_union, level_set_rectangles, sparse_extract

DENSE_CAP = 4096
FD_STEP = 1e-5
SMOOTHING = 1e-12
METHODS = (
    "power_iteration",
    "dense_spectral",
    "ratio_ascent",
    "structured_thm1",
    "structured_thm2",
    "matrix_view_bound",
)


@dataclass
class OpNormReport:
    value: float
    witness: Optional[object]
    method: str
    bound_type: str
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        w = None
        if self.witness is not None:
            w = {
                "dims": self.witness.dims,
                "resolution": list(self.witness.grid.resolution),
                "values": np.asarray(self.witness.values).ravel().tolist(),
            }
        return {
            "value": float(self.value),
            "method": self.method,
            "bound_type": self.bound_type,
            "diagnostics": self.diagnostics,
            "witness": w,
        }


def _signal(grid, values):
    return Signal1D(grid, values) if isinstance(grid, Grid1D) else Signal2D(grid, values)


def evaluate_ratio(op, f, in_norm, out_norm):
    """out_norm(op f) / in_norm(f); 0 for f with zero input norm."""
    den = norm(f, in_norm)
    if den == 0:
        return 0.0
    return norm(op.apply(f), out_norm) / den


# ---------------------------------------------------------------------------
# L2 -> L2
# ---------------------------------------------------------------------------

def dense_matrix(op):
    """Matrix of op acting on finest-cell values (column m = image of cell m)."""
    shape = op.grid.shape
    n = int(np.prod(shape))
    if n > DENSE_CAP:
        raise DyadicError(f"dense oracle is capped at {DENSE_CAP} unknowns")
    eye = np.eye(n).reshape((n,) + tuple(shape))
    return op.apply_values(eye).reshape(n, n).T


def dense_opnorm(op):
    return float(np.linalg.norm(dense_matrix(op), 2))


def opnorm_l2(op, tol=1e-10, max_iter=10_000, seed=0, dense_check=False):
    """||op||_{L2 -> L2} by power iteration on T*T."""
    adj = op.adjoint()
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.grid.shape)
    v /= np.linalg.norm(v)
    lam_old = 0.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w = op.apply_values(v)
        lam = float(np.sum(w * w))
        u = adj.apply_values(w)
        nu = np.linalg.norm(u)
        if nu == 0:
            converged = True
            break
        v = u / nu
        if abs(lam - lam_old) <= tol * lam:
            converged = True
            break
        lam_old = lam
    tv = op.apply_values(v)
    value = float(np.linalg.norm(tv) / np.linalg.norm(v))
    if value > 0:
        residual = float(np.linalg.norm(adj.apply_values(tv) - value**2 * v) / value**2)
    else:
        residual = 0.0
    diag = {"iterations": it, "converged": converged, "residual": residual, "seed": seed}
    if dense_check and op.grid.size <= DENSE_CAP:
        diag["dense_value"] = dense_opnorm(op)
    if not converged:
        diag["warning"] = "power iteration did not converge"
    return OpNormReport(
        value, _signal(op.grid, v), "power_iteration", "two_sided" if converged else "lower", diag
    )


# ---------------------------------------------------------------------------
# ratio ascent
# ---------------------------------------------------------------------------

def _basis(grid, domain):
    """Basis signals for the search parametrisation, shape (d, *grid.shape)."""
    shape = tuple(grid.shape)
    if domain == "full":
        n = int(np.prod(shape))
        return np.eye(n).reshape((n,) + shape)
    if domain != "cc":
        raise ValueError(f"unknown search domain {domain!r}")
    if len(shape) == 1:
        d = shape[0] - 1
        e = np.zeros((d, shape[0]))
        e[np.arange(d), np.arange(1, shape[0])] = 1.0
        return synth(e, -1, HAAR)
    n1, n2 = shape
    d = (n1 - 1) * (n2 - 1)
    e = np.zeros((d,) + shape)
    ii, jj = np.meshgrid(np.arange(1, n1), np.arange(1, n2), indexing="ij")
    e[np.arange(d), ii.ravel(), jj.ravel()] = 1.0
    return synth2(e, HAAR, HAAR)


def _to_params(f, domain):
    if domain == "full":
        return np.asarray(f.values, dtype=np.float64).ravel().copy()
    if f.dims == 1:
        return analyze(f.values, -1, HAAR)[1:].copy()
    return analyze2(f.values, HAAR, HAAR)[1:, 1:].ravel().copy()


def norm_batch(kind, values, grid, eps=0.0):
    """``kind`` evaluated on each signal of a batch (leading axis)."""
    if isinstance(kind, str):
        kind = NormKind.parse(kind)
    v = np.asarray(values, dtype=np.float64)
    axes = tuple(range(1, v.ndim))
    cell = grid.cell_measure
    one_d = v.ndim == 2
    if kind.tag == "lp":
        return lp_values(v, kind.p, cell, axes)
    if kind.tag == "hp_square":
        if one_d:
            s = square_from_detail(analyze(v, -1, HAAR), eps)
        else:
            s = square_from_heap(analyze2(v, HAAR, HAAR), eps)
        return lp_values(s, kind.p, cell, axes)
    if kind.tag == "hp_maximal":
        if one_d:
            m = kernels.maximal_last(np.ascontiguousarray(v))
        else:
            m = np.stack([kernels.strong_maximal(np.ascontiguousarray(x)) for x in v])
        return lp_values(m, kind.p, cell, axes)
    return np.array([norm(_signal(grid, x), kind) for x in v])


class _Ratio:
    def __init__(self, op, basis, in_norm, out_norm):
        self.grid = op.grid
        self.shape = tuple(self.grid.shape)
        self.B = basis.reshape(basis.shape[0], -1)
        self.A = op.apply_values(basis).reshape(basis.shape[0], -1)
        self.in_norm, self.out_norm = in_norm, out_norm

    def __call__(self, X, eps=SMOOTHING):
        k = X.shape[0]
        f = (X @ self.B).reshape((k,) + self.shape)
        tf = (X @ self.A).reshape((k,) + self.shape)
        den = norm_batch(self.in_norm, f, self.grid, eps)
        num = norm_batch(self.out_norm, tf, self.grid, eps)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(den > 0, num / den, 0.0)
        return np.nan_to_num(r, nan=0.0, posinf=0.0)


def _ascend(fun, x0, iterations, h=FD_STEP, min_step=1e-10):
    """Normalised gradient ascent on the unit sphere with backtracking."""
    x = x0 / np.linalg.norm(x0)
    r = float(fun(x[None])[0])
    d = x.size
    step = 0.1
    gain = 0.0
    used = 0
    for used in range(1, iterations + 1):
        grad = (fun(x[None] + h * np.eye(d)) - r) / h
        gn = np.linalg.norm(grad)
        if not gn > 0:
            break
        direction = grad / gn
        moved = False
        while step >= min_step:
            y = x + step * direction
            y /= np.linalg.norm(y)
            ry = float(fun(y[None])[0])
            if ry > r:
                gain = (ry - r) / max(abs(r), 1e-300)
                x, r = y, ry
                step = min(2 * step, 1.0)
                moved = True
                break
            step *= 0.5
        if not moved or gain < 1e-13:
            break
    return x, used, gain


def opnorm_search(
    op,
    in_norm,
    out_norm,
    restarts=16,
    iterations=500,
    seed=0,
    domain="cc",
    initial=None,
):
    """Lower bound for sup out_norm(Tf) / in_norm(f) by best-of-restarts ascent.

    ``domain="cc"`` searches over functions with only cancellative
    coefficients, ``"full"`` over all finest-cell values. Restart i is
    seeded by the i-th child of ``SeedSequence(seed)``, so adding restarts
    never lowers the result. ``initial`` is an optional warm start that is
    tried before the random restarts.
    """
    if restarts < 1 or iterations < 1:
        raise ValueError("need restarts >= 1 and iterations >= 1")
    if isinstance(in_norm, str):
        in_norm = NormKind.parse(in_norm)
    if isinstance(out_norm, str):
        out_norm = NormKind.parse(out_norm)
    grid = op.grid
    basis = _basis(grid, domain)
    fun = _Ratio(op, basis, in_norm, out_norm)
    diag = {
        "restarts": restarts,
        "iterations": 0,
        "seed": seed if np.isscalar(seed) else list(seed),
        "domain": domain,
        "in_norm": str(in_norm),
        "out_norm": str(out_norm),
    }
    if not np.any(fun.A):
        diag["degenerate"] = True
        return OpNormReport(0.0, _signal(grid, np.zeros(grid.shape)), "ratio_ascent", "lower", diag)

    starts = []
    if initial is not None:
        x0 = _to_params(initial, domain)
        if np.any(x0):
            starts.append(("initial", x0))
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        starts.append((i, np.random.default_rng(child).standard_normal(basis.shape[0])))

    best_x, best_r, best_label, best_gain = None, -1.0, None, 0.0
    for label, x0 in starts:
        x, used, gain = _ascend(fun, x0, iterations)
        diag["iterations"] += used
        cands = np.stack([x0 / np.linalg.norm(x0), x])
        exact = fun(cands, eps=0.0)
        pick = int(np.argmax(exact))
        if exact[pick] > best_r:
            best_x, best_r, best_label, best_gain = cands[pick], float(exact[pick]), label, gain
    witness = _signal(grid, (best_x @ fun.B).reshape(grid.shape))
    diag["best_start"] = best_label
    diag["residual"] = best_gain
    value = evaluate_ratio(op, witness, in_norm, out_norm)
    return OpNormReport(value, witness, "ratio_ascent", "lower", diag)


# ---------------------------------------------------------------------------
# structured witnesses
# ---------------------------------------------------------------------------

def _q_from(p, r):
    return 1.0 / (1.0 / p + 1.0 / r)


def thm1_witness(g, p=2.0, r=2.0, refine=True):
    """Test function for pi2 built from sparse level-set families of M(g).

    With C_k the 1/2-sparse part of the maximal rectangles where
    |<g>_R| > 2**k and lambda(R) the largest such k,
    f = sum_R 2**(t lambda(R)) |R|**(1/2) h_R with t = r/p.

    With ``refine`` the construction runs on g refined by one generation,
    so rectangles at the finest level of the original grid carry Haar
    functions.
    """
    p, r = float(p), float(r)
    if not (p > 0 and r > 0):
        raise ValueError("p and r must be positive")
    t = r / p
    q = _q_from(p, r)
    g2 = g.refine(1) if refine else g
    M = strong_maximal_2d(g2).values
    pos = M[M > 0]
    if pos.size == 0:
        raise DyadicError("strong maximal function of g vanishes")
    k_min = math.ceil(math.log2(pos.min())) - 1
    k_max = math.ceil(math.log2(pos.max())) - 1
    families = {}
    lam = {}
    for k in range(k_min, k_max + 1):
        sf = sparse_extract(level_set_rectangles(g2, 2.0**k))
        families[k] = sf.base
        for R in sf.base.rects:
            lam[R] = k  # k increases, so the last write is the largest
    grid = g2.grid
    heap = np.zeros(grid.shape)
    for R, k in lam.items():
        if R.ix.level >= grid.n1 or R.iy.level >= grid.n2:
            raise DyadicError("family rectangle has no Haar function on this grid")
        heap[R.ix.heap_index, R.iy.heap_index] = 2.0 ** (t * k) * math.sqrt(R.measure)
    f = Signal2D(grid, synth2(heap, HAAR, HAAR))
    op = NamedOperator("Pi2", g2)
    F = op.apply(f)
    SF = square_2d(F).values
    violations = 0
    for k, fam in families.items():
        u = family_union(fam)
        violations += int(np.count_nonzero(SF[u] <= 2.0 ** ((1 + t) * k)))
    f_norm = norm(f, HpSquare(p))
    out_norm = norm(F, HpSquare(q))
    g_norm = norm(g, HpSquare(r))
    ratio = out_norm / f_norm
    diag = {
        "p": p,
        "r": r,
        "q": q,
        "t": t,
        "levels": [k_min, k_max],
        "family_sizes": {str(k): len(fam) for k, fam in families.items()},
        "rectangles": len(lam),
        "in_norm": f_norm,
        "out_norm": out_norm,
        "g_norm": g_norm,
        "ratio_over_g": ratio / g_norm if g_norm else math.inf,
        "f_scale": f_norm / g_norm ** (r / p) if g_norm else math.inf,
        "square_check_passed": violations == 0,
        "square_check_violations": violations,
        "refined": bool(refine),
    }
    return f, OpNormReport(ratio, f, "structured_thm1", "lower", diag)


def slice_symbols(g):
    """H[i, j] = <g_I>_J: y-averages of the x-Haar slices, heap indexed."""
    return analyze(analyze(g.values, 0, HAAR), 1, AVG)


def _check_rows(row_set, n2):
    rows = list(row_set)
    if not rows:
        raise DyadicError("row set is empty")
    for J in rows:
        if J.level >= n2:
            raise DyadicError(f"row {J} has no Haar function on this grid")
    for a in range(len(rows)):
        for b in range(a + 1, len(rows)):
            if rows[a].contains(rows[b]) or rows[b].contains(rows[a]):
                raise DyadicError("row intervals must be pairwise disjoint")
    return rows


def thm2_row_witness(g, p=2.0, r=2.0, row_set=None, restarts=4, iterations=200, seed=0):
    """Test function for pi3 assembled from one-parameter witnesses.

    For each row J the symbol g'(J) = sum_I <g_I>_J h_I drives a line
    paraproduct; its search witness f_J, scaled so that
    ||f_J||_{H^p}^p = ||g'(J)||_{H^r}^r, enters f = sum_J |J|^(1/2) f_J h_J.
    ``row_set`` defaults to the intervals of the finest cancellative level.
    """
    p, r = float(p), float(r)
    q = _q_from(p, r)
    grid = g.grid
    if row_set is None:
        lev = grid.n2 - 1
        row_set = [DyadicInterval(lev, k) for k in range(1 << lev)]
    rows = _check_rows(row_set, grid.n2)
    H = slice_symbols(g)
    line = Grid1D(grid.n1)
    heap_y = np.zeros((grid.shape[0], grid.shape[1]))
    slice_quantity = 0.0
    row_ratios = []
    for J in rows:
        jj = J.heap_index
        coeffs = H[:, jj].copy()
        coeffs[0] = 0.0
        slice_quantity += J.measure * float(
            np.sum(square_from_detail(coeffs) ** r) * line.cell_measure
        )
        if not np.any(coeffs):
            row_ratios.append(0.0)
            continue
        gJ = Signal1D(line, synth(coeffs, -1, HAAR))
        rep = opnorm_search(
            NamedOperator("PiG", gJ),
            HpSquare(p),
            HpSquare(q),
            restarts=restarts,
            iterations=iterations,
            seed=[int(seed), jj],
        )
        row_ratios.append(rep.value)
        w = rep.witness
        target = norm(gJ, HpSquare(r)) ** (r / p)
        fJ = w.values * (target / norm(w, HpSquare(p)))
        heap_y[:, jj] = math.sqrt(J.measure) * fJ
    f = Signal2D(grid, synth(heap_y, 1, HAAR))
    diag = {
        "p": p,
        "r": r,
        "q": q,
        "rows": [[J.level, J.index] for J in rows],
        "row_ratios": row_ratios,
        "slice_quantity": slice_quantity,
        "seed": seed,
    }
    if not np.any(f.values):
        diag.update(in_norm_s2m1=0.0, out_norm=0.0)
        return f, OpNormReport(0.0, f, "structured_thm2", "lower", diag)
    F = NamedOperator("Pi3", g).apply(f)
    diag["in_norm_s2m1"] = float(lp_values(mixed_operator(f, "S2M1").values, p, grid.cell_measure))
    diag["out_norm"] = norm(F, HpSquare(q))
    value = diag["out_norm"] / norm(f, HpSquare(p))
    return f, OpNormReport(value, f, "structured_thm2", "lower", diag)


# ---------------------------------------------------------------------------
# matrix view of pi4
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PointMatrix:
    """G(x, y)[i, j] = g_{I x J} |I x J|^(-1/2) for the level-i interval I
    containing x and the level-j interval J containing y."""

    cell: tuple
    entries: np.ndarray

    @property
    def spectral_norm(self):
        return float(np.linalg.norm(self.entries, 2)) if self.entries.size else 0.0


def _heap_of(g):
    if isinstance(g, HaarCoeffs2D):
        return g.grid, g.heap
    g = as_signal(g)
    return g.grid, haar_forward_2d(g).heap


def _path_indices(n, cells):
    lev = np.arange(n)
    return (1 << lev)[:, None] + (cells[None, :] >> (n - lev)[:, None])


def point_matrix(g, x, y):
    grid, heap = _heap_of(g)
    ix = _path_indices(grid.n1, np.array([x]))[:, 0]
    iy = _path_indices(grid.n2, np.array([y]))[:, 0]
    scale = 2.0 ** ((np.arange(grid.n1)[:, None] + np.arange(grid.n2)[None, :]) / 2)
    return PointMatrix((int(x), int(y)), heap[np.ix_(ix, iy)] * scale)


def pi4_matrix_bound(g, chunk_entries=1 << 22):
    """max over finest cells of the spectral norm of G(x, y)."""
    grid, heap = _heap_of(g)
    n1, n2 = grid.shape
    N1, N2 = grid.n1, grid.n2
    ix = _path_indices(N1, np.arange(n1))  # (N1, n1)
    iy = _path_indices(N2, np.arange(n2))
    scale = 2.0 ** ((np.arange(N1)[:, None] + np.arange(N2)[None, :]) / 2)
    rows = max(1, chunk_entries // max(1, n2 * N1 * N2))
    best, arg = 0.0, (0, 0)
    for x0 in range(0, n1, rows):
        xs = np.arange(x0, min(n1, x0 + rows))
        G = heap[ix[:, xs].T[:, None, :, None], iy.T[None, :, None, :]] * scale
        norms = np.linalg.norm(G, 2, axis=(2, 3))
        k = np.unravel_index(int(np.argmax(norms)), norms.shape)
        if norms[k] > best:
            best, arg = float(norms[k]), (int(xs[k[0]]), int(k[1]))
    return OpNormReport(best, None, "matrix_view_bound", "upper", {"argmax_cell": list(arg)})


# ---------------------------------------------------------------------------
# examples
# ---------------------------------------------------------------------------

def sylvester_hadamard(n):
    if n < 1 or n & (n - 1):
        raise ValueError(f"Hadamard order must be a power of two, got {n}")
    H = np.ones((1, 1), dtype=np.int64)
    while H.shape[0] < n:
        H = np.block([[H, H], [H, -H]])
    return H


def _example(signs, n, resolution):
    N = n if resolution is None else resolution
    if N < n:
        raise DyadicError(f"resolution {N} is below the example size {n}")
    grid = Grid2D(N, N)
    heap = np.zeros(grid.shape)
    for i in range(n):
        for j in range(n):
            heap[1 << i:2 << i, 1 << j:2 << j] = signs[i, j] * 2.0 ** (-(i + j) / 2)
    return HaarCoeffs2D(grid, heap)


def build_hadamard_example(n, resolution=None):
    """g_{IxJ} = H[i(I), i(J)] |I x J|^(1/2) for levels below n."""
    return _example(sylvester_hadamard(n), n, resolution)


def build_identity_example(n, resolution=None):
    """g_{IxJ} = |I x J|^(1/2) when both levels agree and are below n."""
    if n < 1:
        raise ValueError("n must be positive")
    return _example(np.eye(n), n, resolution)


# ---------------------------------------------------------------------------
# the norm with absolute values
# ---------------------------------------------------------------------------

def _abs_symbol(g):
    grid, heap = _heap_of(g)
    h = np.abs(heap)
    h[0, :] = 0.0
    h[:, 0] = 0.0
    return HaarCoeffs2D(grid, h)


def stronger_norm_estimate(g, p=2.0, restarts=4, iterations=200, seed=0, max_cells=256):
    """Estimate sup sum |g_{IxJ}| <|f_J|>_I <|f'_I|>_J over ||f||_p = ||f'||_p' = 1.

    At p = 2 the supremum is attained by nonnegative slice families, so it
    equals the L2 norm of pi4 with symbol |g|, computed by power iteration.
    Other exponents use ratio ascent on small grids. The matrix bound for
    |g| is an upper bound at p = 2 only; elsewhere it is reported for
    comparison.
    """
    p = float(p)
    if not p > 1:
        raise ValueError("p must exceed 1")
    gabs = _abs_symbol(g)
    upper = pi4_matrix_bound(gabs).value
    if p == 2.0:
        rep = opnorm_l2(NamedOperator("Pi4", gabs), seed=seed)
        rep.diagnostics["upper_bound"] = upper
        return rep
    grid = gabs.grid
    if grid.size > max_cells:
        raise DyadicError(f"ascent for p != 2 is limited to {max_cells} cells")
    pp = p / (p - 1)
    w = gabs.heap
    n = grid.size
    shape = grid.shape

    def fun(X):
        f = X[:, :n].reshape((-1,) + shape)
        f2 = X[:, n:].reshape((-1,) + shape)
        a = analyze(np.abs(analyze(f, -1, HAAR)), -2, AVG)  # <|f_J|>_I
        b = analyze(np.abs(analyze(f2, -2, HAAR)), -1, AVG)  # <|f'_I|>_J
        val = np.sum((a * b * w)[:, 1:, 1:], axis=(1, 2))
        den = lp_values(f, p, grid.cell_measure, (1, 2)) * lp_values(f2, pp, grid.cell_measure, (1, 2))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.nan_to_num(np.where(den > 0, val / den, 0.0))

    best, best_x = 0.0, None
    total = 0
    for child in np.random.SeedSequence(seed).spawn(restarts):
        x0 = np.random.default_rng(child).standard_normal(2 * n)
        x, used, _ = _ascend(fun, x0, iterations)
        total += used
        v = float(fun(x[None])[0])
        if v > best:
            best, best_x = v, x
    # the matrix bound dominates only at p = 2; recorded for comparison
    diag = {"restarts": restarts, "iterations": total, "seed": seed, "matrix_bound_p2": upper, "p": p}
    witness = Signal2D(grid, best_x[:n].reshape(shape)) if best_x is not None else None
    return OpNormReport(best, witness, "ratio_ascent", "lower", diag)
