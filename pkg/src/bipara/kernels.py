"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

Every 1D kernel works on the last axis of a 2D float array ``(batch, n)``
with ``n`` a power of two. Coefficients use a heap layout along that axis:
slot ``2**j + k`` holds the value attached to the dyadic interval of level
``j`` and index ``k`` (levels ``0 .. N-1``), and slot 0 holds the global
mean. For Haar analysis the slots are ``<f, h_I>``; for averaging analysis
they are ``<f>_I``.

The two implementations perform the same floating point operations in the
same order wherever that is cheap to arrange, so they agree to round-off.
"""

import numpy as np

from ._accel import HAVE_NUMBA, njit, numba_requested

__all__ = [
    "analyze_haar",
    "analyze_avg",
    "synth_haar",
    "synth_avg",
    "maximal_last",
    "strong_maximal",
    "subset_ratio_max",
    "subfamily_ratio_max",
    "backend",
    "set_backend",
    "NUMPY_KERNELS",
    "NUMBA_KERNELS",
]


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def _analyze_haar_np(a):
    a = np.asarray(a, dtype=np.float64)
    B, n = a.shape
    out = np.empty((B, n))
    work = a
    half = n // 2
    while half >= 1:
        left = work[:, 0::2]
        right = work[:, 1::2]
        out[:, half:2 * half] = (left - right) * (0.5 / np.sqrt(half))
        work = 0.5 * (left + right)
        half //= 2
    out[:, 0] = work[:, 0]
    return out


def _analyze_avg_np(a):
    a = np.asarray(a, dtype=np.float64)
    B, n = a.shape
    out = np.empty((B, n))
    work = a
    half = n // 2
    while half >= 1:
        work = 0.5 * (work[:, 0::2] + work[:, 1::2])
        out[:, half:2 * half] = work
        half //= 2
    out[:, 0] = work[:, 0]
    return out


def _synth_haar_np(h):
    h = np.asarray(h, dtype=np.float64)
    B, n = h.shape
    vals = h[:, 0:1].copy()
    half = 1
    while half < n:
        d = h[:, half:2 * half] * np.sqrt(half)
        new = np.empty((B, 2 * half))
        new[:, 0::2] = vals + d
        new[:, 1::2] = vals - d
        vals = new
        half *= 2
    return vals


def _synth_avg_np(h):
    h = np.asarray(h, dtype=np.float64)
    B, n = h.shape
    if n == 1:
        return h[:, 0:1].copy()
    acc = h[:, 0:1] + h[:, 1:2]
    half = 2
    while half < n:
        acc = np.repeat(acc, 2, axis=1) + h[:, half:2 * half] * half
        half *= 2
    return np.repeat(acc, 2, axis=1)


def _maximal_last_np(a):
    a = np.asarray(a, dtype=np.float64)
    levels = [np.abs(a)]
    work = a
    while work.shape[1] > 1:
        work = 0.5 * (work[:, 0::2] + work[:, 1::2])
        levels.append(np.abs(work))
    mx = levels[-1]
    for lv in reversed(levels[:-1]):
        mx = np.maximum(np.repeat(mx, 2, axis=1), lv)
    return mx


def _pyramid_axis0(v):
    out = [v]
    while v.shape[0] > 1:
        v = 0.5 * (v[0::2] + v[1::2])
        out.append(v)
    out.reverse()
    return out


def _strong_maximal_np(v):
    v = np.asarray(v, dtype=np.float64)
    xs = _pyramid_axis0(v)
    prev_row = None
    for jx, block in enumerate(xs):
        ys = [b.T for b in _pyramid_axis0(block.T)]
        row = []
        for jy, avg in enumerate(ys):
            d = np.abs(avg)
            if jx > 0:
                d = np.maximum(d, np.repeat(prev_row[jy], 2, axis=0))
            if jy > 0:
                d = np.maximum(d, np.repeat(row[jy - 1], 2, axis=1))
            row.append(d)
        prev_row = row
    return prev_row[-1]


def _subset_ratio_max_np(masks, weights, ncells):
    masks = np.asarray(masks, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    subsets = np.arange(1, 1 << ncells, dtype=np.int64)
    num = np.zeros(subsets.size)
    for m, w in zip(masks, weights):
        num += np.where((subsets & m) == m, w, 0.0)
    cnt = np.bitwise_count(subsets).astype(np.float64)
    ratio = num / cnt
    i = int(np.argmax(ratio))
    return float(num[i]), int(cnt[i]), int(subsets[i])


def _subfamily_ratio_max_np(cover, weights):
    cover = np.asarray(cover, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    m = cover.shape[0]
    best = (-1.0, 1, 0)
    chunk = 4096
    bits = 1 << np.arange(m, dtype=np.int64)
    total = 1 << m
    for start in range(1, total, chunk):
        s = np.arange(start, min(start + chunk, total), dtype=np.int64)
        member = ((s[:, None] & bits[None, :]) != 0).astype(np.float64)
        num = member @ weights
        union = np.count_nonzero(member @ cover > 0.0, axis=1)
        ratio = num / union
        i = int(np.argmax(ratio))
        if ratio[i] * best[1] > best[0] * union[i]:
            best = (float(num[i]), int(union[i]), int(s[i]))
    return best


NUMPY_KERNELS = {
    "analyze_haar": _analyze_haar_np,
    "analyze_avg": _analyze_avg_np,
    "synth_haar": _synth_haar_np,
    "synth_avg": _synth_avg_np,
    "maximal_last": _maximal_last_np,
    "strong_maximal": _strong_maximal_np,
    "subset_ratio_max": _subset_ratio_max_np,
    "subfamily_ratio_max": _subfamily_ratio_max_np,
}


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

@njit
def _analyze_haar_nb(a):
    B, n = a.shape
    out = np.empty((B, n))
    work = np.empty(n)
    for b in range(B):
        for i in range(n):
            work[i] = a[b, i]
        half = n // 2
        while half >= 1:
            fac = 0.5 / np.sqrt(half)
            for k in range(half):
                left = work[2 * k]
                right = work[2 * k + 1]
                out[b, half + k] = (left - right) * fac
                work[k] = 0.5 * (left + right)
            half //= 2
        out[b, 0] = work[0]
    return out


@njit
def _analyze_avg_nb(a):
    B, n = a.shape
    out = np.empty((B, n))
    work = np.empty(n)
    for b in range(B):
        for i in range(n):
            work[i] = a[b, i]
        half = n // 2
        while half >= 1:
            for k in range(half):
                work[k] = 0.5 * (work[2 * k] + work[2 * k + 1])
                out[b, half + k] = work[k]
            half //= 2
        out[b, 0] = work[0]
    return out


@njit
def _synth_haar_nb(h):
    B, n = h.shape
    out = np.empty((B, n))
    heap = np.empty(2 * n)
    for b in range(B):
        heap[1] = h[b, 0]
        half = 1
        while half < n:
            s = np.sqrt(half)
            for k in range(half):
                i = half + k
                d = h[b, i] * s
                heap[2 * i] = heap[i] + d
                heap[2 * i + 1] = heap[i] - d
            half *= 2
        for c in range(n):
            out[b, c] = heap[n + c]
    return out


@njit
def _synth_avg_nb(h):
    B, n = h.shape
    out = np.empty((B, n))
    acc = np.empty(max(n, 2))
    for b in range(B):
        if n == 1:
            out[b, 0] = h[b, 0]
            continue
        acc[1] = h[b, 0] + h[b, 1]
        half = 2
        while half < n:
            for k in range(half):
                i = half + k
                acc[i] = acc[i // 2] + h[b, i] * half
            half *= 2
        for c in range(n):
            out[b, c] = acc[(n + c) // 2]
    return out


@njit
def _maximal_last_nb(a):
    B, n = a.shape
    out = np.empty((B, n))
    heap = np.empty(2 * n)
    mx = np.empty(2 * n)
    for b in range(B):
        for c in range(n):
            heap[n + c] = a[b, c]
        for i in range(n - 1, 0, -1):
            heap[i] = 0.5 * (heap[2 * i] + heap[2 * i + 1])
        mx[1] = abs(heap[1])
        for i in range(2, 2 * n):
            v = abs(heap[i])
            p = mx[i // 2]
            mx[i] = v if v > p else p
        for c in range(n):
            out[b, c] = mx[n + c]
    return out


@njit
def _strong_maximal_nb(v):
    n1, n2 = v.shape
    # 0-based heap along each axis: level j occupies rows 2**j - 1 .. 2**(j+1) - 2
    xp = np.empty((2 * n1 - 1, n2))
    for k in range(n1):
        for y in range(n2):
            xp[n1 - 1 + k, y] = v[k, y]
    for i in range(n1 - 2, -1, -1):
        for y in range(n2):
            xp[i, y] = 0.5 * (xp[2 * i + 1, y] + xp[2 * i + 2, y])
    P = np.empty((2 * n1 - 1, 2 * n2 - 1))
    for i in range(2 * n1 - 1):
        for k in range(n2):
            P[i, n2 - 1 + k] = xp[i, k]
        for j in range(n2 - 2, -1, -1):
            P[i, j] = 0.5 * (P[i, 2 * j + 1] + P[i, 2 * j + 2])
    # sup over ancestors, parents first: both heap parents have smaller indices
    M = np.empty_like(P)
    for i in range(2 * n1 - 1):
        pi = (i - 1) // 2
        for j in range(2 * n2 - 1):
            m = abs(P[i, j])
            if i > 0 and M[pi, j] > m:
                m = M[pi, j]
            if j > 0 and M[i, (j - 1) // 2] > m:
                m = M[i, (j - 1) // 2]
            M[i, j] = m
    out = np.empty((n1, n2))
    for x in range(n1):
        for y in range(n2):
            out[x, y] = M[n1 - 1 + x, n2 - 1 + y]
    return out


@njit
def _subset_ratio_max_nb(masks, weights, ncells):
    best_num = -1.0
    best_cnt = 1
    best_set = 0
    for s in range(1, 1 << ncells):
        num = 0.0
        for r in range(masks.size):
            if (s & masks[r]) == masks[r]:
                num += weights[r]
        cnt = 0
        t = s
        while t:
            t &= t - 1
            cnt += 1
        if num * best_cnt > best_num * cnt:
            best_num = num
            best_cnt = cnt
            best_set = s
    return best_num, best_cnt, best_set


@njit
def _subfamily_ratio_max_nb(cover, weights):
    m, ncells = cover.shape
    counts = np.zeros(ncells, dtype=np.int64)
    member = np.zeros(m, dtype=np.bool_)
    union = 0
    best_num = -1.0
    best_cnt = 1
    best_set = 0
    gray = 0
    for i in range(1, 1 << m):
        r = 0
        while not (i >> r) & 1:
            r += 1
        gray ^= 1 << r
        if member[r]:
            member[r] = False
            for c in range(ncells):
                if cover[r, c]:
                    counts[c] -= 1
                    if counts[c] == 0:
                        union -= 1
        else:
            member[r] = True
            for c in range(ncells):
                if cover[r, c]:
                    if counts[c] == 0:
                        union += 1
                    counts[c] += 1
        # weights are recomputed rather than accumulated to avoid drift
        num = 0.0
        for q in range(m):
            if member[q]:
                num += weights[q]
        if num * best_cnt > best_num * union:
            best_num = num
            best_cnt = union
            best_set = gray
    return best_num, best_cnt, best_set


if HAVE_NUMBA:
    NUMBA_KERNELS = {
        "analyze_haar": _analyze_haar_nb,
        "analyze_avg": _analyze_avg_nb,
        "synth_haar": _synth_haar_nb,
        "synth_avg": _synth_avg_nb,
        "maximal_last": _maximal_last_nb,
        "strong_maximal": _strong_maximal_nb,
        "subset_ratio_max": lambda masks, weights, ncells: _subset_ratio_max_nb(
            np.ascontiguousarray(masks, dtype=np.int64),
            np.ascontiguousarray(weights, dtype=np.float64),
            int(ncells),
        ),
        "subfamily_ratio_max": lambda cover, weights: _subfamily_ratio_max_nb(
            np.ascontiguousarray(cover, dtype=np.bool_),
            np.ascontiguousarray(weights, dtype=np.float64),
        ),
    }
else:  # pragma: no cover
    NUMBA_KERNELS = {}


def _contig(fn):
    def wrapped(a):
        return fn(np.ascontiguousarray(a, dtype=np.float64))

    wrapped.__name__ = getattr(fn, "__name__", "kernel")
    return wrapped


for _name in ("analyze_haar", "analyze_avg", "synth_haar", "synth_avg", "maximal_last", "strong_maximal"):
    if _name in NUMBA_KERNELS:
        NUMBA_KERNELS[_name] = _contig(NUMBA_KERNELS[_name])

_backend = None


def set_backend(name):
    """Rebind the module-level kernels to ``"numba"`` or ``"numpy"``."""
    global _backend
    if name == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba is not installed")
        table = NUMBA_KERNELS
    elif name == "numpy":
        table = NUMPY_KERNELS
    else:
        raise ValueError(f"unknown backend {name!r}")
    globals().update(table)
    _backend = name


def backend():
    return _backend


set_backend("numba" if HAVE_NUMBA and numba_requested() else "numpy")
