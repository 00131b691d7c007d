"""One- and bi-parameter dyadic paraproducts.

A signature assigns to each axis a pair ``(a, b)`` of kinds (1 = Haar
coefficient, 0 = average) used for ``f`` and ``g``; the output function on
that axis is ``h_I`` when ``a + b`` is odd and ``chi_I / |I|`` when it is
even. All sums run over the cancellative intervals of the grid, so on
[0,1) the product expansion picks up an explicit root-mean correction
(see :func:`root_mean_correction_1d` / :func:`root_mean_correction_2d`).
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .dyadic import (
    DyadicError,
    GridMismatchError,
    HaarCoeffs1D,
    HaarCoeffs2D,
    Signal1D,
    Signal2D,
    analyze,
    analyze2,
    haar_forward_2d,
    haar_inverse_1d,
    haar_inverse_2d,
    inner_product,
    synth,
    synth2,
)


class SymmetryError(DyadicError):
    pass


def _check_pair(pair):
    a, b = (int(v) for v in pair)
    if a not in (0, 1) or b not in (0, 1):
        raise ValueError(f"kinds must be 0 or 1, got {pair}")
    if (a, b) == (0, 0):
        raise ValueError("(0, 0) is not a paraproduct signature")
    return a, b


@dataclass(frozen=True)
class ParaSignature:
    """Per-axis (f kind, g kind) pairs; ``y`` is None for one parameter."""

    x: Tuple[int, int]
    y: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        object.__setattr__(self, "x", _check_pair(self.x))
        if self.y is not None:
            object.__setattr__(self, "y", _check_pair(self.y))

    @property
    def dims(self):
        return 1 if self.y is None else 2

    @property
    def output(self):
        ox = (self.x[0] + self.x[1]) % 2
        if self.y is None:
            return (ox,)
        return ox, (self.y[0] + self.y[1]) % 2

    def adjoint(self):
        """Signature of f' -> T*f' where T f = pi(f, g) with g frozen."""

        def flip(pair):
            a, b = pair
            return ((a + b) % 2, b)

        return ParaSignature(flip(self.x), None if self.y is None else flip(self.y))

    @classmethod
    def parse(cls, text):
        """``"01"`` (one parameter) or ``"01,10"`` (x pair, y pair)."""
        parts = text.replace("(", "").replace(")", "").split(",")
        pairs = [tuple(int(c) for c in p.strip()) for p in parts]
        if len(pairs) == 1:
            return cls(pairs[0])
        if len(pairs) == 2:
            return cls(pairs[0], pairs[1])
        raise ValueError(f"cannot parse signature {text!r}")

    def __str__(self):
        s = f"{self.x[0]}{self.x[1]}"
        if self.y is not None:
            s += f",{self.y[0]}{self.y[1]}"
        return s


ONE_PARAMETER = [ParaSignature(p) for p in ((0, 1), (1, 0), (1, 1))]
TWO_PARAMETER = [ParaSignature(p, q) for p in ((0, 1), (1, 0), (1, 1)) for q in ((0, 1), (1, 0), (1, 1))]


def _zero_root(heap):
    heap[..., 0] = 0.0
    return heap


def _zero_root2(heap):
    heap[..., 0, :] = 0.0
    heap[..., :, 0] = 0.0
    return heap


def para_one(sig, f, g):
    """sum_I <f, h^a_I> <g, h^b_I> h^(a+b)_I over cancellative I."""
    if sig.dims != 1:
        raise ValueError("para_one needs a one-parameter signature")
    if f.grid != g.grid:
        raise GridMismatchError(f"grid mismatch: {f.grid} vs {g.grid}")
    (a, b), (o,) = sig.x, sig.output
    prod = _zero_root(analyze(f.values, -1, a) * analyze(g.values, -1, b))
    return f.like(synth(prod, -1, o))


def para_two(sig, f, g):
    """The tensor paraproduct pi^x (x) pi^y evaluated on the grid."""
    if sig.dims != 2:
        raise ValueError("para_two needs a two-parameter signature")
    if f.grid != g.grid:
        raise GridMismatchError(f"grid mismatch: {f.grid} vs {g.grid}")
    (ax, bx), (ay, by) = sig.x, sig.y
    ox, oy = sig.output
    prod = _zero_root2(analyze2(f.values, ax, ay) * analyze2(g.values, bx, by))
    return f.like(synth2(prod, ox, oy))


def root_mean_correction_1d(f, g):
    """f*g minus the sum of the three paraproducts: <f><g> on [0,1)."""
    return f.like(np.full(f.grid.shape, f.values.mean() * g.values.mean()))


def root_mean_correction_2d(f, g):
    """f*g minus the sum of the nine paraproducts on [0,1)^2.

    Equal to fx(y) gx(y) + fy(x) gy(x) - <f><g>, where fx is the x-average
    and fy the y-average of f.
    """
    fx, gx = f.values.mean(axis=0), g.values.mean(axis=0)
    fy, gy = f.values.mean(axis=1), g.values.mean(axis=1)
    v = (fx * gx)[None, :] + (fy * gy)[:, None] - f.values.mean() * g.values.mean()
    return f.like(v)


# ---------------------------------------------------------------------------
# linear operators with a frozen symbol
# ---------------------------------------------------------------------------

def as_signal(g):
    if isinstance(g, (Signal1D, Signal2D)):
        return g
    if isinstance(g, HaarCoeffs1D):
        return haar_inverse_1d(g)
    if isinstance(g, HaarCoeffs2D):
        return haar_inverse_2d(g)
    raise TypeError(f"cannot use {type(g).__name__} as a symbol")


class ParaOperator:
    """f -> pi^sig(f, g) for a frozen g; the symbol's coefficients are cached."""

    def __init__(self, signature, g, tag=None):
        self.signature = signature
        self.g = as_signal(g)
        self.tag = tag or f"eps:{signature}"
        if signature.dims != self.g.dims:
            raise ValueError(f"signature {signature} does not match a {self.g.dims}D symbol")
        if signature.dims == 1:
            self._g = analyze(self.g.values, -1, signature.x[1])
        else:
            self._g = analyze2(self.g.values, signature.x[1], signature.y[1])

    @property
    def grid(self):
        return self.g.grid

    @property
    def dims(self):
        return self.signature.dims

    def apply_values(self, values):
        """Apply to raw value arrays; leading axes are treated as a batch."""
        sig = self.signature
        if sig.dims == 1:
            prod = _zero_root(analyze(values, -1, sig.x[0]) * self._g)
            return synth(prod, -1, sig.output[0])
        prod = _zero_root2(analyze2(values, sig.x[0], sig.y[0]) * self._g)
        return synth2(prod, *sig.output)

    def apply(self, f):
        if f.grid != self.grid:
            raise GridMismatchError(f"grid mismatch: {f.grid} vs {self.grid}")
        return f.like(self.apply_values(f.values))

    __call__ = apply

    def adjoint(self):
        return ParaOperator(self.signature.adjoint(), self.g, tag=f"{self.tag}^t")

    def __repr__(self):
        return f"ParaOperator({self.tag}, grid={self.grid})"


NAMED_SIGNATURES = {
    "Pi1": ParaSignature((0, 1), (0, 1)),
    "Pi1Adjoint": ParaSignature((1, 1), (1, 1)),
    "Pi2": ParaSignature((1, 0), (1, 0)),
    "Pi3": ParaSignature((0, 1), (1, 0)),
    "Pi4": ParaSignature((0, 1), (1, 1)),
    "PiG": ParaSignature((0, 1)),
    "PiGPrime": ParaSignature((1, 1)),
    "PiGDoublePrime": ParaSignature((1, 0)),
}

CLI_NAMES = {
    "pi1": "Pi1",
    "pi1t": "Pi1Adjoint",
    "pi2": "Pi2",
    "pi3": "Pi3",
    "pi4": "Pi4",
    "pig": "PiG",
    "pigp": "PiGPrime",
    "pigpp": "PiGDoublePrime",
}


def NamedOperator(tag, g):
    """The operator called ``tag`` (``"Pi3"``, ``"pi3"``, ``"eps:01,10"``...) with symbol g."""
    if tag.startswith("eps:"):
        return ParaOperator(ParaSignature.parse(tag[4:]), g)
    tag = CLI_NAMES.get(tag, tag)
    if tag not in NAMED_SIGNATURES:
        raise ValueError(f"unknown operator {tag!r}")
    return ParaOperator(NAMED_SIGNATURES[tag], g, tag=tag)


def apply_named(op, f):
    return op.apply(f)


def adjoint_pair_check(op, f, f2):
    """Both sides of the duality identity for ``op``.

    For ``Pi4`` the pair is (<pi4_g f, f'>, <pi3_f' f, g>); otherwise it is
    (<T f, f'>, <f, T* f'>).
    """
    if op.tag == "Pi4":
        lhs = inner_product(op.apply(f), f2)
        rhs = inner_product(NamedOperator("Pi3", f2).apply(f), op.g)
        return lhs, rhs
    return inner_product(op.apply(f), f2), inner_product(f, op.adjoint().apply(f2))


def transpose_symmetry_check(g, f):
    """max |(pi4_g)^t(f~)(y, x) - pi4_g(f)(x, y)| with f~(x, y) = f(y, x)."""
    if not isinstance(g, HaarCoeffs2D):
        g = haar_forward_2d(g)
    if g.grid.n1 != g.grid.n2:
        raise SymmetryError("symmetry precondition violated: grid is not square")
    cc = g.cc
    if not np.allclose(cc, cc.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(cc).max(initial=0.0)))):
        raise SymmetryError("symmetry precondition violated")
    op = NamedOperator("Pi4", g)
    lhs = op.adjoint().apply(f.transpose()).values.T
    rhs = op.apply(f).values
    return float(np.max(np.abs(lhs - rhs)))
