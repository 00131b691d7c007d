"""Command-line interface.

Exit status is 0 on success, 1 when a verification check fails and 2 on
malformed input. JSON reports carry the package version, the parsed
configuration, the seed and the wall-clock time; ``--no-timing`` writes
``null`` for the time so repeated runs are byte-identical.
"""

import argparse
import csv
import io as _io
import json
import sys
import time

from . import __version__
from . import functionals as F
from . import opnorm as O
from . import sparse as SP
from .corpus import TAGS, generate_corpus, generate_signals
from .dyadic import (
    DyadicError,
    DyadicInterval,
    Grid2D,
    HaarCoeffs1D,
    Signal1D,
    haar_forward_1d,
    haar_forward_2d,
    haar_inverse_1d,
    haar_inverse_2d,
    slice_transform,
)
from .io import (
    InputError,
    coeffs_from_json,
    coeffs_to_json,
    decomposition_to_json,
    dumps,
    family_from_json,
    family_to_json,
    load_any,
    read_json,
    signal_from_json,
    signal_to_json,
)
from .paraproducts import NamedOperator
from .verify import SUITES, run_suites

METHODS = {"l2", "search", "thm1", "thm2", "matrix-view"}


def _load_signal(path, field):
    try:
        return load_any(read_json(path))
    except InputError as e:
        raise InputError(f"{field} ({e.field})", str(e).split(": ", 1)[-1]) from None


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "no_timing", "out")}


def _envelope(args, result, started):
    return {
        "version": __version__,
        "config": _config(args),
        "seed": getattr(args, "seed", None),
        "wall_clock_s": None if args.no_timing else round(time.perf_counter() - started, 6),
        "result": result,
    }


def _emit(args, text):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_transform(args):
    doc = read_json(args.input)
    if args.slices:
        f = signal_from_json(doc)
        if f.dims != 2:
            raise InputError("dims", "slice transform needs a 2D signal")
        sc = slice_transform(f, axis=args.slices)
        return {
            "axis": sc.axis,
            "mean_slice": [float(v) for v in sc.mean_slice],
            "slices": [
                {"level": I.level, "index": I.index, "values": [float(v) for v in sc.slices[i - 1]]}
                for i in range(1, len(sc) + 1)
                for I in [DyadicInterval.from_heap(i)]
            ],
        }
    if "values" in doc:
        f = signal_from_json(doc)
        return coeffs_to_json(haar_forward_1d(f) if isinstance(f, Signal1D) else haar_forward_2d(f))
    c = coeffs_from_json(doc)
    return signal_to_json(haar_inverse_1d(c) if isinstance(c, HaarCoeffs1D) else haar_inverse_2d(c))


def cmd_apply(args):
    g = _load_signal(args.g, "g")
    f = _load_signal(args.f, "f")
    if f.grid != g.grid:
        raise InputError("f", f"grid {f.grid} does not match the symbol grid {g.grid}")
    op = NamedOperator(args.op, g)
    return signal_to_json(op.apply(f))


def cmd_norm(args):
    f = _load_signal(args.f, "f")
    kind = F.NormKind.parse(args.kind)
    return {"kind": str(kind), "value": F.norm(f, kind)}


def cmd_opnorm(args):
    g = _load_signal(args.g, "g")
    if args.method == "matrix-view":
        return O.pi4_matrix_bound(g).to_dict()
    if args.method == "thm1":
        _, rep = O.thm1_witness(g, args.p, args.r)
        return rep.to_dict()
    if args.method == "thm2":
        rows = None
        if args.rows:
            rows = [DyadicInterval(*map(int, r.split(":"))) for r in args.rows]
        _, rep = O.thm2_row_witness(
            g, args.p, args.r, rows, restarts=args.restarts, iterations=args.iters, seed=args.seed
        )
        return rep.to_dict()
    op = NamedOperator(args.op, g)
    if args.method == "l2":
        return O.opnorm_l2(op, seed=args.seed, dense_check=args.dense_check).to_dict()
    rep = O.opnorm_search(
        op,
        F.NormKind.parse(args.in_norm),
        F.NormKind.parse(args.out_norm),
        restarts=args.restarts,
        iterations=args.iters,
        seed=args.seed,
        domain=args.domain,
    )
    return rep.to_dict()


def cmd_sparse(args):
    if args.levelset is not None:
        g = _load_signal(args.g, "g")
        fam = SP.level_set_rectangles(g, args.levelset)
    else:
        if not args.family or not args.resolution:
            raise InputError("family", "--family and --resolution are required")
        fam = family_from_json(read_json(args.family), Grid2D(*args.resolution))
    out = {"family": family_to_json(fam)}
    if args.extract or args.jn is not None:
        sf = SP.sparse_extract(fam)
        out["sparse"] = {
            "family": family_to_json(sf.base),
            "union_ratio": sf.union_ratio,
            "witness_cells": [len(sf.witness[R]) for R in sf.base.rects],
            "is_sparse": sf.is_sparse(),
        }
        if args.jn is not None:
            out["jn_profile"] = SP.jn_profile(sf, args.jn)
    if args.carleson:
        out["carleson"] = SP.carleson_constant(fam, args.carleson)
    return out


def cmd_decompose(args):
    f = _load_signal(args.f, "f")
    return decomposition_to_json(SP.atomic_decompose(f, args.p, args.s))


def cmd_construct(args):
    build = O.build_hadamard_example if args.example == "hadamard" else O.build_identity_example
    return coeffs_to_json(build(args.n, args.resolution))


def cmd_generate(args):
    paths = generate_corpus(args.tag, args.count, args.seed, args.n, args.n2, args.dir)
    return {"files": paths, "manifest": f"{args.dir}/manifest.json"}


def cmd_verify(args):
    checks = run_suites(args.suite, seed=args.seed, n=args.n, count=args.count)
    rows = [
        {"suite": c.suite, "check": c.name, "passed": c.passed, "measured": c.measured, "bound": c.bound}
        for c in checks
    ]
    return {"checks": rows, "passed": all(c.passed for c in checks)}


REPORT_QUANTITIES = (
    "hp-square:1",
    "hp-square:2",
    "hp-maximal:2",
    "product-bmo-heuristic",
    "slice-bmo-sup",
)


def cmd_report(args):
    signals = generate_signals(args.tag, args.count, args.seed, args.n, args.n2)
    rows = []
    for i, f in enumerate(signals):
        tag = f"{args.seed}/{i}"
        n1, n2 = f.grid.resolution
        for q in REPORT_QUANTITIES:
            rows.append([tag, n1, n2, q, F.norm(f, q)])
        d = SP.atomic_decompose(f, 1.0, 2.0)
        rows.append([tag, n1, n2, "atomic-size/hp-square:1", d.size() / F.norm(f, F.HpSquare(1))])
        _, rep = O.thm1_witness(f, 2.0, 2.0)
        rows.append([tag, n1, n2, "thm1-ratio/hp-square:2", rep.diagnostics["ratio_over_g"]])
    return rows


COMMANDS = {
    "transform": cmd_transform,
    "apply": cmd_apply,
    "norm": cmd_norm,
    "opnorm": cmd_opnorm,
    "sparse": cmd_sparse,
    "decompose": cmd_decompose,
    "construct": cmd_construct,
    "generate": cmd_generate,
    "verify": cmd_verify,
    "report": cmd_report,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="bipara", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--no-timing", action="store_true", help="omit wall-clock time")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", parents=[common], help="Haar analysis or synthesis")
    p.add_argument("input")
    p.add_argument("--slices", choices=("x", "y"), help="emit per-interval slices instead")

    p = sub.add_parser("apply", parents=[common], help="apply a paraproduct")
    p.add_argument("--op", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--f", required=True)

    p = sub.add_parser("norm", parents=[common], help="evaluate a norm")
    p.add_argument("--kind", required=True, help="e.g. lp:2, hp-square:1, product-bmo-exact")
    p.add_argument("--f", required=True)

    p = sub.add_parser("opnorm", parents=[common], help="operator-norm experiments")
    p.add_argument("--op", default="pi4")
    p.add_argument("--g", required=True)
    p.add_argument("--method", choices=sorted(METHODS), default="l2")
    p.add_argument("--in-norm", default="hp-square:2")
    p.add_argument("--out-norm", default="hp-square:2")
    p.add_argument("--domain", choices=("cc", "full"), default="cc")
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--rows", nargs="*", help="row intervals as level:index")
    p.add_argument("--dense-check", action="store_true")

    p = sub.add_parser("sparse", parents=[common], help="Carleson and sparse families")
    p.add_argument("--family")
    p.add_argument("--resolution", type=int, nargs=2)
    p.add_argument("--g", help="signal for --levelset")
    p.add_argument("--levelset", type=float, help="build the level-set family of --g")
    p.add_argument("--extract", action="store_true")
    p.add_argument("--carleson", choices=("exact", "restricted"))
    p.add_argument("--jn", type=float)

    p = sub.add_parser("decompose", parents=[common], help="atomic decomposition")
    p.add_argument("--f", required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--s", type=float, default=2.0)

    p = sub.add_parser("construct", parents=[common], help="Hadamard or identity symbol")
    p.add_argument("--example", choices=("hadamard", "identity"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--resolution", type=int)

    p = sub.add_parser("generate", parents=[common], help="write a seeded corpus")
    p.add_argument("--tag", choices=TAGS, default="gaussian")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--n2", type=int)
    p.add_argument("--dir", default="corpus")

    p = sub.add_parser("verify", parents=[common], help="run property suites")
    p.add_argument("--suite", nargs="+", default=["all"], choices=sorted(SUITES) + ["all"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--format", choices=("json", "csv", "table"), default="table")

    p = sub.add_parser("report", parents=[common], help="corpus envelope CSV")
    p.add_argument("--tag", choices=TAGS, default="gaussian")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--n2", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def _csv_text(header_meta, columns, rows):
    buf = _io.StringIO()
    for k, v in header_meta.items():
        buf.write(f"# {k}: {json.dumps(v, sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _render(args, result, started):
    env = _envelope(args, result, started)
    if args.command == "report" and args.format == "csv":
        meta = {k: v for k, v in env.items() if k != "result"}
        return _csv_text(meta, ["seed", "n1", "n2", "quantity", "value"], result)
    if args.command == "verify" and args.format != "json":
        meta = {k: v for k, v in env.items() if k != "result"}
        rows = [[r["suite"], r["check"], "pass" if r["passed"] else "FAIL", repr(r["measured"]), r["bound"]] for r in result["checks"]]
        if args.format == "csv":
            return _csv_text(meta, ["suite", "check", "status", "measured", "bound"], rows)
        width = max(len(r[1]) for r in rows) if rows else 10
        lines = [f"{r[0]:<10} {r[1]:<{width}} {r[2]:<4} {r[3]:<24} {r[4]}" for r in rows]
        return "\n".join(lines) + f"\n{'all checks passed' if result['passed'] else 'verification FAILED'}\n"
    return dumps(env)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        result = COMMANDS[args.command](args)
    except InputError as e:
        sys.stderr.write(dumps({"error": str(e), "field": e.field}))
        return 2
    except (DyadicError, ValueError) as e:
        sys.stderr.write(dumps({"error": str(e), "field": None}))
        return 2
    _emit(args, _render(args, result, started))
    if args.command == "verify" and not result["passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
