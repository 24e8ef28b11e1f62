"""Command-line front end: ``geospca run`` and ``geospca synth``.

Every solver mode writes one JSON report with the same top-level keys
(keys that do not apply to a mode are null) and prints a one-line summary.
Relative output paths are resolved against ``$GEOSPCA_OUTPUT_DIR`` when set.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path
from typing import List, Optional

from . import io
from .baselines import brute_force, classic_pca, greedy_support
from .engine import EngineConfig, apriori_bound, solve
from .errors import GeoSPCAError, ShapeError
from .linalg import spectral_summary
from .master import BlockSpec
from .variants import (
    SHAPES,
    GridPatternSpec,
    generate_patterns,
    prefilter_patterns,
    read_patterns,
    solve_disjoint_blocks,
    solve_structured,
)

MODES = ("common", "blocks", "structured", "greedy", "oracle", "bounds")
OUTPUT_DIR_ENV = "GEOSPCA_OUTPUT_DIR"

REPORT_KEYS = (
    "mode", "support", "psi", "f_value", "eta_star", "gap_bound", "apriori_bound",
    "certificate", "cuts", "runtime_ms", "trace",
)


class UsageError(ValueError):
    pass


def _int_list(text: str) -> List[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _grid(text: str):
    try:
        w, h = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    return w, h


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geospca",
        description="Sparse PCA with a shared support found by cut generation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one instance and write a JSON report")
    src = run.add_argument_group("input")
    src.add_argument("input", nargs="?", help="data file, rows are observations")
    src.add_argument("--format", choices=io.FORMATS, help="input format (default: from the file suffix)")
    src.add_argument("--header", action="store_true", help="skip the first CSV line")
    src.add_argument("--no-center", action="store_true", help="do not subtract column means")
    src.add_argument("--synth", nargs=4, metavar=("N", "P", "RANK", "NOISE"),
                     help="use a synthetic instance instead of a file")
    src.add_argument("--seed", type=int, default=0, help="seed for --synth (default: 0)")

    run.add_argument("--mode", choices=MODES, default="common", help="solver to run (default: common)")

    eng = run.add_argument_group("common support (modes common, greedy, oracle, bounds)")
    eng.add_argument("-k", "--k", type=int, help="support size")
    eng.add_argument("-a", "--a", type=int, help="number of components")
    eng.add_argument("--eta0", type=float, help="initial residual threshold (default: ||X||_F^2)")
    eng.add_argument("--delta", type=float, help="threshold decrement (default: 1e-6 ||X||_F^2)")
    eng.add_argument("--patience", type=int, default=25, help="iterations without improvement before stopping")
    eng.add_argument("--max-cuts", type=int, default=10_000, help="cut budget")
    eng.add_argument("--tolerance", type=float, default=1e-9, help="relative feasibility tolerance")
    eng.add_argument("--oracle-limit", type=int, default=10**6, help="max supports enumerated by mode oracle")

    blk = run.add_argument_group("disjoint blocks (mode blocks)")
    blk.add_argument("--block-k", type=_int_list, help="comma-separated support size per block")
    blk.add_argument("--block-a", type=_int_list, help="comma-separated components per block (default: 1 each)")
    blk.add_argument("--block-eta", type=_float_list,
                     help="comma-separated residual threshold per block (default: --eta-tau for every block)")

    pat = run.add_argument_group("structured supports (mode structured)")
    pat.add_argument("--grid", type=_grid, help="pixel grid WxH; columns are pixels in row-major order")
    pat.add_argument("--shapes", default=",".join(SHAPES), help="comma-separated subset of " + ", ".join(SHAPES))
    pat.add_argument("--min-size", type=int, default=1, help="smallest pattern, in pixels")
    pat.add_argument("--max-size", type=int, help="largest pattern, in pixels")
    pat.add_argument("--patterns", help="pattern catalog file (overrides --grid)")
    pat.add_argument("--b", type=int, help="maximum number of patterns selected")
    pat.add_argument("--eta-tau", type=float, help="residual threshold per pattern or block")
    pat.add_argument("--overlapping", action="store_true",
                     help="one group of components on the union of the selected patterns")

    out = run.add_argument_group("output")
    out.add_argument("--output", "-o", help="JSON report path (default: standard output)")
    out.add_argument("--trace", help="CSV trace path, columns t,eta,psi,f,cuts (mode common)")

    syn = sub.add_parser("synth", help="write a seeded low-rank-plus-noise matrix as CSV")
    syn.add_argument("--seed", type=int, required=True)
    syn.add_argument("--n", type=int, required=True, help="observations")
    syn.add_argument("--p", type=int, required=True, help="features")
    syn.add_argument("--rank", type=int, required=True)
    syn.add_argument("--noise", type=float, required=True, help="scale of the Gaussian noise")
    syn.add_argument("--output", "-o", required=True, help="CSV path")
    return parser


def _resolve(path: Optional[str]) -> Optional[Path]:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def validate(args) -> None:
    """Check mode-specific flags before any data is read."""
    if (args.input is None) == (args.synth is None):
        raise UsageError("give exactly one of an input file or --synth")
    mode = args.mode
    if mode in ("common", "greedy", "oracle", "bounds"):
        missing = [f"--{f}" for f in ("k", "a") if getattr(args, f) is None]
        if missing:
            raise UsageError(f"mode {mode} requires {', '.join(missing)}")
        if args.k < 1 or args.a < (0 if mode == "bounds" else 1):
            raise UsageError("k must be positive and a must be positive")
    elif mode == "blocks":
        if not args.block_k:
            raise UsageError("mode blocks requires --block-k")
        b = len(args.block_k)
        if args.block_a is not None and len(args.block_a) != b:
            raise UsageError("--block-a must list one value per block")
        if args.block_eta is None and args.eta_tau is None:
            raise UsageError("mode blocks requires --block-eta or --eta-tau")
        if args.block_eta is not None and len(args.block_eta) != b:
            raise UsageError("--block-eta must list one value per block")
    elif mode == "structured":
        if args.grid is None and args.patterns is None:
            raise UsageError("mode structured requires --grid or --patterns")
        missing = [f for f, v in (("-a", args.a), ("--b", args.b), ("--eta-tau", args.eta_tau)) if v is None]
        if missing:
            raise UsageError(f"mode structured requires {', '.join(missing)}")
        shapes = tuple(s.strip() for s in args.shapes.split(",") if s.strip())
        unknown = set(shapes) - set(SHAPES)
        if unknown:
            raise UsageError(f"unknown shapes: {', '.join(sorted(unknown))}")
    if args.trace and mode != "common":
        raise UsageError("--trace is only produced by mode common")


def _load(args):
    if args.synth is not None:
        n, p, rank = (int(x) for x in args.synth[:3])
        return io.synth(args.seed, n, p, rank, float(args.synth[3]), center=not args.no_center)
    return io.load_matrix(args.input, fmt=args.format, center=not args.no_center, header=args.header)


def _blank(mode: str) -> dict:
    doc = dict.fromkeys(REPORT_KEYS)
    doc["mode"] = mode
    doc["cuts"] = 0
    doc["trace"] = []
    return doc


def _run_common(X, args, doc):
    cfg = EngineConfig(a=args.a, k=args.k, eta0=args.eta0, delta=args.delta, patience=args.patience,
                       max_cuts=args.max_cuts, tolerance=args.tolerance)
    rep = solve(X, cfg)
    doc.update(
        support=list(rep.support), psi=rep.psi, f_value=rep.f_value, eta_star=rep.eta_star,
        gap_bound=rep.gap_bound, apriori_bound=rep.apriori_bound, certificate=rep.certificate,
        cuts=rep.cuts_generated,
        trace=[{"t": r.t, "eta": r.eta, "psi": r.psi, "f": r.f, "cuts": r.cuts, "support": list(r.support)}
               for r in rep.trace],
        upper_bound=rep.upper_bound, stop_reason=rep.stop_reason,
    )
    return rep


def _run_oracle(X, args, doc):
    s, value, eta = brute_force(X, args.k, args.a, limit=args.oracle_limit)
    doc.update(support=list(s), psi=value + eta, f_value=value, eta_star=eta, gap_bound=0.0,
               certificate="Optimal")


def _run_greedy(X, args, doc):
    s, trace = greedy_support(X, args.k, args.a)
    summ = spectral_summary(X, s, args.a, with_basis=False)
    doc.update(support=list(s), psi=summ.mu, f_value=summ.pi, eta_star=summ.eta,
               certificate="Heuristic", greedy_trace=trace)


def _run_bounds(X, args, doc):
    pca = classic_pca(X, args.a)
    doc.update(apriori_bound=apriori_bound(X, args.a, args.k),
               pca_explained=float(pca.explained[-1]) if args.a > 0 else 0.0,
               total_variance=X.frobenius_sq)


def _run_blocks(X, args, doc):
    b = len(args.block_k)
    spec = BlockSpec(k=tuple(args.block_k), a=tuple(args.block_a or [1] * b),
                     eta=tuple(args.block_eta or [args.eta_tau] * b))
    rep = solve_disjoint_blocks(X, spec, max_cuts=args.max_cuts, tolerance=args.tolerance)
    doc.update(support=[list(s) for s in rep.supports], psi=rep.psi_total, f_value=rep.f_value,
               eta_star=math.fsum(spec.eta), gap_bound=rep.gap_bound, certificate=rep.certificate,
               cuts=sum(rep.cuts_per_block), upper_bound=rep.upper_bound,
               blocks=[{"support": list(s), "psi": ps, "pi": pi, "eta": e, "cuts": c}
                       for s, ps, pi, e, c in zip(rep.supports, rep.psi, rep.pi, rep.eta, rep.cuts_per_block)])


def _run_structured(X, args, doc):
    if args.patterns is not None:
        pats = read_patterns(args.patterns)
    else:
        w, h = args.grid
        if w * h != X.p:
            raise ShapeError(f"grid {w}x{h} has {w * h} pixels but the data has {X.p} columns")
        shapes = tuple(s.strip() for s in args.shapes.split(",") if s.strip())
        pats = generate_patterns(GridPatternSpec(w, h, shapes, args.min_size, args.max_size))
    bad = [pat for pat in pats.patterns if pat and pat[-1] >= X.p]
    if bad:
        raise ShapeError(f"pattern {list(bad[0])} indexes beyond p={X.p}")
    pats = prefilter_patterns(X, pats, args.a, args.eta_tau)
    rep = solve_structured(X, pats, args.a, args.b, args.eta_tau, disjoint=not args.overlapping)
    doc.update(support=[list(s) for s in rep.supports], psi=rep.psi, f_value=rep.f_value,
               eta_star=rep.union_eta if args.overlapping else args.eta_tau,
               gap_bound=rep.gap_bound, certificate=rep.bound_status,
               selected_patterns=list(rep.selected), union=list(rep.union),
               admissible_patterns=int(sum(pats.admissible)), total_patterns=len(pats))


RUNNERS = {
    "common": _run_common,
    "oracle": _run_oracle,
    "greedy": _run_greedy,
    "bounds": _run_bounds,
    "blocks": _run_blocks,
    "structured": _run_structured,
}


def _summary(doc: dict) -> str:
    f = doc.get("f_value")
    gap = doc.get("gap_bound")
    if f is None:
        return f"mode={doc['mode']} apriori_bound={doc['apriori_bound']:.6g} time={doc['runtime_ms'] / 1e3:.3f}s"
    gap_pct = "n/a" if gap is None else f"{100.0 * gap / f:.3f}%" if f > 0 else "0.000%"
    return (f"f_value={f:.10g} GAP={gap_pct} cuts={doc['cuts']} "
            f"time={doc['runtime_ms'] / 1e3:.3f}s certificate={doc['certificate']}")


def _error(exc: BaseException) -> dict:
    err = {"type": type(exc).__name__, "message": str(exc)}
    for attr in ("line", "column"):
        if getattr(exc, attr, None) is not None:
            err[attr] = getattr(exc, attr)
    return {"error": err}


def cmd_run(args) -> int:
    validate(args)
    t0 = time.perf_counter()
    X = _load(args)
    doc = _blank(args.mode)
    rep = RUNNERS[args.mode](X, args, doc)
    doc["runtime_ms"] = 1e3 * (time.perf_counter() - t0)
    text = io.dumps_report(doc)
    out = _resolve(args.output)
    if args.trace:
        io.write_trace_csv(_resolve(args.trace), rep.trace)
    if out is None:
        sys.stdout.write(text)
        print(_summary(doc), file=sys.stderr)
    else:
        io.atomic_write_text(out, text)
        print(_summary(doc))
    return 0


def cmd_synth(args) -> int:
    out = _resolve(args.output)
    io.synth(args.seed, args.n, args.p, args.rank, args.noise, path=out)
    print(f"wrote {args.n}x{args.p} matrix to {out}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_synth(args)
    except (GeoSPCAError, ValueError, OSError) as exc:
        print(io.dumps_report(_error(exc)), end="", file=sys.stderr)
        return 2 if isinstance(exc, UsageError) else 1


if __name__ == "__main__":
    sys.exit(main())
