"""Command-line entry point.

Every command prints a short human-readable report followed by one line
``record: {...}`` holding the same data as JSON.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import bifurcation, ctnn, separation, snre, treeshift
from .errors import BoundaryParameter, InternalInconsistency, ParseError, ResourceLimitError

EXIT_OK, EXIT_PARSE, EXIT_CAP, EXIT_BOUNDARY, EXIT_INCONSISTENT = 0, 2, 3, 4, 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ParseError(message)


def _emit(lines, record):
    for line in lines:
        print(line)
    print("record: " + json.dumps(record, sort_keys=True, default=str))


def _pattern_string(pattern, d, height) -> str:
    return " ".join(pattern[w] for w in treeshift.tree_nodes(d, height))


# -- tsft ---------------------------------------------------------------------


def cmd_tsft_entropy(args):
    X = treeshift.load_treeshift(args.file)
    rep = snre.entropy_tsft(X, cap=args.cap)
    lines = [
        f"entropy = {rep.entropy:.12g}  (= ln {rep.rho:.12g})",
        f"argmax selection = {[list(c) for c in rep.argmax_selection] if rep.argmax_selection else None}",
        f"matrix (essential rows/cols) = {rep.matrix}",
        f"essential symbols = {rep.essential}",
        f"pruned symbols = {rep.pruned_symbols}",
    ]
    _emit(lines, rep.record())


def cmd_tsft_blocks(args):
    if args.n < 1:
        raise ParseError(f"-n must be >= 1, got {args.n}")
    X = treeshift.load_treeshift(args.file)
    record = {"n": args.n, "alphabet": list(X.alphabet), "mode": args.mode}
    if args.mode == "exact":
        series = treeshift.count_blocks(X, args.n, digit_budget=args.cap)
        level = series.exact[-1]
        record["counts"] = {s: str(v) for s, v in zip(X.alphabet, level)}
        record["total"] = str(sum(level))
        lines = [f"gamma[{s}] = {v}" for s, v in zip(X.alphabet, level)] + [f"|B_{args.n}| = {sum(level)}"]
    elif args.mode == "log":
        series = treeshift.log_block_counts(X, args.n)
        level = series.log[-1]
        record["log_counts"] = dict(zip(X.alphabet, level))
        record["log_total"] = series.log_total(args.n)
        lines = [f"ln gamma[{s}] = {v:.12g}" for s, v in zip(X.alphabet, level)]
        lines.append(f"ln |B_{args.n}| = {record['log_total']:.12g}")
        if args.n >= 2:
            record["entropy_estimate"] = treeshift.entropy_estimate(X, args.n)
            lines.append(f"ln ln |B_n| / n = {record['entropy_estimate']:.12g}")
    else:
        patterns = treeshift.enumerate_blocks(X, args.n, cap=args.cap)
        record["total"] = len(patterns)
        record["patterns"] = [_pattern_string(p, X.degree, args.n - 1) for p in patterns]
        lines = record["patterns"] + [f"|B_{args.n}| = {len(patterns)}"]
    _emit(lines, record)


def cmd_tsft_spectrum(args):
    values = snre.entropy_spectrum(args.d, args.k, cap=args.cap)
    lines = [f"ln {v.rho:.12g} = {v.entropy:.12g}   witness {[list(r) for r in v.witness]}" for v in values]
    record = {
        "d": args.d,
        "k": args.k,
        "values": [{"rho": v.rho, "entropy": v.entropy, "witness": [list(r) for r in v.witness]} for v in values],
    }
    _emit(lines, record)


# -- ctnn ---------------------------------------------------------------------


def _load_template(path) -> ctnn.Template:
    return ctnn.template_from_dict(ctnn.load_json(path))


def cmd_ctnn_patterns(args):
    T = _load_template(args.template)
    B = ctnn.admissible_patterns(T)
    blocks = B.two_blocks()
    lines = [f"region code {B.code}"] + [str(b) for b in blocks]
    record = {"code": [B.code.p, B.code.q], "blocks": [str(b) for b in blocks], **ctnn.basic_set_to_dict(B)}
    _emit(lines, record)


def cmd_ctnn_entropy(args):
    T = _load_template(args.template)
    res = ctnn.ctnn_entropy(T)
    lines = [f"region code {res.code}", f"entropy = {res.entropy:.12g}"]
    record = {"code": [res.code.p, res.code.q], "entropy": res.entropy, "report": res.report.record()}
    _emit(lines, record)


def cmd_ctnn_critical(args):
    T = _load_template(args.template)
    cc = T.couplings()
    a_crit = ctnn.critical_a(cc, T.z)
    tol = args.tol if args.tol is not None else 1e-9
    record = {
        "a": T.a,
        "z": T.z,
        "critical_a": a_crit,
        "critical": ctnn.is_critical(T, tol),
        "tol": tol,
        "degenerate": cc.degenerate,
        "seed": args.seed,
    }
    lines = [f"critical a at z={T.z:.12g}: {a_crit:.12g}", f"critical (tol {tol:g}): {record['critical']}"]
    if args.verify:
        ok = ctnn.verify_critical_by_definition(cc, (T.a, T.z), args.radius, args.samples, args.seed)
        record.update(verified=ok, radius=args.radius, samples=args.samples)
        lines.append(f"both entropies within r={args.radius:g} (seed {args.seed}): {ok}")
    _emit(lines, record)


def cmd_ctnn_realize(args):
    B = ctnn.basic_set_from_dict(ctnn.load_json(args.basic))
    check = separation.check_realizable(B)
    real = separation.realize(B)
    record = {
        "realizable": real is not None,
        "condition": check.condition or "none",
        "template": ctnn.template_to_dict(real.template) if real else None,
        "exact": real.record() if real else None,
        "margin": str(real.margin) if real else None,
    }
    if real:
        T = real.template
        lines = [f"realizable: a={T.a:.12g} alpha={list(T.alpha)} z={T.z:.12g} margin={real.margin}"]
    else:
        lines = ["not realizable"]
    lines.append(f"separation condition: {record['condition']}")
    _emit(lines, record)


def cmd_ctnn_sweep(args):
    cfg = bifurcation.load_run_config(args.config)
    cc = ctnn.ChildCouplings.from_alpha(cfg.alpha)
    grid = bifurcation.sweep(cc, cfg.a_range, cfg.z_range, cfg.resolution, cfg.tol, workers=args.workers)
    fmt = args.format if args.format != "text" else "csv"
    if args.output is None:
        raise ParseError("sweep needs -o PATH")
    path = bifurcation.emit_diagram(grid, fmt, args.output)
    interior = [p for p in grid.points if not p.boundary]
    record = {
        "output": str(path),
        "format": fmt,
        "points": len(grid.points),
        "boundary_points": len(grid.points) - len(interior),
        "ln_d_points": sum(1 for p in interior if p.entropy > 0.5 * math.log(cc.d)),
        "critical_points": sum(p.critical for p in grid.points),
    }
    _emit([f"wrote {path} ({record['points']} points, {record['boundary_points']} on boundaries)"], record)


def cmd_ctnn_verify_mosaic(args):
    T = _load_template(args.template)
    tree = ctnn.load_json(args.tree)
    check = ctnn.verify_mosaic(T, tree)
    record = {
        "mosaic": check.ok,
        "states": {"".join(str(i + 1) for i in w) or "root": x for w, x in check.states.items()},
        "failures": ["".join(str(i + 1) for i in w) or "root" for w in check.failures],
    }
    _emit([f"mosaic: {check.ok}"] + [f"fails at node {f}" for f in record["failures"]], record)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cayley-entropy", description=__doc__.splitlines()[0])
    top = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    tsft = top.add_parser("tsft", help="Markov tree-shift commands").add_subparsers(dest="command", required=True)
    p = tsft.add_parser("entropy", help="entropy by the reduced-system algorithm")
    p.add_argument("file")
    p.add_argument("--cap", type=int)
    p.set_defaults(func=cmd_tsft_entropy)

    p = tsft.add_parser("blocks", help="block counts")
    p.add_argument("file")
    p.add_argument("-n", type=int, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
    mode.add_argument("--log", dest="mode", action="store_const", const="log")
    mode.add_argument("--enumerate", dest="mode", action="store_const", const="enumerate")
    p.add_argument("--cap", type=int)
    p.set_defaults(func=cmd_tsft_blocks, mode="exact")

    p = tsft.add_parser("spectrum", help="all entropies for d children and k symbols")
    p.add_argument("d", type=int)
    p.add_argument("k", type=int)
    p.add_argument("--cap", type=int)
    p.set_defaults(func=cmd_tsft_spectrum)

    group = top.add_parser("ctnn", help="neural networks on Cayley trees").add_subparsers(dest="command", required=True)
    p = group.add_parser("patterns", help="admissible two-blocks of a template")
    p.add_argument("template")
    p.set_defaults(func=cmd_ctnn_patterns)

    p = group.add_parser("entropy", help="entropy and region code of a template")
    p.add_argument("template")
    p.set_defaults(func=cmd_ctnn_entropy)

    p = group.add_parser("critical", help="critical self-feedback for the template's z")
    p.add_argument("template")
    p.add_argument("--tol", type=float)
    p.add_argument("--verify", action="store_true", help="also sample a ball around (a, z)")
    p.add_argument("--radius", type=float, default=0.05)
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_ctnn_critical)

    p = group.add_parser("realize", help="learn a template for a basic set")
    p.add_argument("basic")
    p.set_defaults(func=cmd_ctnn_realize)

    p = group.add_parser("sweep", help="entropy bifurcation diagram from a run config")
    p.add_argument("config")
    p.add_argument("-o", "--output")
    p.add_argument("--format", choices=("csv", "svg", "text"), default="csv")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_ctnn_sweep)

    p = group.add_parser("verify-mosaic", help="check a finite output pattern against a template")
    p.add_argument("template")
    p.add_argument("tree")
    p.set_defaults(func=cmd_ctnn_verify_mosaic)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except BoundaryParameter as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUNDARY
    except InternalInconsistency as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
