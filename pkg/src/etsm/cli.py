"""Command-line entry point: ``etsm <subcommand> ...``."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .core import EtsmConfig, iterate, transform_step
from .dataset import (DEFAULT_XR_BASE, MetricKind, ParameterSpec, benchmark_groups, gen_random,
                      gen_scatter, load_param_config, read_csv_text)
from .errors import ConfigurationError, EtsmError
from .hierarchy import build_hierarchy, cophenetic_depth, tree_from_json
from .render import RenderOptions, emit_curves, export_tree, render_svg
from .similarity import SimilarityMatrix, dataset_matrix, read_matrix_text


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write_output(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigurationError(f"expected comma-separated numbers, got {text!r}") from None


def _load_source(args):
    """Matrix CSV (starts with a kind tag) or dataset CSV."""
    text = _read_input(args.input)
    if text.lstrip().startswith("#"):
        return read_matrix_text(text)
    if args.metric_config:
        specs = load_param_config(args.metric_config)
    else:
        header = text.splitlines()[0].split(",") if text.strip() else []
        metric = MetricKind.parse(args.metric)
        specs = [ParameterSpec(h.strip(), metric, args.base) for h in header[1:]]
    return read_csv_text(text, specs or None)


def _config(args) -> EtsmConfig:
    return EtsmConfig(mean_mode=args.mean_mode, contrast_C=args.contrast,
                      converge_eps=args.eps, t_max=args.t_max)


def _as_matrix(source) -> SimilarityMatrix:
    return source if isinstance(source, SimilarityMatrix) else dataset_matrix(source)


def cmd_cluster(args):
    config = _config(args)
    source = _load_source(args)
    tree = build_hierarchy(source, config, threads=args.threads)
    fmt = args.format.upper()
    if fmt == "SVG":
        text = render_svg(tree, mode="DENDROGRAM")
    else:
        text = export_tree(tree, fmt)
    _write_output(text if text.endswith("\n") else text + "\n", args.output)


def cmd_step(args):
    matrix = _as_matrix(_load_source(args))
    _write_output(transform_step(matrix, args.mean_mode).to_csv(), args.output)


def _resolve_pair(text, labels):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigurationError(f"pair must look like 'a,b', got {text!r}")
    out = []
    for p in parts:
        if p in labels:
            out.append(labels.index(p))
        elif p.isdigit() and int(p) < len(labels):
            out.append(int(p))
        else:
            raise ConfigurationError(f"unknown object {p!r} in pair {text!r}")
    return tuple(out)


def cmd_trace(args):
    matrix = _as_matrix(_load_source(args))
    labels = list(matrix.labels)
    if args.pair:
        pairs = [_resolve_pair(p, labels) for p in args.pair]
    else:
        pairs = [(0, j) for j in range(1, matrix.n)]
    if not pairs:
        raise ConfigurationError("trace needs at least two objects")
    outcome = iterate(matrix, _config(args), tracked_pairs=pairs)
    _write_output(emit_curves("TRACE", outcome), args.output)


def cmd_contrast_curve(args):
    payload = {"s_values": _floats(args.s_values), "C_values": _floats(args.c_values)}
    _write_output(emit_curves("CONTRAST_CURVE", payload), args.output)


def cmd_gen_random(args):
    ds = gen_random(args.objects, args.params, args.lo, args.hi, args.seed, args.base,
                    args.integer)
    _write_output(ds.to_csv(), args.output)


def cmd_gen_scatter(args):
    counts = [int(c) for c in _floats(args.counts)]
    groups = benchmark_groups(counts, args.separation, args.spread)
    ds = gen_scatter(groups, args.seed)
    _write_output(ds.to_csv(), args.output)


def cmd_render(args):
    tree = tree_from_json(_read_input(args.input))
    opts = RenderOptions(width=args.width, height=args.height, shading=args.shading,
                         min_branch_display=args.min_branch)
    mode = args.mode.upper()
    table = cophenetic_depth(tree) if mode == "HEATMAP" else None
    _write_output(render_svg(tree, table, mode, opts), args.output)


def _add_engine_flags(p):
    p.add_argument("--mean-mode", default="GM", help="AM or GM (default GM)")
    p.add_argument("--contrast", type=float, default=80.0, help="contrast C in [0, 200]")
    p.add_argument("--eps", type=float, default=1e-12, help="convergence tolerance")
    p.add_argument("--t-max", type=int, default=10_000, help="iteration cap per split")


def _add_input_flags(p):
    p.add_argument("input", help="dataset CSV or matrix CSV; '-' reads stdin")
    p.add_argument("--metric-config", help="INI file assigning metric/base/weight per column")
    p.add_argument("--metric", default="XR",
                   help="metric for every column when no --metric-config is given")
    p.add_argument("--base", type=float, default=DEFAULT_XR_BASE, help="XR base")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="etsm",
                                     description="Hierarchies by iterative averaging of similarity matrices.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="build a hierarchy from a dataset or matrix")
    _add_input_flags(p)
    _add_engine_flags(p)
    p.add_argument("--format", default="json", choices=["json", "newick", "dot", "svg"],
                   type=str.lower)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("step", help="apply one transformation to a matrix")
    _add_input_flags(p)
    p.add_argument("--mean-mode", default="GM")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_step)

    p = sub.add_parser("trace", help="iterate and record selected entries per step")
    _add_input_flags(p)
    _add_engine_flags(p)
    p.add_argument("--pair", action="append", help="object pair 'a,b' (ids or indices); repeatable")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("contrast-curve", help="tabulate the contrast function")
    p.add_argument("--s-values", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    p.add_argument("--c-values", default=",".join(str(c) for c in range(0, 201, 10)))
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_contrast_curve)

    p = sub.add_parser("gen-random", help="uniform random dataset")
    p.add_argument("--objects", type=int, default=500)
    p.add_argument("--params", type=int, default=500)
    p.add_argument("--lo", type=float, default=1.0)
    p.add_argument("--hi", type=float, default=500.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--base", type=float, default=DEFAULT_XR_BASE)
    p.add_argument("--integer", action="store_true", help="round values to integers")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_gen_random)

    p = sub.add_parser("gen-scatter", help="planted 3-D point groups")
    p.add_argument("--counts", default="16,8,8,4")
    p.add_argument("--separation", type=float, default=5.0)
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_gen_scatter)

    p = sub.add_parser("render", help="render tree JSON as SVG")
    p.add_argument("input", help="tree JSON; '-' reads stdin")
    p.add_argument("--mode", default="dendrogram", choices=["dendrogram", "radial", "heatmap"],
                   type=str.lower)
    p.add_argument("--width", type=int, default=800)
    p.add_argument("--height", type=int, default=600)
    p.add_argument("--shading", default="linear", choices=["linear", "log"])
    p.add_argument("--min-branch", type=float, default=0.25)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_render)
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except (EtsmError, OSError) as exc:
        print(f"etsm: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
