"""Command-line entry point: ``idealknot <command> ...``.

Exit codes
----------
0  success
2  usage error
3  unreadable or malformed input file
4  infeasible geometry (self-intersecting or degenerate configuration)
5  tightening stalled before reaching its residual target
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import analysis, geometry as geo, io
from .batch import BatchConfig, ManifestError, batch_run
from .invariants import component_acns, component_writhes
from .tightener import (PreprocessConfig, TighteningConfig, preprocess,
                        tighten)
from .topology import (DiagramError, NonGenericProjection, determinant,
                       project_generic)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_GEOMETRY = 4
EXIT_STALL = 5

log = logging.getLogger("idealknot")


class _Output:
    """Collects key/value or tabular output and renders it in one format."""

    def __init__(self, fmt, path, stream=None):
        self.fmt = fmt
        self.path = path
        self.stream = stream or sys.stdout

    def _sink(self):
        if self.path is None or self.path == "-":
            return self.stream, False
        return open(self.path, "w", newline=""), True

    def emit_rows(self, header, rows):
        fh, close = self._sink()
        try:
            if self.fmt == "delimited":
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                for r in rows:
                    w.writerow([_cell(x) for x in r])
            else:
                cells = [[str(h) for h in header]] + \
                    [[_cell(x, short=True) for x in r] for r in rows]
                width = [max(len(c[i]) for c in cells) for i in range(len(header))]
                for c in cells:
                    fh.write("  ".join(s.rjust(w) for s, w in zip(c, width)).rstrip()
                             + "\n")
        finally:
            if close:
                fh.close()

    def emit_pairs(self, pairs):
        self.emit_rows(["quantity", "value"], pairs)


def _cell(x, short=False):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".10g" if short else ".17g")
    return str(x)


def _load(path):
    return io.read_knot_file(path)


def _write_knot(kf, path, fmt_name):
    if path is None or path == "-":
        sys.stdout.write(io.write_coordinates(kf, fmt_name))
    else:
        io.write_knot_file(path, kf, fmt_name)


# ---------------------------------------------------------------------------
# commands


def cmd_measure(args, out):
    kf = _load(args.file)
    knot = kf.to_knot()
    tb = geo.thickness(knot)
    if tb.self_intersecting:
        raise geo.GeometryError("configuration self-intersects")
    wr = component_writhes(knot)
    acn = component_acns(knot)
    pairs = [("label", kf.label or Path(args.file).stem),
             ("components", knot.n_components),
             ("vertices", knot.n),
             ("length", geo.length(knot)),
             ("min_radius", tb.min_rad),
             ("dcsd_half", tb.dcsd_half),
             ("thickness", tb.thickness),
             ("governed_by", tb.governed_by),
             ("ropelength", geo.length(knot) / tb.thickness)]
    if knot.n_components == 1:
        pairs += [("writhe", wr[0]), ("acn", acn[0])]
    else:
        for k, (w, a) in enumerate(zip(wr, acn)):
            pairs += [(f"writhe[{k}]", w), (f"acn[{k}]", a)]
    out.emit_pairs(pairs)
    return EXIT_OK


def _tightening_config(args):
    kw = {}
    for f in fields(TighteningConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            kw[f.name] = v
    kw["random_seed"] = args.seed
    return TighteningConfig(**kw)


def cmd_tighten(args, out):
    knot = _load(args.file).to_knot()
    if args.resample:
        from .tightener import equilateralize
        knot = equilateralize(knot, args.resample)
    cfg = _tightening_config(args)
    result, rep = tighten(knot, cfg, checkpoint=args.checkpoint,
                          checkpoint_every=args.checkpoint_every,
                          resume=args.resume)
    kf = io.KnotFile.from_knot(result)
    _write_knot(kf, args.output, args.knot_format)
    pairs = [("initial_ropelength", rep.initial_ropelength),
             ("final_ropelength", rep.final_ropelength),
             ("final_residual", rep.final_residual)]
    for k, p in enumerate(rep.phases, 1):
        pairs += [(f"phase{k}_steps", p.steps_taken),
                  (f"phase{k}_termination", p.termination_reason)]
    pairs.append(("elapsed_s", rep.elapsed))
    _Output(args.format, args.report, sys.stderr).emit_pairs(pairs)
    return EXIT_STALL if rep.stalled else EXIT_OK


def cmd_preprocess(args, out):
    kf = _load(args.file)
    cfg = PreprocessConfig(args.steps, args.coulomb, args.tangential, args.damping)
    result = preprocess(kf.to_knot(), cfg)
    _write_knot(io.KnotFile.from_knot(result), args.output, args.knot_format)
    return EXIT_OK


def cmd_diagram(args, out):
    knot = _load(args.file).to_knot()
    if knot.n_components != 1:
        raise ValueError("diagram needs a single-component knot")
    d = project_generic(knot, args.direction, seed=args.seed)
    res = determinant(d)
    out.emit_pairs([("direction", " ".join(format(x, ".17g")
                                           for x in res.projection_direction)),
                    ("crossings", res.crossing_count),
                    ("diagram_writhe", d.writhe),
                    ("gauss_code", d.gauss_code() or "-"),
                    ("determinant", res.determinant)])
    return EXIT_OK


def cmd_analyze(args, out):
    records = io.read_records(args.table)
    ok = [r for r in records if r.status == "ok"]
    summary = analysis.summarize(ok, sweep_classes=not args.no_sweep)
    rows = []
    for g in summary["groups"]:
        rows.append(["group", f"{g['crossings']}{g['class']}", "count",
                     g.get("count")])
        for key in ("mean", "sd", "skewness", "kurtosis"):
            if key in g:
                rows.append(["group", f"{g['crossings']}{g['class']}", key, g[key]])
    for name, fit in summary["fits"].items():
        for key, val in fit.as_dict().items():
            rows.append(["fit", name, key, val])
    for cls, corr in summary["correlations"].items():
        for key, val in corr.items():
            if val is not None:
                rows.append(["correlation", cls, key, val])
    for cls, r in summary["residual_writhe"].items():
        for key, val in r.items():
            rows.append(["residual_writhe", cls, key, val])
    rows.append(["reference", "-", "uniform_null_sd", summary["uniform_null_sd"]])
    for cls, sw in summary.get("sweeps", {}).items():
        rows += [["sweep", cls, "A", sw.A], ["sweep", cls, "B", sw.B],
                 ["sweep", cls, "variance", sw.variance]]
    out.emit_rows(["section", "subset", "quantity", "value"], rows)
    return EXIT_OK


def cmd_sweep(args, out):
    records = io.read_records(args.table)
    sub = [r for r in records if r.status == "ok" and r.writhe is not None]
    if args.subset == "alternating":
        sub = [r for r in sub if r.alternating is True]
    elif args.subset == "nonalternating":
        sub = [r for r in sub if r.alternating is False]
    w = np.array([r.writhe for r in sub], dtype=float)
    if not args.signed:
        w = np.abs(w)
    res = analysis.quantization_sweep(w, A_range=tuple(args.a_range),
                                      B_range=tuple(args.b_range),
                                      resolution=(args.a_step, args.b_step))
    out.emit_pairs([("count", len(w)), ("A", res.A), ("B", res.B),
                    ("variance", res.variance)])
    return EXIT_OK


def cmd_generate(args, out):
    if args.kind == "fourier":
        spec = io.STANDARD_KNOTS.get(args.spec)
        if spec is None:
            spec = io.FourierKnotSpec.from_text(Path(args.spec).read_text())
        knot = io.sample_fourier(spec, args.vertices)
        kf = io.KnotFile.from_knot(knot)
        kf.label = kf.label or args.spec
    else:
        kf = io.make_hopf_chain(args.links, args.vertices_per_link, args.slack)
    _write_knot(kf, args.output, args.knot_format)
    return EXIT_OK


def cmd_batch(args, out):
    pre = PreprocessConfig(args.preprocess_steps) if args.preprocess_steps else None
    cfg = BatchConfig(tightening=_tightening_config(args), preprocess=pre,
                      resample=args.resample, seed=args.seed,
                      workers=args.workers)
    rows = batch_run(args.manifest, cfg, output=args.output)
    if args.output is None:
        io.write_records(sys.stdout, rows)
    failed = sum(r.status != "ok" for r in rows)
    log.info("batch finished: %d rows, %d failed", len(rows), failed)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_tightening_flags(p):
    g = p.add_argument_group("tightening")
    for f in fields(TighteningConfig):
        if f.name in ("random_seed", "debug"):
            continue
        flag = "--" + f.name.replace("_", "-")
        if f.type in ("int", int):
            g.add_argument(flag, type=int, default=None)
        elif f.type in ("float", float):
            g.add_argument(flag, type=float, default=None)
        else:
            g.add_argument(flag, default=None)
    g.add_argument("--debug", action="store_true", default=None,
                   help="check the projection against every active row")
    g.add_argument("--resample", type=int, default=None,
                   help="equilateralize to this many vertices first")


def _global_flags(p, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("-o", "--output", default=d(None),
                   help="output path (default stdout)")
    p.add_argument("--format", choices=("table", "delimited"), default=d("table"))
    p.add_argument("-v", "--verbose", action="count", default=d(0))
    p.add_argument("-q", "--quiet", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="idealknot",
                                description="Ropelength, writhe and tightening "
                                            "of polygonal knots.")
    _global_flags(p, suppress=False)
    # the same flags are accepted after the subcommand name
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    s = sub.add_parser("measure", help="ropelength, writhe and ACN of a file")
    s.add_argument("file")
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("tighten", help="tighten one knot")
    s.add_argument("file")
    s.add_argument("--report", default=None,
                   help="write the run report here (default stderr)")
    s.add_argument("--knot-format", choices=("plain", "vect"), default="plain")
    s.add_argument("--checkpoint", default=None)
    s.add_argument("--checkpoint-every", type=int, default=0)
    s.add_argument("--resume", action="store_true")
    _add_tightening_flags(s)
    s.set_defaults(func=cmd_tighten)

    s = sub.add_parser("preprocess", help="Coulomb/tangential pre-tightening")
    s.add_argument("file")
    d = PreprocessConfig()
    s.add_argument("--steps", type=int, default=d.coulomb_steps)
    s.add_argument("--coulomb", type=float, default=d.coulomb_strength)
    s.add_argument("--tangential", type=float, default=d.tangential_strength)
    s.add_argument("--damping", type=float, default=d.damping)
    s.add_argument("--knot-format", choices=("plain", "vect"), default="plain")
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("diagram", help="Gauss code and determinant")
    s.add_argument("file")
    s.add_argument("--direction", type=float, nargs=3, default=None)
    s.set_defaults(func=cmd_diagram)

    s = sub.add_parser("analyze", help="statistics over a record table")
    s.add_argument("table")
    s.add_argument("--no-sweep", action="store_true")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="writhe quantization sweep")
    s.add_argument("table")
    s.add_argument("--subset", choices=("all", "alternating", "nonalternating"),
                   default="all")
    s.add_argument("--signed", action="store_true",
                   help="use signed writhe instead of its absolute value")
    s.add_argument("--a-range", type=float, nargs=2, default=(0.3, 2.0))
    s.add_argument("--b-range", type=float, nargs=2, default=(0.0, 1.0))
    s.add_argument("--a-step", type=float, default=1e-3)
    s.add_argument("--b-step", type=float, default=1e-2)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("generate", help="write a generated configuration")
    gen = s.add_subparsers(dest="kind", required=True)
    g = gen.add_parser("fourier", parents=[common])
    g.add_argument("spec", help="3_1, 4_1 or a coefficient file")
    g.add_argument("-n", "--vertices", type=int, default=96)
    g.add_argument("--knot-format", choices=("plain", "vect"), default="plain")
    g = gen.add_parser("hopf-chain", parents=[common])
    g.add_argument("--links", type=int, default=6)
    g.add_argument("--vertices-per-link", type=int, default=20)
    g.add_argument("--slack", type=float, default=1.25)
    g.add_argument("--knot-format", choices=("plain", "vect"), default="plain")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("batch", help="tighten every knot in a manifest")
    s.add_argument("manifest")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--preprocess-steps", type=int, default=0)
    _add_tightening_flags(s)
    s.set_defaults(func=cmd_batch)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.ERROR if args.quiet else (
        logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    out = _Output(args.format, args.output)
    try:
        return args.func(args, out)
    except (io.KnotFormatError, ManifestError, DiagramError) as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    except (geo.GeometryError, NonGenericProjection) as exc:
        log.error("infeasible geometry: %s", exc)
        return EXIT_GEOMETRY
    except (ValueError, analysis.AnalysisError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
