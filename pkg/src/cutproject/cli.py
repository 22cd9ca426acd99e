"""Command-line front end: run experiments, emit CSV data and JSON reports.

Subcommands
  generate     patch of an accepted point set (CSV / JSON export)
  bijection    fiber bijection verification report for a patch
  discrepancy  counting-error curve and bound verdict for a rotation
  brs-check    interval certificates plus a discrepancy bound verdict
  penrose      five-fold pipeline: decomposition, per-piece checks, cubes

Exit status: 0 when every asserted invariant held, 1 when a check failed
or could not be certified (a report says which), 2 on malformed input.

Determinism: with a fixed seed and config, output bytes are identical
across runs and thread counts.  CSV files are data-only; each JSON report
carries schema_version, the precision mode, and in float mode the
smallest facet margin encountered.  The CUTPROJECT_PRECISION environment
variable supplies the default precision ("exact" or "float:BITS").
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import io as fio
from .bijection import bijection_pairs, build_setup, verify_patch
from .errors import (
    BoundaryAmbiguousError,
    CutProjectError,
    PrecisionExhaustedError,
)
from .io import FormatError
from .penrose import (
    build_penrose,
    cube_count_residual,
    decompose_window,
    piece_patch,
    plane_coords,
    random_polyomino,
    sine_scale,
    true_plane_point,
    vertex_patch,
)
from .rotation import (
    bound_sweep,
    discrepancy_curve,
    interval_certificate,
    offset_grid,
    rotation_instance,
    suspension,
    suspension_box,
)
from .scalars import golden_ratio, parse_scalar, sqrt_int
from .scheme import EXACT, GammaBox, PhysicalBall, generate_patch
from .zonotope import validate_decomposition

ENV_PRECISION = "CUTPROJECT_PRECISION"
DEFAULT_SEED = 20260822

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BAD_INPUT = 2


class _Violation(Exception):
    """An invariant check failed; the run exits 1 with this message."""


# -- argument plumbing ----------------------------------------------------


def _parse_scalars(text):
    try:
        return tuple(parse_scalar(p.strip()) for p in text.split(",") if p.strip())
    except (ValueError, CutProjectError) as exc:
        raise FormatError("bad scalar list %r: %s" % (text, exc))


def _parse_ranges(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise FormatError("bad range %r (use lo:hi)" % part)
        lo, hi = part.split(":", 1)
        try:
            out.append((int(lo), int(hi)))
        except ValueError:
            raise FormatError("bad range %r (use integer lo:hi)" % part)
    if not out:
        raise FormatError("empty range list %r" % text)
    return out


def _parse_ints(text):
    try:
        return [int(p) for p in text.replace(",", " ").split()]
    except ValueError:
        raise FormatError("bad integer list %r" % text)


def _builtin_instance(name, offset=None, precision=None):
    if name == "golden":
        phi = golden_ratio()
        return rotation_instance((phi - 1,), [((0,), -1)],
                                 offset=offset, precision=precision)
    if name == "root2":
        r = sqrt_int(2)
        return rotation_instance((r - 1, 3 - 2 * r),
                                 [((1, 0), 1), ((0, 1), 1)],
                                 offset=offset, precision=precision)
    raise FormatError("unknown instance %r (use golden or root2)" % name)


def _load_instance(args, *, force_exact=False):
    offset = _parse_scalars(args.offset) if getattr(args, "offset", None) else None
    bits = None
    if not force_exact:
        mode = fio.parse_precision(args.precision)
        if mode is not EXACT:
            bits = mode.bits
    if getattr(args, "instance", None):
        spec = fio.parse_instance_file(args.instance)
        if offset is None:
            offset = spec["offset"]
        inst = rotation_instance(spec["alpha"], spec["lifts"],
                                 offset=offset, precision=bits)
        return inst, spec.get("horizon")
    if getattr(args, "builtin", None):
        return _builtin_instance(args.builtin, offset=offset, precision=bits), None
    raise FormatError("need --builtin or --instance")


def _mode_of(args):
    return fio.parse_precision(args.precision)


def _emit(line):
    sys.stdout.write(line + "\n")


# -- subcommands ----------------------------------------------------------


def _cmd_generate(args):
    mode = _mode_of(args)
    if args.builtin == "penrose" or (args.builtin is None and args.scheme is None):
        if args.builtin != "penrose":
            raise FormatError("need --builtin or --scheme")
        offset = _parse_scalars(args.offset) if args.offset else None
        p = build_penrose(offset)
        scheme = p.scheme
        if args.box:
            patch = generate_patch(scheme, GammaBox(_parse_ranges(args.box)),
                                   mode=mode)
        elif args.radius is not None:
            if mode is EXACT:
                patch = vertex_patch(decompose_window(p), parse_scalar(args.radius))
            else:
                patch = generate_patch(scheme, PhysicalBall(parse_scalar(args.radius)),
                                       mode=mode)
        else:
            raise FormatError("need --box or --radius")
        if args.plane_csv:
            scale = sine_scale()
            rows = [true_plane_point(pt.gamma, scale) + (pt.piece,)
                    for pt in patch.points]
            fio.write_plane_csv(args.plane_csv, rows)
    elif args.builtin in ("golden", "root2"):
        if args.box or args.radius:
            raise FormatError("rotation suspensions take --times, not "
                              "--box or --radius")
        inst, _ = _load_instance(args, force_exact=True)
        scheme, _setup = suspension(inst)
        lo, hi = args.times
        patch = generate_patch(scheme, suspension_box(inst, lo, hi), mode=mode)
        if args.plane_csv:
            raise FormatError("--plane-csv applies to the penrose scheme only")
    else:
        scheme, _extras = fio.parse_scheme_file(args.scheme)
        if args.box:
            region = GammaBox(_parse_ranges(args.box))
        elif args.radius is not None:
            region = PhysicalBall(parse_scalar(args.radius))
        else:
            raise FormatError("need --box or --radius")
        patch = generate_patch(scheme, region, mode=mode)
        if args.plane_csv:
            raise FormatError("--plane-csv applies to the penrose scheme only")
    if args.csv:
        fio.write_patch_csv(args.csv, patch)
    if args.json:
        fio.write_json(args.json, fio.patch_payload(patch, mode))
    _emit("generate: %d points" % len(patch.points))
    return EXIT_OK


def _cmd_bijection(args):
    mode = _mode_of(args)
    if args.builtin in ("golden", "root2"):
        inst, _ = _load_instance(args, force_exact=True)
        scheme, setup = suspension(inst)
        lo, hi = args.times
        patch = generate_patch(scheme, suspension_box(inst, lo, hi), mode=mode)
    elif args.builtin == "penrose":
        offset = _parse_scalars(args.offset) if args.offset else None
        decomp = decompose_window(build_penrose(offset))
        if not 0 <= args.piece < len(decomp.pieces):
            raise FormatError("piece index out of range 0..9")
        pc = decomp.pieces[args.piece]
        setup = pc.setup
        radius = parse_scalar(args.radius) if args.radius is not None else 12
        patch = piece_patch(pc, radius)
    elif args.scheme:
        scheme, extras = fio.parse_scheme_file(args.scheme)
        if "transversal" not in extras:
            raise FormatError("scheme file needs a [bijection] transversal")
        setup = build_setup(scheme, extras["transversal"],
                            fiber_sublattice=extras.get("sublattice"),
                            complement_basis=extras.get("complement"))
        if args.box:
            region = GammaBox(_parse_ranges(args.box))
        elif args.radius is not None:
            region = PhysicalBall(parse_scalar(args.radius))
        else:
            raise FormatError("need --box or --radius")
        patch = generate_patch(scheme, region, mode=mode)
    else:
        raise FormatError("need --builtin or --scheme")
    report = verify_patch(setup, patch)
    if args.report:
        fio.write_json(args.report, fio.verification_payload(report, mode))
    if args.pairs:
        fio.write_pairs_csv(args.pairs, bijection_pairs(setup, patch),
                            setup.scheme)
    _emit("bijection: %d points, %d fibers, ok=%s"
          % (report.n_points, report.n_fibers, report.ok))
    if not report.ok:
        raise _Violation("bijection checks failed: %s"
                         % "; ".join(report.failures[:4]))
    return EXIT_OK


def _offset_payload(res):
    return {
        "offset": [fio.scalar_text(x) for x in res.offset],
        "max_at": res.max_at,
        "max_abs": res.max_abs,
        "within": res.within,
        "certified": res.certified,
    }


def _cmd_discrepancy(args):
    inst, file_horizon = _load_instance(args)
    horizon = args.horizon or file_horizon or 100000
    mode = _mode_of(args)
    if args.csv:
        curve = discrepancy_curve(inst, horizon, convention=args.convention)
        fio.write_discrepancy_csv(args.csv, curve)
    offsets = offset_grid(inst, args.offsets) if args.offsets else [inst.offset]
    report = bound_sweep(inst, horizon, offsets=offsets,
                         convention=args.convention)
    payload = dict(fio.report_meta(mode), kind="discrepancy",
                   horizon=report.horizon,
                   all_within=report.all_within,
                   largest_bound=report.largest_bound,
                   worst_max_abs=report.worst.max_abs,
                   offsets=[_offset_payload(r) for r in report.results])
    if args.summary:
        fio.write_json(args.summary, payload)
    _emit("discrepancy: horizon %d, %d offsets, worst max |D| = %.6f, bound %.6f"
          % (horizon, len(report.results), report.worst.max_abs,
             report.largest_bound))
    if not report.all_within:
        raise _Violation("discrepancy exceeded its bound at offset %s"
                         % (report.worst.offset,))
    return EXIT_OK


def _cmd_brs_check(args):
    inst, file_horizon = _load_instance(args)
    horizon = args.horizon or file_horizon or 100000
    mode = _mode_of(args)
    step = inst.alpha[args.axis]
    certs = []
    for text in (args.lengths or "").split(","):
        text = text.strip()
        if not text:
            continue
        cert = interval_certificate(step, parse_scalar(text), depth=args.depth)
        entry = {"length": text, "depth": args.depth,
                 "certified": cert.certified, "multiple": cert.multiple}
        if not cert.certified:
            entry["expectation"] = ("no multiple of the step matches within "
                                    "the search depth; the counting error "
                                    "for this interval is expected to grow "
                                    "without bound")
        certs.append(entry)
    offsets = offset_grid(inst, args.offsets) if args.offsets else [inst.offset]
    report = bound_sweep(inst, horizon, offsets=offsets)
    payload = dict(fio.report_meta(mode), kind="brs-check",
                   horizon=report.horizon, axis=args.axis,
                   certificates=certs,
                   all_within=report.all_within,
                   largest_bound=report.largest_bound,
                   worst_max_abs=report.worst.max_abs,
                   offsets=[_offset_payload(r) for r in report.results])
    if args.summary:
        fio.write_json(args.summary, payload)
    certified = sum(1 for c in certs if c["certified"])
    _emit("brs-check: %d/%d lengths certified, sweep within bound: %s"
          % (certified, len(certs), report.all_within))
    if not report.all_within:
        raise _Violation("discrepancy exceeded its bound during the sweep")
    return EXIT_OK


def _piece_report(pc, radius):
    patch = piece_patch(pc, radius)
    rep = verify_patch(pc.setup, patch)
    return pc, patch, rep


def _cmd_penrose(args):
    mode = _mode_of(args)
    offset = _parse_scalars(args.offset) if args.offset else None
    p = build_penrose(offset)
    decomp = decompose_window(p)
    validation = validate_decomposition(p.decomposition, samples=args.samples,
                                        seed=args.seed)
    validation = dict(validation, volume=fio.scalar_text(validation["volume"]))
    radius = parse_scalar(args.radius)
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        rows = list(pool.map(lambda pc: _piece_report(pc, radius),
                             decomp.pieces))
    pieces_payload = []
    failures = []
    all_points = []
    for pc, patch, rep in rows:
        pieces_payload.append({
            "index": pc.index,
            "subset": list(pc.subset),
            "translate": list(pc.translate),
            "volume": fio.scalar_text(p.decomposition.pieces[pc.index].volume),
            "kappa_grid": fio.scalar_text(pc.kappa_grid),
            "points_per_fiber": pc.setup.points_per_fiber,
            "patch_points": rep.n_points,
            "verification_ok": rep.ok,
            "within_bound": rep.within_bound,
        })
        if not rep.ok:
            failures.append("piece %d failed verification" % pc.index)
        all_points.extend((pt.gamma, pc.index) for pt in patch.points)
    cube_reports = []
    if args.regions:
        sizes = _parse_ints(args.cells) if args.cells else None
        kappa = decomp.kappa_grid_total
        pts = [plane_coords(g) for g, _ in all_points]
        # cells past ~1.58 r in grid coordinates leave the patch
        covered = max(1, int(1.5 * float(radius)) - 2)
        bound_eff = min(args.bound, covered)
        for i in range(args.regions):
            size = sizes[i % len(sizes)] if sizes else 1 + 3 * i * i
            cells = random_polyomino(size, seed=args.seed + i, bound=bound_eff)
            rep = cube_count_residual(pts, cells, kappa)
            cube_reports.append({
                "cells": rep.cells, "points": rep.points,
                "expected": rep.expected, "residual": rep.residual,
                "boundary": rep.boundary, "ratio": rep.ratio,
            })
    payload = dict(fio.report_meta(mode), kind="penrose",
                   offset=[fio.scalar_text(x) for x in p.offset],
                   window_volume=fio.scalar_text(decomp.volume),
                   kappa_grid_total=fio.scalar_text(decomp.kappa_grid_total),
                   validation=validation,
                   pieces=pieces_payload,
                   cube_reports=cube_reports)
    if args.report:
        fio.write_json(args.report, payload)
    if args.plane_csv:
        scale = sine_scale()
        rows_csv = [true_plane_point(g, scale) + (piece,)
                    for g, piece in sorted(all_points)]
        fio.write_plane_csv(args.plane_csv, rows_csv)
    _emit("penrose: 10 pieces, %d points, verification %s"
          % (len(all_points), "ok" if not failures else "FAILED"))
    if failures:
        raise _Violation("; ".join(failures))
    return EXIT_OK


# -- parser ---------------------------------------------------------------


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="cutproject",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision",
                        default=os.environ.get(ENV_PRECISION, "exact"),
                        help="exact or float:BITS (default from "
                             "CUTPROJECT_PRECISION, else exact)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help="seed for randomized sampling (fixed seed gives "
                             "byte-identical outputs)")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads where applicable; results do "
                             "not depend on this")
    common.add_argument("--config", default=None,
                        help="structured text file supplying command and "
                             "options")
    sub = parser.add_subparsers(dest="command")

    g = sub.add_parser("generate", parents=[common],
                       help="generate a patch and export it",
                       description="Patch CSV columns: lattice coordinates "
                                   "g0..g{n-1}, physical split coordinates "
                                   "y*, internal split coordinates w*, piece "
                                   "index.  Plane CSV columns: x, y, piece.")
    g.add_argument("--builtin", choices=["golden", "root2", "penrose"])
    g.add_argument("--scheme", help="scheme description file")
    g.add_argument("--offset", help="comma list of exact scalars")
    g.add_argument("--box", help="lattice box lo:hi,lo:hi,...")
    g.add_argument("--radius", help="physical ball radius (exact scalar)")
    g.add_argument("--times", type=_times, default=(0, 60),
                   help="time range lo:hi for rotation suspensions")
    g.add_argument("--csv", help="patch CSV output path")
    g.add_argument("--json", help="patch JSON output path")
    g.add_argument("--plane-csv", help="float plane export (penrose)")
    g.set_defaults(func=_cmd_generate)

    b = sub.add_parser("bijection", parents=[common],
                       help="verify the fiber bijection on a patch",
                       description="Pairs CSV columns: physical coordinates "
                                   "y*, image coordinates f*, displacement.")
    b.add_argument("--builtin", choices=["golden", "root2", "penrose"])
    b.add_argument("--scheme", help="scheme description file with [bijection]")
    b.add_argument("--offset", help="comma list of exact scalars")
    b.add_argument("--piece", type=int, default=0,
                   help="window piece index for --builtin penrose")
    b.add_argument("--box", help="lattice box lo:hi,...")
    b.add_argument("--radius", help="ball radius (exact scalar)")
    b.add_argument("--times", type=_times, default=(0, 60))
    b.add_argument("--report", help="verification report JSON path")
    b.add_argument("--pairs", help="bijection pairs CSV path")
    b.set_defaults(func=_cmd_bijection)

    d = sub.add_parser("discrepancy", parents=[common],
                       help="counting-error curve against its exact bound",
                       description="Curve CSV columns: m (horizon), d "
                                   "(counting error).")
    d.add_argument("--builtin", choices=["golden", "root2"])
    d.add_argument("--instance", help="rotation description file")
    d.add_argument("--offset", help="comma list of exact scalars")
    d.add_argument("--horizon", type=int, default=None)
    d.add_argument("--offsets", type=int, default=0,
                   help="size of the deterministic offset family (0: just "
                        "the given offset)")
    d.add_argument("--convention", choices=["from_zero", "from_one"],
                   default="from_zero")
    d.add_argument("--csv", help="curve CSV output path")
    d.add_argument("--summary", help="summary JSON output path")
    d.set_defaults(func=_cmd_discrepancy)

    k = sub.add_parser("brs-check", parents=[common],
                       help="interval certificates plus a bound verdict")
    k.add_argument("--builtin", choices=["golden", "root2"])
    k.add_argument("--instance", help="rotation description file")
    k.add_argument("--offset", help="comma list of exact scalars")
    k.add_argument("--lengths", help="comma list of interval lengths "
                                     "(exact scalars)")
    k.add_argument("--axis", type=int, default=0,
                   help="rotation coordinate the certificates test")
    k.add_argument("--depth", type=int, default=50)
    k.add_argument("--horizon", type=int, default=None)
    k.add_argument("--offsets", type=int, default=4)
    k.add_argument("--summary", help="summary JSON output path")
    k.set_defaults(func=_cmd_brs_check)

    z = sub.add_parser("penrose", parents=[common],
                       help="five-fold pipeline with per-piece verification")
    z.add_argument("--offset", help="window translate, three exact scalars")
    z.add_argument("--radius", default="18",
                   help="per-piece patch radius (exact scalar)")
    z.add_argument("--samples", type=int, default=2000,
                   help="random points for the cover/disjointness check")
    z.add_argument("--regions", type=int, default=0,
                   help="number of random cube regions to count")
    z.add_argument("--cells", help="region sizes, comma separated")
    z.add_argument("--bound", type=int, default=150,
                   help="confinement for random regions")
    z.add_argument("--report", help="report JSON output path")
    z.add_argument("--plane-csv", help="float plane export path")
    z.set_defaults(func=_cmd_penrose)
    return parser


def _times(text):
    lo, _, hi = text.partition(":")
    try:
        return (int(lo), int(hi))
    except ValueError:
        raise argparse.ArgumentTypeError("expected lo:hi integers")


def _config_argv(path):
    """Turn a [run] section into an argv prefix; flags typed later win."""
    sections = fio.read_table(path)
    for name, pairs in sections:
        if name != "run":
            continue
        command = None
        argv = []
        for key, value in pairs:
            if key == "command":
                command = value
            else:
                argv.extend(["--" + key.replace("_", "-"), value])
        if command is None:
            raise FormatError("%s: [run] section needs a command" % path)
        return [command] + argv
    raise FormatError("%s: missing [run] section" % path)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if "--config" in argv:
            at = argv.index("--config")
            if at + 1 >= len(argv):
                raise FormatError("--config needs a path")
            path = argv[at + 1]
            rest = argv[:at] + argv[at + 2:]
            if rest and not rest[0].startswith("-"):
                raise FormatError("config file and explicit subcommand "
                                  "cannot be combined")
            argv = _config_argv(path) + rest
        parser = _build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_BAD_INPUT
        return args.func(args)
    except _Violation as exc:
        sys.stderr.write("check failed: %s\n" % exc)
        return EXIT_FAILED
    except (PrecisionExhaustedError, BoundaryAmbiguousError) as exc:
        sys.stderr.write("not certifiable at this precision: %s\n" % exc)
        return EXIT_FAILED
    except FormatError as exc:
        sys.stderr.write("input error: %s\n" % exc)
        return EXIT_BAD_INPUT
    except (CutProjectError, ValueError, OSError) as exc:
        sys.stderr.write("input error: %s\n" % exc)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
