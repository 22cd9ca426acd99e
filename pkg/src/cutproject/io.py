"""File formats: description files, CSV exports, JSON reports.

Description files are line-oriented structured text.  Section headers in
brackets, `key = value` lines below them, `#` starts a comment, repeated
keys accumulate in order.  Exact scalars use the same surd notation the
scalar formatter produces, so files round-trip.

CSV exports are data-only: one header row naming the columns, then rows.
Metadata (schema version, precision mode, facet margins) lives in the JSON
artifacts written alongside.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction

from .errors import CutProjectError
from .scalars import format_scalar, from_number, parse_scalar
from .scheme import EXACT, FloatMode, Scheme, Window, WindowPiece

SCHEMA_VERSION = 1


class FormatError(CutProjectError):
    """A description file or config file could not be parsed."""


# -- structured text ------------------------------------------------------


def read_table(path):
    """Sections of key/value pairs, repeated keys kept in order."""
    sections = []
    current = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                current = (line[1:-1].strip().lower(), [])
                sections.append(current)
                continue
            if "=" not in line:
                raise FormatError("%s:%d: expected key = value" % (path, lineno))
            if current is None:
                raise FormatError("%s:%d: key outside any section" % (path, lineno))
            key, value = line.split("=", 1)
            current[1].append((key.strip().lower(), value.strip()))
    return sections


def _scalar_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if part:
            out.append(parse_scalar(part))
    return tuple(out)


def _int_list(text):
    return tuple(int(p) for p in text.replace(",", " ").split())


def _collect(pairs, key):
    return [v for k, v in pairs if k == key]


def _single(pairs, key, default=None):
    vals = _collect(pairs, key)
    if not vals:
        return default
    if len(vals) > 1:
        raise FormatError("key %r given %d times, expected once" % (key, len(vals)))
    return vals[0]


# -- scheme description ---------------------------------------------------


def parse_scheme_file(path):
    """Scheme (with window attached when present) plus bijection rows.

    Returns (scheme, extras) where extras holds optional transversal,
    sublattice, and complement integer rows from a [bijection] section.
    """
    sections = read_table(path)
    names = [name for name, _ in sections]
    if "scheme" not in names:
        raise FormatError("%s: missing [scheme] section" % path)
    physical = internal = lattice = None
    dim = None
    pieces = []
    nonsingular = False
    extras = {}
    for name, pairs in sections:
        if name == "scheme":
            dim_text = _single(pairs, "dimension")
            if dim_text is not None:
                dim = int(dim_text)
            physical = [_scalar_list(v) for v in _collect(pairs, "physical")]
            internal = [_scalar_list(v) for v in _collect(pairs, "internal")]
            lat = [_scalar_list(v) for v in _collect(pairs, "lattice")]
            lattice = lat or None
        elif name == "window":
            flag = _single(pairs, "nonsingular", "false")
            nonsingular = flag.lower() in ("true", "yes", "1")
        elif name == "piece":
            offset = _single(pairs, "offset")
            if offset is None:
                raise FormatError("%s: [piece] needs an offset" % path)
            vectors = [_scalar_list(v) for v in _collect(pairs, "vector")]
            if not vectors:
                raise FormatError("%s: [piece] needs vectors" % path)
            pieces.append(WindowPiece(vectors, _scalar_list(offset)))
        elif name == "bijection":
            for key in ("transversal", "sublattice", "complement"):
                rows = [_int_list(v) for v in _collect(pairs, key)]
                if rows:
                    extras[key] = rows
    if not physical or not internal:
        raise FormatError("%s: scheme needs physical and internal rows" % path)
    if dim is not None and dim != len(physical[0]):
        raise FormatError("%s: dimension %d does not match rows" % (path, dim))
    window = Window(pieces, require_nonsingular=nonsingular) if pieces else None
    try:
        scheme = Scheme(physical, internal, lattice=lattice, window=window)
    except (ValueError, CutProjectError) as exc:
        raise FormatError("%s: %s" % (path, exc))
    return scheme, extras


def write_scheme_file(path, scheme, bijection=None):
    """bijection maps transversal/sublattice/complement to integer rows."""
    lines = ["[scheme]", "dimension = %d" % scheme.dim]
    for row in scheme.physical:
        lines.append("physical = " + ", ".join(format_scalar(x) for x in row))
    for row in scheme.internal:
        lines.append("internal = " + ", ".join(format_scalar(x) for x in row))
    if bijection:
        lines.append("")
        lines.append("[bijection]")
        for key in ("transversal", "sublattice", "complement"):
            rows = bijection.get(key)
            if rows is None:
                continue
            for row in rows:
                lines.append("%s = %s"
                             % (key, " ".join(str(int(x)) for x in row)))
    if scheme.window is not None:
        lines.append("")
        lines.append("[window]")
        lines.append("nonsingular = %s"
                     % ("true" if scheme.window.require_nonsingular else "false"))
        for piece in scheme.window.pieces:
            lines.append("")
            lines.append("[piece]")
            lines.append("offset = " + ", ".join(format_scalar(x) for x in piece.offset))
            for v in piece.vectors:
                lines.append("vector = " + ", ".join(format_scalar(x) for x in v))
    _write_text(path, "\n".join(lines) + "\n")


# -- rotation instance description ----------------------------------------


def parse_instance_file(path):
    """Rotation data: alpha coordinates, lifts, offset, optional horizon."""
    sections = read_table(path)
    for name, pairs in sections:
        if name != "rotation":
            continue
        alpha_text = _single(pairs, "alpha")
        if alpha_text is None:
            raise FormatError("%s: [rotation] needs alpha" % path)
        alpha = _scalar_list(alpha_text)
        lifts = []
        for text in _collect(pairs, "lift"):
            if ";" not in text:
                raise FormatError("%s: lift needs 'n1 .. ns ; n'" % path)
            head, tail = text.split(";", 1)
            lifts.append((_int_list(head), int(tail.strip())))
        if not lifts:
            raise FormatError("%s: [rotation] needs lift rows" % path)
        offset_text = _single(pairs, "offset")
        offset = _scalar_list(offset_text) if offset_text is not None else None
        horizon_text = _single(pairs, "horizon")
        horizon = int(horizon_text) if horizon_text is not None else None
        return {"alpha": alpha, "lifts": lifts, "offset": offset,
                "horizon": horizon}
    raise FormatError("%s: missing [rotation] section" % path)


def write_instance_file(path, inst, horizon=None):
    lines = ["[rotation]",
             "alpha = " + ", ".join(format_scalar(x) for x in inst.alpha)]
    for nvec, nlast in inst.lifts:
        lines.append("lift = %s ; %d" % (" ".join(str(n) for n in nvec), nlast))
    lines.append("offset = " + ", ".join(format_scalar(x) for x in inst.offset))
    if horizon is not None:
        lines.append("horizon = %d" % horizon)
    _write_text(path, "\n".join(lines) + "\n")


# -- polyomino region files ------------------------------------------------


def read_region_file(path):
    cells = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise FormatError("%s:%d: expected two integers" % (path, lineno))
            try:
                cells.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise FormatError("%s:%d: expected two integers" % (path, lineno))
    return tuple(cells)


def write_region_file(path, cells):
    _write_text(path, "".join("%d %d\n" % (i, j) for i, j in cells))


# -- precision tags and JSON plumbing -------------------------------------


def precision_tag(mode) -> str:
    if mode is EXACT or mode == "exact":
        return "exact"
    if isinstance(mode, FloatMode):
        return "float:%d" % mode.bits
    return str(mode)


def parse_precision(text):
    """'exact' or 'float:BITS' to an evaluation mode."""
    text = (text or "exact").strip().lower()
    if text == "exact":
        return EXACT
    if text == "float" or text.startswith("float:"):
        _, _, bits = text.partition(":")
        try:
            return FloatMode(bits=int(bits)) if bits else FloatMode()
        except ValueError as exc:
            raise FormatError("bad precision %r: %s" % (text, exc))
    raise FormatError("bad precision %r (use exact or float:BITS)" % text)


def report_meta(mode, min_margin=None):
    return {
        "schema_version": SCHEMA_VERSION,
        "precision": precision_tag(mode),
        "min_margin": None if min_margin is None else float(min_margin),
    }


def write_json(path, payload):
    _write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def scalar_text(x):
    return format_scalar(from_number(x))


# -- CSV exports -----------------------------------------------------------


def _open_csv(path):
    return open(path, "w", encoding="utf-8", newline="")


def write_patch_csv(path, patch):
    """Lattice coordinates, physical and internal parts, piece index."""
    scheme = patch.scheme
    n, kp, ki = scheme.dim, scheme.k_p, scheme.k_i
    header = ["g%d" % i for i in range(n)] \
        + ["y%d" % i for i in range(kp)] \
        + ["w%d" % i for i in range(ki)] + ["piece"]
    with _open_csv(path) as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for pt in patch.points:
            row = [str(int(g)) for g in pt.gamma]
            row += [scalar_text(v) for v in scheme.physical_coords(pt.y)]
            row += [scalar_text(v) for v in scheme.internal_coords(pt.w)]
            row.append(str(pt.piece))
            out.writerow(row)


def patch_payload(patch, mode):
    scheme = patch.scheme
    points = []
    for pt in patch.points:
        points.append({
            "gamma": [int(g) for g in pt.gamma],
            "y": [scalar_text(v) for v in pt.y],
            "w": [scalar_text(v) for v in pt.w],
            "piece": pt.piece,
        })
    return dict(report_meta(mode, patch.min_margin),
                kind="patch", dimension=scheme.dim, count=len(points),
                points=points)


def write_plane_csv(path, points):
    """Plotting export: float plane position and piece index per point."""
    with _open_csv(path) as fh:
        out = csv.writer(fh)
        out.writerow(["x", "y", "piece"])
        for x, y, piece in points:
            out.writerow([repr(float(x)), repr(float(y)), str(piece)])


def write_pairs_csv(path, pairs, scheme):
    """Bijection pairs: physical parts, images, displacement."""
    kp = scheme.k_p
    header = ["y%d" % i for i in range(kp)] \
        + ["f%d" % i for i in range(kp)] + ["displacement"]
    with _open_csv(path) as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for point, image, dist_sq in pairs:
            row = [scalar_text(v) for v in scheme.physical_coords(point.y)]
            row += [scalar_text(v) for v in scheme.physical_coords(image)]
            row.append(repr(float(dist_sq) ** 0.5))
            out.writerow(row)


def write_discrepancy_csv(path, curve):
    """The full counting-error curve, one row per horizon value."""
    d = curve.d_float()
    with _open_csv(path) as fh:
        out = csv.writer(fh)
        out.writerow(["m", "d"])
        for i, v in enumerate(d):
            out.writerow([str(i + 1), repr(float(v))])


def verification_payload(report, mode):
    return dict(report_meta(mode), kind="verification",
                n_points=report.n_points,
                n_fibers=report.n_fibers,
                n_complete=report.n_complete,
                n_boundary_points=report.n_boundary_points,
                fiber_counts_ok=report.fiber_counts_ok,
                injective=report.injective,
                core_surjective=report.core_surjective,
                within_bound=report.within_bound,
                observed_max=report.observed_max(),
                observed_max_sq=scalar_text(report.observed_max_sq),
                bound=report.bound.value(),
                bound_step_sq=scalar_text(report.bound.step_sq),
                bound_pair_sq=scalar_text(report.bound.pair_sq),
                ok=report.ok,
                failures=list(report.failures))
