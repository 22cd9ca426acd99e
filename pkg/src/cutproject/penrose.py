"""Five-fold cut-and-project vertex sets and their window decomposition.

The ambient space is R^5 with the integer lattice.  The physical plane is
spanned by the cosine and sine rows of the first fifth-turn, the internal
space by the second-mode rows together with the diagonal.  Projecting the
integer points whose internal image lands in a translated cube image gives
the vertex set of a Penrose tiling, up to a linear change of coordinates.

Both spanning rows are stored with their irrational overall scale divided
out, which keeps every coordinate in the golden quadratic field: the sine
rows are proportional over that field, so membership and counting reduce
to exact sign determinations.  The one true irrational scale (the leading
sine value) reappears only when exporting plane points for plotting.

The cube image in the internal space is a zonotope over five generators;
it splits into ten half-open parallelotope pieces, one per independent
3-subset.  Each piece is spanned by the internal images of its own three
lattice axes, so every fiber of the complement lattice carries exactly one
accepted point; that structure drives both the per-piece bijections and a
fast patch generator that walks fibers instead of enumerating candidates.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .bijection import BijectionSetup, build_setup, displacement_bound
from .errors import CutProjectError, SingularOffsetError
from .linalg import det, inverse, mat, mat_vec, vdot, vsub
from .scalars import (
    Surd,
    exact_floor,
    from_number,
    golden_ratio,
    scalar_sign,
    sqrt_int,
    to_mpf,
)
from .scheme import EXACT, LiftedPoint, Patch, PhysicalBall, Scheme, Window
from .zonotope import as_window_pieces, half_open_decomposition

__all__ = [
    "COSINE_ROW",
    "SINE_ROW",
    "PenroseScheme",
    "build_penrose",
    "WindowDecomposition",
    "PieceData",
    "decompose_window",
    "piece_patch",
    "vertex_patch",
    "plane_coords",
    "true_plane_point",
    "sine_scale",
    "density_estimate",
    "CubeCountReport",
    "cube_count_residual",
    "random_polyomino",
]

_SQ5 = sqrt_int(5)
_PHI = golden_ratio()
_C72 = (_SQ5 - 1) / 4
_C144 = -(1 + _SQ5) / 4

# cosine row of the first fifth-turn, and the sine row divided by its
# leading value; the second-mode rows and the diagonal span the rest
COSINE_ROW = (1, _C72, _C144, _C144, _C72)
SINE_ROW = (0, Fraction(1), _PHI - 1, 1 - _PHI, Fraction(-1))
_W1 = (1, _C144, _C72, _C72, _C144)
_W2 = (0, Fraction(1), -_PHI, _PHI, Fraction(-1))
_DIAG = (1, 1, 1, 1, 1)

# square of the leading sine value, and the exact quadratic form giving the
# ambient length of a physical vector from its two plane coordinates
SINE_SQ = (5 + _SQ5) / 8
_QA = Fraction(2, 5)
_QB = (5 + _SQ5) / 20

# window translate used when none is given: irrational in the first and
# third internal coordinates, rational in the second, picked so facet
# coincidences cannot arise from small-denominator accidents
DEFAULT_OFFSET = (Surd(0, Fraction(1, 11), 5), Fraction(3, 13),
                  Surd(0, Fraction(1, 17), 5))


def sine_scale(bits: int = 64) -> float:
    """The leading sine value, the one scale outside the quadratic field."""
    with mpmath.workprec(bits):
        return float(mpmath.sqrt(to_mpf(SINE_SQ, bits)))


def plane_coords(vector):
    """Exact plane coordinates (a, b) of an ambient or integer 5-vector.

    a is the true horizontal coordinate; the true vertical coordinate is b
    times the leading sine value.  Both depend only on the physical part.
    """
    return (vdot(vector, COSINE_ROW), vdot(vector, SINE_ROW))


def true_plane_point(vector, scale=None):
    """Float plane position of a point, sine scale applied."""
    a, b = plane_coords(vector)
    if scale is None:
        scale = sine_scale()
    return (float(a), scale * float(b))


def _norm_sq_from_plane(a, b):
    # ambient squared length of the physical part, from plane coordinates
    return _QA * a * a + _QB * b * b


@dataclass(frozen=True)
class PenroseScheme:
    """The 5-to-2 scheme with its ten-piece window attached.

    offset holds the window translate in internal coordinates (second-mode
    rows then diagonal), shift the same translate as an ambient vector, and
    generators the internal coordinates of the five lattice axes.
    """

    scheme: Scheme
    offset: tuple
    shift: tuple
    generators: tuple
    decomposition: object


def _axis(i):
    return tuple(1 if j == i else 0 for j in range(5))


def build_penrose(offset=None) -> PenroseScheme:
    """Assemble the scheme, decompose the window, attach it non-singularly.

    The window is the internal image of the unit cube translated by the
    offset (given in internal coordinates); its zonotope is split into ten
    validated half-open parallelotope pieces.  Facet coincidences of
    lattice points are detected exactly on every generated patch.
    """
    if offset is None:
        offset = DEFAULT_OFFSET
    offset = tuple(from_number(x) for x in offset)
    if len(offset) != 3:
        raise ValueError("window translate needs 3 internal coordinates")
    base = Scheme([COSINE_ROW, SINE_ROW], [_W1, _W2, _DIAG])
    gens = tuple(base.internal_coords(_axis(i)) for i in range(5))
    decomp = half_open_decomposition(gens)
    internal_basis = (_W1, _W2, _DIAG)
    shift = mat_vec(mat(internal_basis), offset)
    window = Window(as_window_pieces(decomp, internal_basis, shift),
                    require_nonsingular=True)
    return PenroseScheme(
        scheme=base.with_window(window),
        offset=offset,
        shift=tuple(shift),
        generators=gens,
        decomposition=decomp,
    )


@dataclass(frozen=True)
class PieceData:
    """One window piece with its own scheme, bijection data, and density.

    subset names the three lattice axes whose internal images span the
    piece; translate is the integer vector whose internal image, plus the
    window shift, is the piece origin.  kappa_grid is the exact expected
    number of points per unit cell of the (a, b) plane grid.
    """

    index: int
    subset: tuple
    translate: tuple
    scheme: Scheme
    setup: BijectionSetup
    kappa_grid: object
    covolume_sq: object
    target_plane: tuple


@dataclass(frozen=True)
class WindowDecomposition:
    source: PenroseScheme
    pieces: tuple

    @property
    def volume(self):
        return self.source.decomposition.volume

    @property
    def kappa_grid_total(self):
        total = Fraction(0)
        for p in self.pieces:
            total = total + p.kappa_grid
        return total


def _integer_translate(zp, gens):
    """Reconstruct the 0/1 translate coefficients of a zonotope piece."""
    n = [0] * 5
    base = zp.offset
    for pos, k in enumerate(zp.subset):
        if zp.flipped[pos]:
            n[k] = 1
            base = vsub(base, gens[k])
    free = [k for k in range(5) if k not in zp.subset]
    for bits in itertools.product((0, 1), repeat=len(free)):
        acc = tuple(Fraction(0) for _ in range(3))
        for b, k in zip(bits, free):
            if b:
                acc = tuple(x + y for x, y in zip(acc, gens[k]))
        if all(scalar_sign(x - y) == 0 for x, y in zip(acc, base)):
            for b, k in zip(bits, free):
                n[k] = b
            return tuple(n)
    raise CutProjectError("piece translate is not a 0/1 combination of the axes")


def decompose_window(p: PenroseScheme, *, tiling_samples: int = 64) -> WindowDecomposition:
    """Per-piece schemes, bijection setups, and exact densities.

    Every piece gets the transversal spanned by its own three lattice axes,
    the complementary axes as the complement lattice, and therefore a
    single point on every fiber.
    """
    pieces = []
    for idx, zp in enumerate(p.decomposition.pieces):
        window = Window([p.scheme.window.pieces[idx]], require_nonsingular=True)
        scheme_j = p.scheme.with_window(window)
        transversal = [_axis(k) for k in zp.subset]
        complement = [_axis(k) for k in range(5) if k not in zp.subset]
        setup = build_setup(scheme_j, transversal,
                            fiber_sublattice=transversal,
                            complement_basis=complement,
                            tiling_samples=tiling_samples)
        target = setup.target_basis
        tp = tuple(plane_coords(v) for v in target)
        d = det(mat(tp))
        if scalar_sign(d) < 0:
            d = -d
        gram = tuple(tuple(vdot(a, b) for b in target) for a in target)
        pieces.append(PieceData(
            index=idx,
            subset=zp.subset,
            translate=_integer_translate(zp, p.generators),
            scheme=scheme_j,
            setup=setup,
            kappa_grid=1 / d,
            covolume_sq=det(mat(gram)),
            target_plane=tp,
        ))
    return WindowDecomposition(source=p, pieces=tuple(pieces))


# -- fiber-walking patch generation --------------------------------------


def _piece_frame(piece: PieceData):
    """Affine data mapping fiber coordinates to window frame coordinates."""
    scheme = piece.scheme
    wp = scheme.window.pieces[0]
    rows = [scheme.internal_coords(v) for v in wp.vectors]
    uinv = inverse(mat(rows))
    t = scheme.internal_coords(wp.offset)
    base = tuple(-x for x in mat_vec(uinv, t))
    signs = []
    for pos, k in enumerate(piece.subset):
        coords = mat_vec(uinv, scheme.internal_coords(_axis(k)))
        expect = [0, 0, 0]
        s = scalar_sign(coords[pos])
        expect[pos] = s
        if s == 0 or any(scalar_sign(c - e) != 0 for c, e in zip(coords, expect)):
            raise CutProjectError("piece frame is not aligned with its axes")
        signs.append(s)
    free = [k for k in range(5) if k not in piece.subset]
    fvecs = [mat_vec(uinv, scheme.internal_coords(_axis(k))) for k in free]
    return free, fvecs, base, tuple(signs)


def _fiber_box(piece: PieceData, radius):
    """Coordinate bounds on complement fibers reaching into the ball."""
    reach = float(radius) + displacement_bound(piece.setup).value() + 0.01
    gram = tuple(tuple(vdot(a, b) for b in piece.setup.target_basis)
                 for a in piece.setup.target_basis)
    ginv = inverse(gram)
    out = []
    for i in range(2):
        lim = reach * math.sqrt(float(ginv[i][i])) + 1e-9
        out.append(int(math.floor(lim)) + 1)
    return out


def piece_patch(piece: PieceData, radius) -> Patch:
    """All points of one piece's set inside a physical ball, by fibers.

    Each complement fiber holds exactly one accepted point; its lattice
    coordinates come from exact floors of the fiber's frame position, and
    the ball membership is decided exactly.  Equivalent to the generic
    patch generator on the same scheme, but linear in the fiber count.
    """
    radius = from_number(radius)
    rsq = radius * radius
    scheme = piece.scheme
    free, fvecs, base, signs = _piece_frame(piece)
    bound = _fiber_box(piece, radius)
    points = []
    for c1 in range(-bound[0], bound[0] + 1):
        part = tuple(b + c1 * f for b, f in zip(base, fvecs[0]))
        for c2 in range(-bound[1], bound[1] + 1):
            f0 = tuple(x + c2 * f for x, f in zip(part, fvecs[1]))
            gamma = [0] * 5
            gamma[free[0]] = c1
            gamma[free[1]] = c2
            singular = False
            for pos, k in enumerate(piece.subset):
                fl = exact_floor(f0[pos])
                if scalar_sign(f0[pos] - fl) == 0:
                    singular = True
                gamma[k] = -fl if signs[pos] > 0 else fl
            a, b = plane_coords(gamma)
            if scalar_sign(_norm_sq_from_plane(a, b) - rsq) > 0:
                continue
            if singular:
                raise SingularOffsetError(
                    "lattice point %s projects onto a facet of the window"
                    % (tuple(gamma),))
            points.append(_lift(scheme, tuple(gamma), a, b))
    points.sort(key=lambda pt: pt.gamma)
    return Patch(scheme, scheme.window, PhysicalBall(radius), EXACT,
                 points, None)


def _lift(scheme: Scheme, gamma, a=None, b=None, piece_index: int = 0):
    if a is None:
        a, b = plane_coords(gamma)
    # plane coordinates determine the split coordinates on the basis norms
    p = (_QA * a, b * (5 + _SQ5) / 20)
    y = mat_vec(scheme.physical, p)
    w = mat_vec(scheme.internal, scheme.lattice_internal_coords(gamma))
    return LiftedPoint(gamma, y, w, piece_index)


def vertex_patch(decomp: WindowDecomposition, radius) -> Patch:
    """The full vertex set inside a ball, as one patch of the parent scheme.

    Pieces are disjoint and cover the window, so the union over the ten
    fiber walks is exactly the accepted set; points carry the index of the
    window piece that accepted them.
    """
    merged = []
    for piece in decomp.pieces:
        sub = piece_patch(piece, radius)
        for pt in sub.points:
            merged.append(LiftedPoint(pt.gamma, pt.y, pt.w, piece.index))
    merged.sort(key=lambda pt: pt.gamma)
    scheme = decomp.source.scheme
    return Patch(scheme, scheme.window, PhysicalBall(from_number(radius)),
                 EXACT, merged, None)


# -- densities and cube counting -----------------------------------------


def density_estimate(points, radius) -> float:
    """Points per unit area of the plane ball of the given radius.

    Takes true plane positions (pairs of numbers); exact inputs are
    accepted and compared exactly, floats compared as floats.
    """
    radius = float(radius)
    if radius <= 0:
        raise ValueError("radius must be positive")
    rsq = radius * radius
    inside = 0
    for a, b in points:
        if float(a) * float(a) + float(b) * float(b) <= rsq:
            inside += 1
    return inside / (math.pi * rsq)


@dataclass(frozen=True)
class CubeCountReport:
    """Point count of a cube region against its expected density.

    All counts are exact; residual_exact keeps the field value of the
    deviation and residual its float image.  boundary is the number of
    exposed unit facets of the region.
    """

    cells: int
    points: int
    expected: float
    residual: float
    residual_exact: object
    boundary: int

    @property
    def ratio(self) -> float:
        return self.residual / self.boundary if self.boundary else 0.0


def _exposed_facets(cells) -> int:
    cellset = set(cells)
    total = 0
    for (i, j) in cellset:
        for ni, nj in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if (ni, nj) not in cellset:
                total += 1
    return total


def cube_count_residual(points, cells, kappa) -> CubeCountReport:
    """Count plane-grid points of a cube union against kappa per cell.

    points are exact (a, b) plane pairs; a point lies in cell (i, j)
    when floor(a) == i and floor(b) == j.  Duplicate cells are an error.
    """
    cells = [(int(i), int(j)) for i, j in cells]
    cellset = set(cells)
    if len(cellset) != len(cells):
        raise ValueError("cube region lists a cell twice")
    kappa = from_number(kappa)
    count = 0
    for a, b in points:
        if (exact_floor(a), exact_floor(b)) in cellset:
            count += 1
    dev = count - kappa * len(cells)
    if scalar_sign(dev) < 0:
        dev = -dev
    return CubeCountReport(
        cells=len(cells),
        points=count,
        expected=float(kappa * len(cells)),
        residual=float(dev),
        residual_exact=dev,
        boundary=_exposed_facets(cellset),
    )


def random_polyomino(cells, seed, bound=None):
    """Connected union of unit cells grown from the origin.

    Growth picks uniformly among the adjacent empty sites weighted by how
    many occupied neighbors they touch, which keeps regions compact.  An
    optional bound confines cells to [-bound, bound]^2.
    """
    cells = int(cells)
    if cells < 1:
        raise ValueError("a region needs at least one cell")
    rng = random.Random(seed)
    have = {(0, 0)}
    frontier = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    while len(have) < cells:
        if not frontier:
            raise ValueError("growth bound is too tight for the cell count")
        pick = rng.randrange(len(frontier))
        frontier[pick], frontier[-1] = frontier[-1], frontier[pick]
        cell = frontier.pop()
        if cell in have:
            continue
        if bound is not None and max(abs(cell[0]), abs(cell[1])) > bound:
            continue
        have.add(cell)
        for nb in ((cell[0] + 1, cell[1]), (cell[0] - 1, cell[1]),
                   (cell[0], cell[1] + 1), (cell[0], cell[1] - 1)):
            if nb not in have:
                frontier.append(nb)
    return tuple(sorted(have))
