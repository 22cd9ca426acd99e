"""Cut-and-project schemes: subspace pair, lattice, window, patch generation.

A scheme fixes an ambient space R^n, a physical subspace spanned by exact
vectors, a complementary internal subspace, and a full-rank integer lattice.
Windows are finite unions of half-open parallelotope pieces sitting inside
the internal subspace.  Accepted lattice points are those whose internal
projection lands in the window; a patch materializes all accepted points
inside a finite region together with their projections.

All stored data is exact: floats handed in are converted to their exact
rational values on entry.  The default evaluation mode decides membership
exactly.  FloatMode evaluates the same data through mpf arithmetic at a
chosen precision and refuses to decide within an explicit margin of a
facet, which is the honest behavior when the exact input is itself only an
approximation of an intended irrational.
"""

from __future__ import annotations

from typing import Optional, Sequence

import mpmath

from . import linalg
from .errors import (
    BoundaryAmbiguousError,
    DegenerateDecompositionError,
    RankDeficientError,
    RegionError,
    SingularOffsetError,
)
from .lattice import identity_int
from .linalg import _div
from .scalars import exact_ceil, exact_floor, from_number, scalar_sign, to_mpf

__all__ = [
    "EXACT",
    "FloatMode",
    "WindowPiece",
    "Window",
    "parallelotope_window",
    "Scheme",
    "ObliqueSplit",
    "GammaBox",
    "PhysicalBall",
    "LiftedPoint",
    "Patch",
    "accept",
    "generate_patch",
    "window_membership",
    "region_contains",
]


class _ExactMode:
    def __repr__(self):
        return "EXACT"


EXACT = _ExactMode()


class FloatMode:
    """Floating evaluation at a fixed precision with a refusal margin.

    Membership decisions closer to a facet than `margin` (measured in the
    window's normalized facet coordinates) raise BoundaryAmbiguousError.
    """

    def __init__(self, bits: int = 256, margin=None):
        if bits < 16:
            raise ValueError("precision below 16 bits is not supported")
        self.bits = int(bits)
        with mpmath.workprec(self.bits):
            self.margin = mpmath.mpf(10) ** (-(bits // 4)) if margin is None else mpmath.mpf(margin)

    def __repr__(self):
        return f"FloatMode(bits={self.bits})"


def _exact_vec(xs):
    return tuple(from_number(x) for x in xs)


def _exact_mat(rows):
    return tuple(_exact_vec(r) for r in rows)


class WindowPiece:
    """Half-open parallelotope: offset + sum of t_j * vectors_j, 0 <= t_j < 1.

    A direction can be closed (t_j in [0,1]) via the `closed` flags; the
    default is half-open everywhere.
    """

    __slots__ = ("vectors", "offset", "closed")

    def __init__(self, vectors, offset, closed: Optional[Sequence[bool]] = None):
        self.vectors = _exact_mat(vectors)
        self.offset = _exact_vec(offset)
        k = len(self.vectors)
        self.closed = tuple(bool(c) for c in closed) if closed is not None else (False,) * k
        if len(self.closed) != k:
            raise ValueError("one openness flag per spanning vector")


class Window:
    """Union of pairwise disjoint half-open parallelotope pieces.

    require_nonsingular: when True, a lattice point projecting exactly onto
    any piece facet raises SingularOffsetError (the offset is not generic).
    When False such points are resolved silently by the half-open rule.
    """

    __slots__ = ("pieces", "require_nonsingular")

    def __init__(self, pieces: Sequence[WindowPiece], require_nonsingular: bool = False):
        self.pieces = tuple(pieces)
        if not self.pieces:
            raise ValueError("window needs at least one piece")
        self.require_nonsingular = bool(require_nonsingular)


def parallelotope_window(vectors, offset, closed=None, require_nonsingular=False) -> Window:
    return Window([WindowPiece(vectors, offset, closed)], require_nonsingular)


class Scheme:
    """Ambient R^n with exact physical/internal bases and an integer lattice.

    Vectors are row tuples; a lattice point with integer coordinates m maps
    to the ambient point m @ lattice_basis.  The physical and internal bases
    must jointly span R^n, which is checked exactly on construction.
    """

    def __init__(self, physical, internal, lattice=None, window: Optional[Window] = None):
        self.physical = _exact_mat(physical)
        self.internal = _exact_mat(internal)
        self.dim = len(self.physical[0]) if self.physical else len(self.internal[0])
        self.k_p = len(self.physical)
        self.k_i = len(self.internal)
        if self.k_p + self.k_i != self.dim:
            raise DegenerateDecompositionError("physical + internal dimensions must fill the ambient space")
        if lattice is None:
            lattice = identity_int(self.dim).tolist()
        rows = [list(r) for r in (lattice.tolist() if hasattr(lattice, "tolist") else lattice)]
        for row in rows:
            for x in row:
                if not isinstance(x, int):
                    raise ValueError("lattice basis entries must be integers")
        self.lattice_basis = linalg.mat(rows)
        if len(self.lattice_basis) != self.dim or linalg.rank(self.lattice_basis) != self.dim:
            raise RankDeficientError("lattice must have full rank")
        stack = self.physical + self.internal
        try:
            self._split = linalg.inverse(stack)
        except RankDeficientError:
            raise DegenerateDecompositionError("physical and internal subspaces are not complementary") from None
        # splitting coordinates of the lattice basis vectors, precomputed
        full = linalg.mat_mul(self.lattice_basis, self._split)
        self._lat_phys = tuple(row[: self.k_p] for row in full)
        self._lat_int = tuple(row[self.k_p:] for row in full)
        self.window = window
        self._float_cache = {}

    # -- coordinate maps ------------------------------------------------

    def split_coords(self, x: Sequence):
        c = linalg.mat_vec(self._split, linalg.vec(x))
        return c[: self.k_p], c[self.k_p:]

    def physical_coords(self, x: Sequence):
        return self.split_coords(x)[0]

    def internal_coords(self, x: Sequence):
        return self.split_coords(x)[1]

    def project(self, x: Sequence, target: str = "physical"):
        a, b = self.split_coords(x)
        if target == "physical":
            return linalg.mat_vec(self.physical, a) if self.k_p else tuple([0] * self.dim)
        if target == "internal":
            return linalg.mat_vec(self.internal, b) if self.k_i else tuple([0] * self.dim)
        raise ValueError("target must be 'physical' or 'internal'")

    def lift(self, m: Sequence[int]):
        return linalg.mat_vec(self.lattice_basis, tuple(m))

    def lattice_physical_coords(self, m: Sequence[int]):
        return linalg.mat_vec(self._lat_phys, tuple(m))

    def lattice_internal_coords(self, m: Sequence[int]):
        return linalg.mat_vec(self._lat_int, tuple(m))

    def physical_gram(self):
        return tuple(tuple(linalg.vdot(a, b) for b in self.physical) for a in self.physical)

    def oblique_projector(self, z_basis) -> "ObliqueSplit":
        return ObliqueSplit(self, z_basis)

    def with_window(self, window: Window) -> "Scheme":
        return Scheme(self.physical, self.internal, self.lattice_basis, window)

    def _float_lat_int(self, bits: int):
        key = ("lat_int", bits)
        m = self._float_cache.get(key)
        if m is None:
            m = [[to_mpf(x, bits) for x in row] for row in self._lat_int]
            self._float_cache[key] = m
        return m


class ObliqueSplit:
    """Projection onto the physical subspace along a transversal Z.

    Built from X = V_p (+) Z; fails with DegenerateDecompositionError when Z
    is not complementary to the physical subspace.
    """

    def __init__(self, scheme: Scheme, z_basis):
        self.scheme = scheme
        self.z_basis = _exact_mat(z_basis)
        if len(self.z_basis) != scheme.k_i:
            raise DegenerateDecompositionError("transversal has wrong dimension")
        stack = scheme.physical + self.z_basis
        try:
            self._split = linalg.inverse(stack)
        except RankDeficientError:
            raise DegenerateDecompositionError("transversal is not complementary to the physical subspace") from None

    def coords(self, x: Sequence):
        c = linalg.mat_vec(self._split, linalg.vec(x))
        return c[: self.scheme.k_p], c[self.scheme.k_p:]

    def physical_part(self, x: Sequence):
        a, _ = self.coords(x)
        return linalg.mat_vec(self.scheme.physical, a)

    def z_part(self, x: Sequence):
        _, b = self.coords(x)
        return linalg.mat_vec(self.z_basis, b)


# -- prepared windows ---------------------------------------------------


class _PreparedPiece:
    __slots__ = ("uinv", "t", "closed")

    def __init__(self, scheme: Scheme, piece: WindowPiece):
        k = scheme.k_i
        if len(piece.vectors) != k:
            raise RankDeficientError("window piece must span the internal subspace")
        urows = []
        for v in piece.vectors:
            a, b = scheme.split_coords(v)
            if any(x != 0 for x in a):
                raise ValueError("window piece vector lies outside the internal subspace")
            urows.append(b)
        a, t = scheme.split_coords(piece.offset)
        if any(x != 0 for x in a):
            raise ValueError("window offset lies outside the internal subspace")
        self.uinv = linalg.inverse(linalg.mat(urows))
        self.t = t
        self.closed = piece.closed

    def coords(self, int_coords):
        return linalg.mat_vec(self.uinv, linalg.vsub(int_coords, self.t))


class _PreparedWindow:
    __slots__ = ("pieces", "require_nonsingular", "bbox", "_float_cache")

    def __init__(self, scheme: Scheme, window: Window):
        self.pieces = tuple(_PreparedPiece(scheme, p) for p in window.pieces)
        self.require_nonsingular = window.require_nonsingular
        self.bbox = self._bounding_box(scheme, window)
        self._float_cache = {}

    @staticmethod
    def _bounding_box(scheme: Scheme, window: Window):
        lo = [None] * scheme.k_i
        hi = [None] * scheme.k_i
        for piece in window.pieces:
            base = scheme.internal_coords(piece.offset)
            gens = [scheme.internal_coords(v) for v in piece.vectors]
            for mask in range(1 << len(gens)):
                v = list(base)
                for j, g in enumerate(gens):
                    if mask >> j & 1:
                        v = [x + y for x, y in zip(v, g)]
                for j, x in enumerate(v):
                    if lo[j] is None or x < lo[j]:
                        lo[j] = x
                    if hi[j] is None or x > hi[j]:
                        hi[j] = x
        return tuple(lo), tuple(hi)

    def float_pieces(self, bits: int):
        cached = self._float_cache.get(bits)
        if cached is None:
            cached = []
            for p in self.pieces:
                rows = [[to_mpf(x, bits) for x in row] for row in p.uinv]
                cols = [list(c) for c in zip(*rows)]
                t = [to_mpf(x, bits) for x in p.t]
                cached.append((cols, t))
            self._float_cache[bits] = cached
        return cached


def _membership_exact(prepared: _PreparedWindow, gamma, int_coords):
    hit = None
    singular = None
    for idx, piece in enumerate(prepared.pieces):
        c = piece.coords(int_coords)
        if all(0 <= cj <= 1 for cj in c) and any(cj == 0 or cj == 1 for cj in c):
            singular = idx if singular is None else singular
        ok = True
        for cj, closed in zip(c, piece.closed):
            if cj < 0 or cj > 1 or (cj == 1 and not closed):
                ok = False
                break
        if ok and hit is None:
            hit = idx
    if singular is not None and prepared.require_nonsingular:
        raise SingularOffsetError(
            f"lattice point {tuple(gamma)} projects onto a facet of window piece {singular}"
        )
    return hit


def _membership_float(prepared: _PreparedWindow, gamma, int_coords_f, mode: FloatMode):
    hit = None
    closest = None
    for idx, (cols, t) in enumerate(prepared.float_pieces(mode.bits)):
        diff = [x - y for x, y in zip(int_coords_f, t)]
        ok = True
        for col in cols:
            cj = mpmath.fsum(d * u for d, u in zip(diff, col))
            dist = min(abs(cj), abs(cj - 1))
            if dist < mode.margin:
                raise BoundaryAmbiguousError(
                    f"lattice point {tuple(gamma)} lies within the margin of a window facet"
                )
            if closest is None or dist < closest:
                closest = dist
            if not (0 < cj < 1):
                ok = False
                break
        if ok and hit is None:
            hit = idx
    return hit, closest


def accept(scheme: Scheme, gamma: Sequence[int], window: Optional[Window] = None, mode=EXACT):
    """Index of the window piece containing the point's internal projection.

    Returns None when the point is rejected.  In float mode a decision
    closer than the margin to a facet raises BoundaryAmbiguousError.
    """
    w = window if window is not None else scheme.window
    if w is None:
        raise ValueError("no window attached to the scheme or passed in")
    prepared = _PreparedWindow(scheme, w)
    gamma = tuple(int(x) for x in gamma)
    if mode is EXACT:
        return _membership_exact(prepared, gamma, scheme.lattice_internal_coords(gamma))
    with mpmath.workprec(mode.bits):
        lat = scheme._float_lat_int(mode.bits)
        b = [mpmath.fsum(m * lat[i][j] for i, m in enumerate(gamma)) for j in range(scheme.k_i)]
        piece, _ = _membership_float(prepared, gamma, b, mode)
        return piece


def window_membership(scheme: Scheme, window: Window):
    """Exact membership test for ambient points, prepared once.

    Returns a callable taking an ambient vector and returning the index of
    the piece containing its internal projection, or None.
    """
    prepared = _PreparedWindow(scheme, window)

    def contains(point):
        return _membership_exact(prepared, point, scheme.internal_coords(point))

    return contains


# -- regions ------------------------------------------------------------


class GammaBox:
    """Axis box of lattice coordinates, inclusive on both ends."""

    def __init__(self, ranges: Sequence[tuple]):
        self.ranges = tuple((int(lo), int(hi)) for lo, hi in ranges)

    def __repr__(self):
        return f"GammaBox({list(self.ranges)})"


class PhysicalBall:
    """Euclidean ball in the physical subspace around an ambient center."""

    def __init__(self, radius, center: Optional[Sequence] = None):
        self.radius = from_number(radius)
        if scalar_sign(self.radius) < 0:
            raise RegionError("ball radius must be nonnegative")
        self.center = None if center is None else _exact_vec(center)

    def __repr__(self):
        return f"PhysicalBall(radius={self.radius})"


def region_contains(scheme: Scheme, region, m) -> bool:
    """Exact membership of a lattice coordinate vector in a region."""
    m = tuple(int(x) for x in m)
    if isinstance(region, GammaBox):
        if len(region.ranges) != scheme.dim:
            raise RegionError("box has wrong dimension")
        return all(lo <= x <= hi for x, (lo, hi) in zip(m, region.ranges))
    if isinstance(region, PhysicalBall):
        center = region.center if region.center is not None else tuple([0] * scheme.dim)
        a0 = scheme.physical_coords(center)
        gram = scheme.physical_gram()
        d = linalg.vsub(scheme.lattice_physical_coords(m), a0)
        q = linalg.vdot(linalg.mat_vec(gram, d), d)
        return not q > region.radius * region.radius
    raise RegionError(f"unsupported region {region!r}")


class LiftedPoint:
    """Accepted lattice point with its two projections."""

    __slots__ = ("gamma", "y", "w", "piece")

    def __init__(self, gamma, y, w, piece):
        self.gamma = gamma
        self.y = y
        self.w = w
        self.piece = piece

    def __repr__(self):
        return f"LiftedPoint(gamma={self.gamma}, piece={self.piece})"


class Patch:
    """All accepted points of a region, in lexicographic gamma order."""

    def __init__(self, scheme, window, region, mode, points, min_margin=None):
        self.scheme = scheme
        self.window = window
        self.region = region
        self.mode = mode
        self.points = points
        self.min_margin = min_margin

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


# -- integer enumeration by elimination ---------------------------------
#
# Constraints are (coeffs, rhs, strict) meaning coeffs . m <= rhs, with
# strict inequality when the flag is set.  Variables are eliminated from the
# last index down, so enumeration assigns m_0 first and produces candidates
# in lexicographic order.


def _combine(a, b, k):
    ca, ra, sa = a
    cb, rb, sb = b
    f1 = -cb[k]
    f2 = ca[k]
    coeffs = tuple(f1 * x + f2 * y for x, y in zip(ca, cb))
    return (coeffs, f1 * ra + f2 * rb, sa or sb)


def _row_key(coeffs, rhs, strict):
    # canonical form: scale so the leading nonzero coefficient is +-1;
    # equal keys describe the same halfspace
    lead = next(x for x in coeffs if x != 0)
    if scalar_sign(lead) < 0:
        lead = -lead
    return (tuple(_div(x, lead) for x in coeffs), _div(rhs, lead), strict)


def _fm_levels(constraints, n):
    """Bound lists per variable, or None when the system is infeasible.

    Derived rows carry the set of original rows they descend from; a row
    descending from more than one plus the number of eliminated variables
    is implied by the others and dropped (Imbert's criterion), which keeps
    dense systems from blowing up combinatorially.
    """
    pool = [(c, frozenset([i])) for i, c in enumerate(constraints)]
    bounds = [None] * n
    seen = {}
    for c, h in pool:
        seen[_row_key(*c)] = h
    for step, k in enumerate(reversed(range(n)), start=1):
        here = [e for e in pool if e[0][0][k] != 0]
        pool = [e for e in pool if e[0][0][k] == 0]
        bounds[k] = [c for c, _ in here]
        pos = [e for e in here if scalar_sign(e[0][0][k]) > 0]
        neg = [e for e in here if scalar_sign(e[0][0][k]) < 0]
        if not pos or not neg:
            raise RegionError("enumeration region is unbounded")
        for a, ha in pos:
            for b, hb in neg:
                hist = ha | hb
                if len(hist) > step + 1:
                    continue
                coeffs, rhs, strict = _combine(a, b, k)
                if all(x == 0 for x in coeffs):
                    s = scalar_sign(rhs)
                    if s < 0 or (strict and s == 0):
                        return None
                    continue
                key = _row_key(coeffs, rhs, strict)
                old = seen.get(key)
                if old is not None and len(old) <= len(hist):
                    continue
                seen[key] = hist
                pool.append(((coeffs, rhs, strict), hist))
    for (coeffs, rhs, strict), _ in pool:
        s = scalar_sign(rhs)
        if s < 0 or (strict and s == 0):
            return None
    return bounds


def _enumerate_candidates(bounds, n):
    out = []
    prefix = [0] * n

    def rec(k):
        lo = None
        hi = None
        for coeffs, rhs, strict in bounds[k]:
            acc = rhs
            for j in range(k):
                if coeffs[j] != 0:
                    acc = acc - coeffs[j] * prefix[j]
            val = _div(acc, coeffs[k])
            if scalar_sign(coeffs[k]) > 0:
                cand = exact_ceil(val) - 1 if strict else exact_floor(val)
                hi = cand if hi is None else min(hi, cand)
            else:
                cand = exact_floor(val) + 1 if strict else exact_ceil(val)
                lo = cand if lo is None else max(lo, cand)
        for v in range(lo, hi + 1):
            prefix[k] = v
            if k == n - 1:
                out.append(tuple(prefix))
            else:
                rec(k + 1)

    if n == 0:
        return [()]
    rec(0)
    return out


def _unit_coeffs(n, i, sign):
    return tuple(sign if j == i else 0 for j in range(n))


def _int_sqrt_upper(q):
    """Smallest integer u >= 0 with u*u >= q, for an exact scalar q."""
    if scalar_sign(q) <= 0:
        return 0
    hi = 1
    while hi * hi < q:
        hi *= 2
    lo = hi // 2
    while lo < hi:
        mid = (lo + hi) // 2
        if mid * mid >= q:
            hi = mid
        else:
            lo = mid + 1
    return hi


def _region_constraints(scheme: Scheme, prepared: _PreparedWindow, region):
    n = scheme.dim
    cons = []
    lo, hi = prepared.bbox
    for j in range(scheme.k_i):
        col = tuple(scheme._lat_int[i][j] for i in range(n))
        cons.append((col, hi[j], False))
        cons.append((tuple(-x for x in col), -lo[j], False))
    if isinstance(region, GammaBox):
        if len(region.ranges) != n:
            raise RegionError("box has wrong dimension")
        for i, (a, b) in enumerate(region.ranges):
            cons.append((_unit_coeffs(n, i, 1), b, False))
            cons.append((_unit_coeffs(n, i, -1), -a, False))
        return cons, None
    if isinstance(region, PhysicalBall):
        center = region.center if region.center is not None else tuple([0] * n)
        a0 = scheme.physical_coords(center)
        gram = scheme.physical_gram()
        ginv = linalg.inverse(gram)
        rsq = region.radius * region.radius
        for i in range(scheme.k_p):
            u = _int_sqrt_upper(rsq * ginv[i][i])
            col = tuple(scheme._lat_phys[r][i] for r in range(n))
            cons.append((col, a0[i] + u, False))
            cons.append((tuple(-x for x in col), u - a0[i], False))

        def ball_filter(m):
            d = linalg.vsub(scheme.lattice_physical_coords(m), a0)
            q = linalg.vdot(linalg.mat_vec(gram, d), d)
            return not q > rsq

        return cons, ball_filter
    raise RegionError(f"unsupported region {region!r}")


def generate_patch(scheme: Scheme, region, window: Optional[Window] = None, mode=EXACT) -> Patch:
    """All accepted lattice points in the region, lexicographic in gamma.

    Completeness comes from eliminating variables of the combined system
    {internal projection inside the window's bounding box} and {region
    constraint}, so no candidate is missed; each candidate is then decided
    by the exact (or margin-checked floating) membership test.
    """
    w = window if window is not None else scheme.window
    if w is None:
        raise ValueError("no window attached to the scheme or passed in")
    prepared = _PreparedWindow(scheme, w)
    cons, extra_filter = _region_constraints(scheme, prepared, region)
    bounds = _fm_levels(cons, scheme.dim)
    points = []
    min_margin = None
    if bounds is not None:
        candidates = _enumerate_candidates(bounds, scheme.dim)
        if mode is EXACT:
            for m in candidates:
                if extra_filter is not None and not extra_filter(m):
                    continue
                piece = _membership_exact(prepared, m, scheme.lattice_internal_coords(m))
                if piece is not None:
                    points.append(_lift_point(scheme, m, piece))
        else:
            with mpmath.workprec(mode.bits):
                lat = scheme._float_lat_int(mode.bits)
                for m in candidates:
                    if extra_filter is not None and not extra_filter(m):
                        continue
                    b = [
                        mpmath.fsum(mi * lat[i][j] for i, mi in enumerate(m))
                        for j in range(scheme.k_i)
                    ]
                    piece, dist = _membership_float(prepared, m, b, mode)
                    if dist is not None and (min_margin is None or dist < min_margin):
                        min_margin = dist
                    if piece is not None:
                        points.append(_lift_point(scheme, m, piece))
    return Patch(scheme, w, region, mode, points, min_margin)


def _lift_point(scheme: Scheme, m, piece):
    a = scheme.lattice_physical_coords(m)
    b = scheme.lattice_internal_coords(m)
    y = linalg.mat_vec(scheme.physical, a) if scheme.k_p else tuple([0] * scheme.dim)
    wv = linalg.mat_vec(scheme.internal, b) if scheme.k_i else tuple([0] * scheme.dim)
    return LiftedPoint(m, y, wv, piece)
