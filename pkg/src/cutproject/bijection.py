"""Bounded-displacement matching of a projected point set to a lattice.

The construction needs a transversal subspace complementary to the physical
one, spanned by lattice vectors.  The lattice splits as (lattice in the
transversal) plus a complement; the window must be the internal image of a
half-open fundamental domain for the transversal modulo a finite-index
sublattice of its lattice part.  Each complement-fiber of the projected set
then carries exactly N points, where N is the sublattice index, and sending
the j-th point of each fiber to the oblique projection of its fiber base
plus j/N times the first projected complement generator is a bijection onto
a rank-d target lattice that moves no point farther than a computable
constant.

Setup validation is exact.  The empirical side (fiber counts, injectivity,
core surjectivity, observed displacement against the bound) is run by
``verify_patch`` over any generated patch.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import linalg
from .errors import (
    CutProjectError,
    DegenerateDecompositionError,
    NoComplementError,
    NotFundamentalDomainError,
)
from .lattice import (
    complement,
    coset_label,
    coset_rank,
    coset_structure,
    hermite_form,
    identity_int,
    int_det,
    int_matrix,
    saturate,
    sublattice_index,
)
from .scalars import exact_ceil, exact_floor, scalar_sign, to_mpf
from .scheme import ObliqueSplit, _PreparedWindow, _membership_exact, region_contains

__all__ = [
    "BijectionSetup",
    "FiberRecord",
    "DisplacementBound",
    "VerificationReport",
    "build_setup",
    "fibers",
    "map_point",
    "fiber_ordinal",
    "displacement_bound",
    "verify_patch",
    "bijection_pairs",
]


@dataclass(frozen=True)
class DisplacementBound:
    """Upper bound sqrt(step_sq) + sqrt(pair_sq) on point displacement.

    step_sq bounds the fractional-step term ((N-1)/N times the designated
    generator); pair_sq is the largest squared distance between a window
    vertex and a lifted domain vertex.  Comparisons against observed squared
    distances stay exact via the two-square-root trick.
    """

    step_sq: object
    pair_sq: object

    def covers_sq(self, observed_sq) -> bool:
        # observed <= sqrt(A) + sqrt(B)  iff  t := obs - A - B <= 0
        # or t^2 <= 4AB, all decided on exact scalars.
        t = observed_sq - self.step_sq - self.pair_sq
        if scalar_sign(t) <= 0:
            return True
        return scalar_sign(t * t - 4 * self.step_sq * self.pair_sq) <= 0

    def value(self, bits: int = 64) -> float:
        with mpmath.workprec(bits):
            return float(mpmath.sqrt(to_mpf(self.step_sq, bits))
                         + mpmath.sqrt(to_mpf(self.pair_sq, bits)))

    def __float__(self) -> float:
        return self.value()


class BijectionSetup:
    """Validated data for the fiber bijection on one scheme.

    All lattice data lives in lattice coordinates (integer row vectors);
    ambient vectors are exact tuples.  Construction runs every structural
    check and raises a diagnostic error on the first failure.
    """

    def __init__(self, scheme, transversal, fiber_sublattice=None,
                 complement_basis=None, *, tiling_samples=128, seed=20260822):
        if scheme.window is None:
            raise ValueError("scheme needs a window before building a bijection setup")
        self.scheme = scheme
        self.window = scheme.window

        rows = hermite_form(transversal)
        if rows.shape[0] != scheme.k_i:
            raise DegenerateDecompositionError(
                "transversal spanning set has rank %d, need %d"
                % (rows.shape[0], scheme.k_i))
        self.fiber_lattice = saturate(rows)
        k = self.fiber_lattice.shape[0]
        n = scheme.dim

        # ambient basis of the transversal, and its internal projections
        self.transversal = tuple(scheme.lift(tuple(int(x) for x in r))
                                 for r in self.fiber_lattice)
        self.oblique = ObliqueSplit(scheme, self.transversal)
        self._fiber_internal = linalg.mat(
            [scheme.project(v, "internal") for v in self.transversal])
        # the same projections in internal split coordinates: square,
        # invertible, and cheap to solve against per fiber
        self._fiber_splits = linalg.mat(
            [scheme.lattice_internal_coords(tuple(int(x) for x in r))
             for r in self.fiber_lattice])
        self._fiber_splits_inv = linalg.inverse(self._fiber_splits)

        if fiber_sublattice is None:
            self.fiber_sublattice = self.fiber_lattice.copy()
        else:
            self.fiber_sublattice = int_matrix(fiber_sublattice)
        self.points_per_fiber = sublattice_index(self.fiber_lattice,
                                                 self.fiber_sublattice)
        self.coset = coset_structure(self.fiber_lattice, self.fiber_sublattice)
        if self.coset.order != self.points_per_fiber:
            raise CutProjectError("coset order disagrees with the sublattice index")

        if complement_basis is None:
            self.complement_lattice = complement(self.fiber_lattice)
        else:
            self.complement_lattice = int_matrix(complement_basis)
        d = self.complement_lattice.shape[0]
        if d != n - k:
            raise NoComplementError("complement basis has rank %d, need %d" % (d, n - k))
        stacked = np.vstack([self.complement_lattice, self.fiber_lattice])
        if abs(int_det(stacked)) != 1:
            raise NoComplementError(
                "complement and transversal lattices do not split the full lattice")
        # integer splitting: m @ split_inv = (complement coeffs, fiber coeffs)
        inv = linalg.inverse(linalg.mat([[int(x) for x in row] for row in stacked]))
        self._split_inv = tuple(
            tuple(_as_int(x) for x in row) for row in inv)

        self.projected_complement = tuple(
            self.oblique.physical_part(scheme.lift(tuple(int(x) for x in r)))
            for r in self.complement_lattice)
        step = Fraction(1, self.points_per_fiber)
        first = self.projected_complement[0]
        self.target_basis = (tuple(step * x for x in first),) \
            + self.projected_complement[1:]
        self._projected_splits = tuple(
            scheme.physical_coords(g) for g in self.projected_complement)
        self._fiber_cache = {}
        self._check_target_index()

        self._prepared = _PreparedWindow(scheme, self.window)
        self._check_fundamental_domain(tiling_samples, seed)
        self._domain_bbox = self._window_bbox(self._fiber_internal)

    # -- construction-time validation ----------------------------------

    def _check_target_index(self):
        d = len(self.projected_complement)
        rows = []
        for g in self.projected_complement:
            coords = linalg.solve_coords(linalg.mat(self.target_basis), g)
            rows.append([_as_int(c) for c in coords])
        cs = coset_structure(identity_int(d), int_matrix(rows))
        if cs.order != self.points_per_fiber:
            raise CutProjectError(
                "projected complement has index %d in the target lattice, expected %d"
                % (cs.order, self.points_per_fiber))

    def _window_bbox(self, basis_rows):
        """Exact bounds of the window in the given transversal coordinates."""
        lo = [None] * len(basis_rows)
        hi = [None] * len(basis_rows)
        for piece in self.window.pieces:
            base = linalg.solve_coords(basis_rows, piece.offset)
            gens = [linalg.solve_coords(basis_rows, v) for v in piece.vectors]
            for mask in range(1 << len(gens)):
                pt = list(base)
                for j, g in enumerate(gens):
                    if mask >> j & 1:
                        pt = [a + b for a, b in zip(pt, g)]
                for j, x in enumerate(pt):
                    if lo[j] is None or x < lo[j]:
                        lo[j] = x
                    if hi[j] is None or x > hi[j]:
                        hi[j] = x
        return tuple(lo), tuple(hi)

    def _check_fundamental_domain(self, samples, seed):
        scheme = self.scheme
        sub_ambient = [scheme.lift(tuple(int(x) for x in r))
                       for r in self.fiber_sublattice]
        sub_internal = linalg.mat(
            [scheme.project(v, "internal") for v in sub_ambient])

        # volume: window pieces, in sublattice coordinates, must fill one cell
        total = Fraction(0)
        for piece in self.window.pieces:
            rows = [linalg.solve_coords(sub_internal, v) for v in piece.vectors]
            dv = linalg.det(linalg.mat(rows))
            if scalar_sign(dv) < 0:
                dv = -dv
            total = total + dv
        if scalar_sign(total - 1) != 0:
            raise NotFundamentalDomainError(
                "window covers %s of a sublattice cell, expected exactly 1" % (total,))

        # tiling: random points of one cell must have exactly one translate
        # inside the window
        lo, hi = self._window_bbox(sub_internal)
        k = len(sub_internal)
        rng = random.Random(seed)
        den = 2 ** 32
        for _ in range(samples):
            t = [Fraction(rng.randrange(den), den) for _ in range(k)]
            hits = 0
            ranges = []
            for a in range(k):
                lo_a = exact_ceil(t[a] - hi[a])
                hi_a = exact_floor(t[a] - lo[a])
                ranges.append(range(lo_a, hi_a + 1))
            for shift in _product(ranges):
                diff = [t[a] - shift[a] for a in range(k)]
                point = linalg.mat_vec(sub_internal, tuple(diff))
                if _membership_exact(self._prepared, point,
                                     scheme.internal_coords(point)) is not None:
                    hits += 1
            if hits != 1:
                raise NotFundamentalDomainError(
                    "tiling test failed: sample %s has %d window translates"
                    % (t, hits))

    # -- per-point machinery -------------------------------------------

    def split_coords(self, m):
        """Integer (complement coeffs, fiber coeffs) of a lattice vector."""
        c = linalg.mat_vec(self._split_inv, tuple(int(x) for x in m))
        d = self.complement_lattice.shape[0]
        return c[:d], c[d:]

    def accept_coords(self, m):
        return _membership_exact(
            self._prepared, tuple(m),
            self.scheme.lattice_internal_coords(tuple(int(x) for x in m)))

    def fiber_ordinal_of(self, fiber_coeffs):
        return coset_rank(self.coset, coset_label(self.coset, fiber_coeffs))

    def fiber_base_coords(self, comp_coeffs):
        base = np.array([int(x) for x in comp_coeffs], dtype=object) @ self.complement_lattice
        return tuple(int(x) for x in base)

    def map_coords(self, m, ordinal_map=None):
        comp, fib = self.split_coords(m)
        j = self.fiber_ordinal_of(fib)
        if ordinal_map is not None:
            j = _apply_ordinal_map(ordinal_map, comp, j)
        image = tuple(Fraction(0) for _ in range(self.scheme.dim))
        for c, g in zip(comp, self.projected_complement):
            if c:
                image = linalg.vadd(image, linalg.vscale(c, g))
        if j:
            image = linalg.vadd(
                image,
                linalg.vscale(Fraction(j, self.points_per_fiber),
                              self.projected_complement[0]))
        return image, comp, j

    def map_splits(self, m, ordinal_map=None):
        """Image of map_coords in physical split coordinates (cheaper)."""
        comp, fib = self.split_coords(m)
        j = self.fiber_ordinal_of(fib)
        if ordinal_map is not None:
            j = _apply_ordinal_map(ordinal_map, comp, j)
        image = tuple(Fraction(0) for _ in range(self.scheme.k_p))
        for c, g in zip(comp, self._projected_splits):
            if c:
                image = linalg.vadd(image, linalg.vscale(c, g))
        if j:
            image = linalg.vadd(
                image,
                linalg.vscale(Fraction(j, self.points_per_fiber),
                              self._projected_splits[0]))
        return image

    def expected_fiber(self, comp_coeffs):
        """All lattice points of one fiber, ordered by coset ordinal.

        Enumerates candidate fiber-lattice shifts from the window's exact
        bounding box in transversal coordinates and keeps the accepted ones.
        """
        key = tuple(int(x) for x in comp_coeffs)
        hit = self._fiber_cache.get(key)
        if hit is not None:
            return hit
        scheme = self.scheme
        base = self.fiber_base_coords(comp_coeffs)
        base_splits = scheme.lattice_internal_coords(base)
        shift = linalg.mat_vec(self._fiber_splits_inv, base_splits)
        lo, hi = self._domain_bbox
        k = len(shift)
        ranges = []
        for a in range(k):
            lo_a = exact_ceil(lo[a] - shift[a])
            hi_a = exact_floor(hi[a] - shift[a])
            ranges.append(range(lo_a, hi_a + 1))
        found = []
        for cand in _product(ranges):
            splits = base_splits
            for c, row in zip(cand, self._fiber_splits):
                if c:
                    splits = linalg.vadd(splits, linalg.vscale(c, row))
            delta = np.array(list(cand), dtype=object) @ self.fiber_lattice
            gamma = tuple(int(b + x) for b, x in zip(base, delta))
            if _membership_exact(self._prepared, gamma, splits) is not None:
                found.append((self.fiber_ordinal_of(cand), gamma))
        found.sort()
        result = tuple(found)
        self._fiber_cache[key] = result
        return result


def _apply_ordinal_map(ordinal_map, comp, j):
    """Reassign a within-fiber ordinal.

    A callable receives (complement coefficients, ordinal) and may permute
    each fiber independently; anything else is indexed by the ordinal and
    permutes every fiber the same way.
    """
    if callable(ordinal_map):
        return ordinal_map(tuple(int(x) for x in comp), j)
    return ordinal_map[j]


def _as_int(x) -> int:
    if hasattr(x, "is_rational"):
        if not x.is_rational():
            raise CutProjectError("expected an integer coordinate, got %s" % (x,))
        x = x.as_fraction()
    f = Fraction(x)
    if f.denominator != 1:
        raise CutProjectError("expected an integer coordinate, got %s" % (x,))
    return f.numerator


def _product(ranges):
    return itertools.product(*ranges)


def build_setup(scheme, transversal, fiber_sublattice=None, complement_basis=None,
                *, tiling_samples=128, seed=20260822) -> BijectionSetup:
    """Validate and assemble the bijection data for a windowed scheme."""
    return BijectionSetup(scheme, transversal, fiber_sublattice, complement_basis,
                          tiling_samples=tiling_samples, seed=seed)


@dataclass(frozen=True)
class FiberRecord:
    """One complement-fiber of a patch: its points in ordinal order."""

    comp_coeffs: tuple
    base_coords: tuple
    points: tuple
    ordinals: tuple
    images: tuple
    expected: tuple
    complete: bool


def fibers(setup: BijectionSetup, patch):
    """Group a patch by complement-fiber, with completeness classification.

    A fiber is complete when every one of its accepted lattice points lies
    inside the patch region; only those are promised exactly N points.
    """
    _check_same_scheme(setup, patch)
    groups = {}
    for p in patch.points:
        comp, fib = setup.split_coords(p.gamma)
        groups.setdefault(comp, []).append((setup.fiber_ordinal_of(fib), p))
    records = []
    for comp in sorted(groups):
        members = sorted(groups[comp], key=lambda t: t[0])
        expected = setup.expected_fiber(comp)
        complete = all(
            region_contains(setup.scheme, patch.region, gamma)
            for _, gamma in expected)
        images = tuple(setup.map_coords(p.gamma)[0] for _, p in members)
        records.append(FiberRecord(
            comp_coeffs=tuple(int(x) for x in comp),
            base_coords=setup.fiber_base_coords(comp),
            points=tuple(p for _, p in members),
            ordinals=tuple(j for j, _ in members),
            images=images,
            expected=expected,
            complete=complete,
        ))
    return records


def _check_same_scheme(setup: BijectionSetup, patch):
    if patch.scheme is not setup.scheme or patch.window is not setup.window:
        raise ValueError("patch was generated for a different scheme or window")


def fiber_ordinal(setup: BijectionSetup, point):
    """(complement coefficients, ordinal) of an accepted point."""
    m = point.gamma if hasattr(point, "gamma") else tuple(point)
    comp, fib = setup.split_coords(m)
    return comp, setup.fiber_ordinal_of(fib)


def map_point(setup: BijectionSetup, point, ordinal_map=None):
    """Image of an accepted point in the target lattice (ambient vector)."""
    m = point.gamma if hasattr(point, "gamma") else tuple(point)
    if setup.accept_coords(m) is None:
        raise ValueError("point %s is not accepted by the window" % (m,))
    image, _, _ = setup.map_coords(m, ordinal_map)
    return image


def displacement_bound(setup: BijectionSetup) -> DisplacementBound:
    """Exact two-term bound on how far the bijection moves any point."""
    n = setup.points_per_fiber
    first = setup.projected_complement[0]
    frac = Fraction(n - 1, n)
    step_sq = frac * frac * linalg.vnormsq(first)

    vertices = []
    for piece in setup.window.pieces:
        gens = piece.vectors
        for mask in range(1 << len(gens)):
            v = piece.offset
            for j, g in enumerate(gens):
                if mask >> j & 1:
                    v = linalg.vadd(v, g)
            vertices.append(v)
    lifts = []
    for v in vertices:
        c = linalg.solve_coords(setup._fiber_internal, v)
        lifts.append(linalg.mat_vec(linalg.mat(setup.transversal), c))
    pair_sq = Fraction(0)
    for v in vertices:
        for z in lifts:
            q = linalg.vnormsq(linalg.vsub(v, z))
            if scalar_sign(q - pair_sq) > 0:
                pair_sq = q
    return DisplacementBound(step_sq, pair_sq)


@dataclass
class VerificationReport:
    """Empirical checks of one patch against the setup's guarantees."""

    n_points: int
    n_fibers: int
    n_complete: int
    n_boundary_points: int
    fiber_counts_ok: bool
    injective: bool
    core_surjective: bool
    observed_max_sq: object
    bound: DisplacementBound
    within_bound: bool
    designated_generator: int = 0
    ordering: str = "coset-ordinal"
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.fiber_counts_ok and self.injective
                and self.core_surjective and self.within_bound)

    def observed_max(self, bits: int = 64) -> float:
        with mpmath.workprec(bits):
            return float(mpmath.sqrt(to_mpf(self.observed_max_sq, bits)))


def verify_patch(setup: BijectionSetup, patch, ordinal_map=None) -> VerificationReport:
    """Run every empirical bijection check over one patch.

    ordinal_map optionally permutes the within-fiber ordinals before mapping;
    the displacement bound must hold for any such permutation.
    """
    _check_same_scheme(setup, patch)
    n = setup.points_per_fiber
    records = fibers(setup, patch)
    failures = []

    fiber_counts_ok = True
    n_complete = 0
    n_boundary_points = 0
    for rec in records:
        if rec.complete:
            n_complete += 1
            if len(rec.points) != n or len(rec.expected) != n:
                fiber_counts_ok = False
                failures.append(
                    "fiber %s: %d points in patch, %d accepted, expected %d"
                    % (rec.comp_coeffs, len(rec.points), len(rec.expected), n))
            elif list(rec.ordinals) != list(range(n)):
                fiber_counts_ok = False
                failures.append(
                    "fiber %s: ordinals %s" % (rec.comp_coeffs, rec.ordinals))
        else:
            n_boundary_points += len(rec.points)
            if len(rec.points) > n:
                fiber_counts_ok = False
                failures.append(
                    "boundary fiber %s exceeds %d points" % (rec.comp_coeffs, n))

    # displacements in physical split coordinates: same exact values,
    # smaller numbers than the ambient vectors
    gram = setup.scheme.physical_gram()
    images = []
    observed_max_sq = Fraction(0)
    for p in patch.points:
        image = setup.map_splits(p.gamma, ordinal_map)
        images.append(image)
        dlt = linalg.vsub(image, setup.scheme.lattice_physical_coords(p.gamma))
        q = linalg.vdot(linalg.mat_vec(gram, dlt), dlt)
        if scalar_sign(q - observed_max_sq) > 0:
            observed_max_sq = q

    injective = True
    ordered = sorted(images)
    for a, b in zip(ordered, ordered[1:]):
        if a == b:
            injective = False
            failures.append("duplicate image %s" % (a,))
            break

    core_surjective = True
    seen = {tuple(p.gamma) for p in patch.points}
    complete_known = {rec.comp_coeffs: rec.complete for rec in records}
    candidates = set()
    d = setup.complement_lattice.shape[0]
    for rec in records:
        candidates.add(rec.comp_coeffs)
        for i in range(d):
            for s in (-1, 1):
                nb = list(rec.comp_coeffs)
                nb[i] += s
                candidates.add(tuple(nb))
    for comp in sorted(candidates):
        expected = setup.expected_fiber(comp)
        if not expected:
            continue
        complete = complete_known.get(comp)
        if complete is None:
            complete = all(region_contains(setup.scheme, patch.region, g)
                           for _, g in expected)
        if not complete:
            continue
        if len(expected) != n:
            core_surjective = False
            failures.append(
                "complete fiber %s has %d accepted points, expected %d"
                % (comp, len(expected), n))
            continue
        for _, gamma in expected:
            if gamma not in seen:
                core_surjective = False
                failures.append(
                    "core fiber %s: point %s missing from patch" % (comp, gamma))

    bound = displacement_bound(setup)
    within = bound.covers_sq(observed_max_sq)
    if not within:
        failures.append("observed displacement exceeds the bound")

    return VerificationReport(
        n_points=len(patch.points),
        n_fibers=len(records),
        n_complete=n_complete,
        n_boundary_points=n_boundary_points,
        fiber_counts_ok=fiber_counts_ok,
        injective=injective,
        core_surjective=core_surjective,
        observed_max_sq=observed_max_sq,
        bound=bound,
        within_bound=within,
        failures=failures,
    )


def bijection_pairs(setup: BijectionSetup, patch):
    """(point, image, squared displacement) triples for export."""
    out = []
    for p in patch.points:
        image, _, _ = setup.map_coords(p.gamma)
        out.append((p, image, linalg.vnormsq(linalg.vsub(image, p.y))))
    return out
