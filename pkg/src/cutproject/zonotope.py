"""Half-open parallelotope decompositions of zonotopes.

A zonotope spanned by ``m`` generators in ``k`` dimensions splits into one
half-open parallelotope per independent ``k``-subset of the generators.  The
translate of each parallelotope comes from a generic lifting of the
generators (a regular subdivision of the zonotope), and the choice of which
facets each piece keeps comes from a generic inward direction.  Both choices
are made deterministically below, but neither is trusted on its own:
``validate_decomposition`` certifies the result by exact pairwise
disjointness checks and a random rational cover test.

All arithmetic is exact.  Generators live in plain coordinate space (tuples
of int / Fraction / Surd); mapping pieces into an ambient subspace is the
caller's job, with ``as_window_pieces`` as a convenience.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import DecompositionError, RankDeficientError
from .linalg import det, inverse, mat, mat_vec, rank, vadd, vdot, vsub
from .scalars import scalar_sign

__all__ = [
    "ZonotopePiece",
    "Decomposition",
    "half_open_decomposition",
    "validate_decomposition",
    "zonotope_volume",
    "piece_coords",
    "piece_contains",
    "as_window_pieces",
]

# Deterministic sources of "generic" rational data.  Lifting vectors are
# geometric progressions in a prime; inward directions get a small generic
# perturbation when the plain generator sum is not generic.
_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)
_PERTURB_SCALES = (2 ** 16, 2 ** 24, 2 ** 32)


@dataclass(frozen=True)
class ZonotopePiece:
    """One half-open parallelotope of a decomposition.

    ``vectors`` spans the piece over coefficients in [0, 1); entries are the
    subset generators up to sign, with ``flipped[i]`` recording a negation.
    ``volume`` is the absolute determinant of the subset generators.
    """

    subset: tuple
    vectors: tuple
    offset: tuple
    flipped: tuple
    volume: object

    def __post_init__(self):
        if len(self.vectors) != len(self.subset) or len(self.flipped) != len(self.subset):
            raise ValueError("inconsistent piece data")


@dataclass(frozen=True)
class Decomposition:
    generators: tuple
    pieces: tuple
    lifting: tuple
    inward: tuple

    @property
    def volume(self):
        total = Fraction(0)
        for piece in self.pieces:
            total = total + piece.volume
        return total


def _abs_scalar(x):
    return -x if scalar_sign(x) < 0 else x


def zonotope_volume(generators):
    """Total volume of the zonotope: sum of |det| over independent subsets."""
    gens = mat(generators)
    k = len(gens[0])
    total = Fraction(0)
    for subset in itertools.combinations(range(len(gens)), k):
        d = det(mat([gens[i] for i in subset]))
        if scalar_sign(d) != 0:
            total = total + _abs_scalar(d)
    return total


def piece_coords(piece, point):
    """Coordinates of ``point`` in the piece frame (origin at its offset)."""
    vinv = inverse(mat(piece.vectors))
    return mat_vec(vinv, vsub(point, piece.offset))


def piece_contains(piece, point):
    """Half-open membership: every piece coordinate in [0, 1)."""
    for c in piece_coords(piece, point):
        if scalar_sign(c) < 0 or scalar_sign(c - 1) >= 0:
            return False
    return True


def _generic_lifting(gens, subsets):
    """First prime power lifting with no subset coplanarity.

    Returns (lifting, coeffs) where coeffs[(subset, j)] expresses generator j
    in the subset basis.  A lifting is generic when for every independent
    subset S and every j outside S the lifted point of generator j avoids the
    lifted hyperplane of S exactly.
    """
    m = len(gens)
    coeffs = {}
    for subset, basis, _ in subsets:
        for j in range(m):
            if j in subset:
                continue
            coeffs[(subset, j)] = _solve_in_basis(basis, gens[j])
    for p in _PRIMES:
        lam = tuple(Fraction(p) ** (i + 1) for i in range(m))
        ok = True
        margins = {}
        for (subset, j), c in coeffs.items():
            d = lam[j]
            for pos, i in enumerate(subset):
                d = d - c[pos] * lam[i]
            s = scalar_sign(d)
            if s == 0:
                ok = False
                break
            margins[(subset, j)] = s
        if ok:
            return lam, margins
    raise DecompositionError("no generic lifting among the candidate primes")


def _solve_in_basis(basis, target):
    vinv = inverse(mat(basis))
    return mat_vec(vinv, target)


def _inward_candidates(gens, k):
    base = gens[0]
    for g in gens[1:]:
        base = vadd(base, g)
    yield base
    for scale in _PERTURB_SCALES:
        for p in _PRIMES:
            bump = tuple(Fraction(p ** (i + 1), scale) for i in range(k))
            yield vadd(base, bump)


def _facet_signs(subsets, w):
    """Sign of each facet functional against the inward direction.

    Returns None when any sign vanishes (w lies in a facet plane, so the
    half-opening would be ambiguous).
    """
    signs = {}
    for subset, basis, _ in subsets:
        binv = inverse(mat(basis))
        k = len(basis)
        for i in range(k):
            normal = tuple(binv[r][i] for r in range(k))
            s = scalar_sign(vdot(normal, w))
            if s == 0:
                return None
            signs[(subset, i)] = s
    return signs


def half_open_decomposition(generators, *, check_samples=512, seed=20260822):
    """Decompose the zonotope of ``generators`` into half-open pieces.

    The pieces are indexed by independent k-subsets in lexicographic order.
    A small internal disjoint-cover check runs before returning; callers
    wanting the full certificate run ``validate_decomposition`` themselves.
    """
    gens = mat(generators)
    m = len(gens)
    k = len(gens[0])
    if rank(gens) != k:
        raise RankDeficientError("zonotope generators do not span their space")

    subsets = []
    for subset in itertools.combinations(range(m), k):
        basis = tuple(gens[i] for i in subset)
        d = det(mat(basis))
        if scalar_sign(d) != 0:
            subsets.append((subset, basis, _abs_scalar(d)))
    lam, lift_signs = _generic_lifting(gens, subsets)

    last_error = None
    for w in _inward_candidates(gens, k):
        signs = _facet_signs(subsets, w)
        if signs is None:
            continue
        pieces = []
        for subset, basis, vol in subsets:
            offset = tuple(Fraction(0) for _ in range(k))
            for j in range(m):
                if j not in subset and lift_signs[(subset, j)] < 0:
                    offset = vadd(offset, gens[j])
            vectors = []
            flipped = []
            for i, g in enumerate(basis):
                if signs[(subset, i)] < 0:
                    vectors.append(tuple(-x for x in g))
                    flipped.append(True)
                    offset = vadd(offset, g)
                else:
                    vectors.append(g)
                    flipped.append(False)
            pieces.append(ZonotopePiece(subset, tuple(vectors), offset,
                                        tuple(flipped), vol))
        decomp = Decomposition(tuple(gens), tuple(pieces), lam, tuple(w))
        try:
            validate_decomposition(decomp, samples=check_samples, seed=seed)
        except DecompositionError as exc:
            last_error = exc
            continue
        return decomp
    raise DecompositionError(
        "no inward direction produced a valid half-opening: %s" % last_error)


def _projection_interval(piece, axis):
    lo = hi = vdot(piece.offset, axis)
    for v in piece.vectors:
        s = vdot(v, axis)
        sign = scalar_sign(s)
        if sign > 0:
            hi = hi + s
        elif sign < 0:
            lo = lo + s
    return lo, hi


def _cross3(a, b):
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


def _separation_axes(pa, pb, k):
    if k == 1:
        yield (1,)
    elif k == 2:
        for v in pa.vectors + pb.vectors:
            yield (-v[1], v[0])
    elif k == 3:
        for va, vb in itertools.combinations(pa.vectors, 2):
            yield _cross3(va, vb)
        for va, vb in itertools.combinations(pb.vectors, 2):
            yield _cross3(va, vb)
        for va in pa.vectors:
            for vb in pb.vectors:
                yield _cross3(va, vb)
    else:
        raise DecompositionError("overlap tests implemented for dimension <= 3")


def _volume_overlap(pa, pb, k):
    """True when the closed pieces share positive volume.

    Separating-axis test: parallelotopes are separated (touching allowed)
    exactly when some face normal or edge cross product separates them.
    """
    for axis in _separation_axes(pa, pb, k):
        if all(scalar_sign(x) == 0 for x in axis):
            continue
        lo_a, hi_a = _projection_interval(pa, axis)
        lo_b, hi_b = _projection_interval(pb, axis)
        lo = lo_a if scalar_sign(lo_a - lo_b) > 0 else lo_b
        hi = hi_a if scalar_sign(hi_a - hi_b) < 0 else hi_b
        if scalar_sign(hi - lo) <= 0:
            return False
    return True


def validate_decomposition(decomp, *, samples=10000, seed=20260822):
    """Certify a decomposition; raises DecompositionError on any failure.

    Checks, all exact: the piece volumes sum to the zonotope volume, no two
    closed pieces share positive volume, and random rational points of the
    zonotope land in exactly one half-open piece.
    """
    gens = decomp.generators
    pieces = decomp.pieces
    m = len(gens)
    k = len(gens[0])

    total = zonotope_volume(gens)
    if scalar_sign(decomp.volume - total) != 0:
        raise DecompositionError("piece volumes sum to %s, zonotope volume is %s"
                                 % (decomp.volume, total))

    for a, b in itertools.combinations(range(len(pieces)), 2):
        if _volume_overlap(pieces[a], pieces[b], k):
            raise DecompositionError("pieces %d and %d overlap" % (a, b))

    inverses = [inverse(mat(p.vectors)) for p in pieces]
    rng = random.Random(seed)
    denominator = 2 ** 32
    for _ in range(samples):
        point = tuple(Fraction(0) for _ in range(k))
        for j in range(m):
            t = Fraction(rng.randrange(denominator), denominator)
            point = vadd(point, tuple(t * x for x in gens[j]))
        hits = 0
        for piece, vinv in zip(pieces, inverses):
            coords = mat_vec(vinv, vsub(point, piece.offset))
            inside = True
            for c in coords:
                if scalar_sign(c) < 0 or scalar_sign(c - 1) >= 0:
                    inside = False
                    break
            if inside:
                hits += 1
        if hits != 1:
            raise DecompositionError(
                "sample point %s lies in %d pieces" % (point, hits))
    return {"pieces": len(pieces), "volume": total, "samples": samples}


def as_window_pieces(decomp, internal_basis, shift=None):
    """Map coordinate-space pieces into ambient window pieces.

    ``internal_basis`` rows span the target subspace; a coordinate vector c
    maps to sum(c[i] * basis[i]).  ``shift`` is an optional ambient offset
    added to every piece (the usual generic window translate).
    """
    from .scheme import WindowPiece

    basis = mat(internal_basis)
    out = []
    for piece in decomp.pieces:
        vectors = [mat_vec(basis, v) for v in piece.vectors]
        offset = mat_vec(basis, piece.offset)
        if shift is not None:
            offset = vadd(offset, shift)
        out.append(WindowPiece(vectors, offset))
    return tuple(out)
