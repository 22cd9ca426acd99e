"""Scheme construction, projections, window membership, patch generation.

The enumeration oracle here is definitional brute force: iterate every
integer point of a box and filter by the membership test, then compare with
the elimination-based generator point for point.
"""

import itertools
import random
from fractions import Fraction

import pytest

from cutproject import linalg
from cutproject.errors import (
    BoundaryAmbiguousError,
    DegenerateDecompositionError,
    RegionError,
    SingularOffsetError,
)
from cutproject.scalars import Surd, golden_ratio, to_mpf
from cutproject.scheme import (
    FloatMode,
    GammaBox,
    PhysicalBall,
    Scheme,
    accept,
    generate_patch,
    parallelotope_window,
)

PHI = golden_ratio()


def fib_scheme(window=None):
    return Scheme([(PHI, 1)], [(-1, PHI)], window=window)


def fib_interval_window(shift=Fraction(0), require_nonsingular=False):
    """Window [b1+shift, b2+shift) where b1, b2 are the internal coordinates
    of the two unit vectors."""
    s = fib_scheme()
    b1 = s.internal_coords((1, 0))[0]
    b2 = s.internal_coords((0, 1))[0]
    vec = [(b2 - b1) * x for x in (-1, PHI)]
    off = [(b1 + shift) * x for x in (-1, PHI)]
    return parallelotope_window([vec], off, require_nonsingular=require_nonsingular)


def test_projection_decomposition_identity():
    s = fib_scheme()
    p = (1, 0)
    yp = s.project(p, "physical")
    yi = s.project(p, "internal")
    assert linalg.vadd(yp, yi) == p
    # idempotence on the physical image
    assert s.project(yp, "physical") == yp
    assert s.project(yp, "internal") == (0, 0)
    v = (PHI * 3, 3)
    assert s.project(v, "physical") == v


def test_oblique_projection_golden():
    s = fib_scheme()
    ob = s.oblique_projector([(1, 1)])
    img = ob.physical_part((0, 1))
    assert img == (-(PHI * PHI), -PHI)
    # remainder lies in Z and the parts recombine
    z = ob.z_part((0, 1))
    assert linalg.vadd(img, z) == (0, 1)
    assert z[0] == z[1]


def test_oblique_degenerate():
    s = Scheme([(1, 0)], [(0, 1)])
    with pytest.raises(DegenerateDecompositionError):
        s.oblique_projector([(1, 0)])


def test_scheme_rejects_non_complementary():
    with pytest.raises(DegenerateDecompositionError):
        Scheme([(1, 1)], [(2, 2)])


def test_accept_golden_points():
    w = fib_interval_window()
    s = fib_scheme(w)
    assert accept(s, (0, 0)) == 0
    assert accept(s, (1, 1)) == 0
    # far off the slab
    assert accept(s, (40, 0)) is None


def test_singular_offset_flag():
    # window starting exactly at the origin: the origin sits on its facet
    s = fib_scheme()
    b2 = s.internal_coords((0, 1))[0]
    vec = [b2 * x for x in (-1, PHI)]
    loose = parallelotope_window([vec], (0, 0))
    strict = parallelotope_window([vec], (0, 0), require_nonsingular=True)
    assert accept(s, (0, 0), window=loose) == 0
    with pytest.raises(SingularOffsetError):
        accept(s, (0, 0), window=strict)


def test_float_mode_boundary_refusal():
    s = fib_scheme()
    b2 = s.internal_coords((0, 1))[0]
    w = parallelotope_window([[b2 * x for x in (-1, PHI)]], (0, 0))
    with pytest.raises(BoundaryAmbiguousError):
        accept(s, (0, 0), window=w, mode=FloatMode(256))


def test_box_patch_matches_bruteforce_fibonacci():
    w = fib_interval_window()
    s = fib_scheme(w)
    box = GammaBox([(0, 5), (0, 5)])
    patch = generate_patch(s, box)
    expected = []
    for m in itertools.product(range(0, 6), range(0, 6)):
        piece = accept(s, m)
        if piece is not None:
            expected.append((m, piece))
    assert [(p.gamma, p.piece) for p in patch] == expected
    assert len(patch) > 0


def test_empty_region():
    w = fib_interval_window()
    s = fib_scheme(w)
    patch = generate_patch(s, GammaBox([(3, 2), (0, 5)]))
    assert len(patch) == 0
    with pytest.raises(RegionError):
        generate_patch(s, GammaBox([(0, 1)]))


def random_scheme(rng):
    """Random exact scheme in dimension 2..4 with a random parallelotope
    window, retrying until the bases are complementary."""
    n = rng.choice([2, 2, 3, 4])
    k_p = rng.randint(1, n - 1)
    k_i = n - k_p

    def entry():
        if rng.random() < 0.25:
            return Surd(Fraction(rng.randint(-2, 2)), Fraction(rng.randint(-1, 1)), 5)
        return Fraction(rng.randint(-3, 3))

    while True:
        phys = [[entry() for _ in range(n)] for _ in range(k_p)]
        internal = [[entry() for _ in range(n)] for _ in range(k_i)]
        try:
            scheme = Scheme(phys, internal)
        except DegenerateDecompositionError:
            continue
        break
    # window pieces spanned by rational multiples of the internal basis
    mix = [
        [
            Fraction(rng.randint(1, 2))
            if i == j
            else (Fraction(rng.randint(0, 1)) if j > i else Fraction(0))
            for j in range(k_i)
        ]
        for i in range(k_i)
    ]
    vecs = [linalg.mat_vec(scheme.internal, tuple(row)) for row in mix]
    off = linalg.mat_vec(
        scheme.internal,
        tuple(Fraction(rng.randint(-3, 3), rng.choice([2, 3, 5])) for _ in range(k_i)),
    )
    window = parallelotope_window(vecs, off)
    return scheme.with_window(window)


def test_box_patch_matches_bruteforce_random():
    rng = random.Random(2024)
    for _ in range(12):
        s = random_scheme(rng)
        n = s.dim
        lo = rng.randint(-4, 0)
        side = rng.randint(2, 5 if n >= 4 else 7)
        box = GammaBox([(lo, lo + side)] * n)
        patch = generate_patch(s, box)
        expected = []
        for m in itertools.product(*[range(lo, lo + side + 1)] * n):
            piece = accept(s, m)
            if piece is not None:
                expected.append((m, piece))
        assert [(p.gamma, p.piece) for p in patch] == expected


def test_ball_patch_matches_bruteforce():
    w = fib_interval_window()
    s = fib_scheme(w)
    r = 10
    patch = generate_patch(s, PhysicalBall(r))
    gram = s.physical_gram()

    def in_ball(m):
        a = s.lattice_physical_coords(m)
        q = linalg.vdot(linalg.mat_vec(gram, a), a)
        return not q > r * r

    expected = []
    for m in itertools.product(range(-30, 31), range(-30, 31)):
        if accept(s, m) is not None and in_ball(m):
            expected.append(m)
    assert [p.gamma for p in patch] == expected
    assert len(patch) > 0


def test_multiset_semantics_rational_slope():
    # physical direction (1,1): the two unit vectors share one physical image
    s = Scheme([(1, 1)], [(1, -1)])
    w = parallelotope_window([[2, -2]], [-1, 1])
    s = s.with_window(w)
    patch = generate_patch(s, GammaBox([(0, 3), (0, 3)]))
    gammas = [p.gamma for p in patch]
    ys = [p.y for p in patch]
    assert len(set(gammas)) == len(gammas)
    assert len(set(ys)) < len(ys)


def test_exact_vs_float_patches_agree():
    w = fib_interval_window(shift=Fraction(-1, 7))
    s = fib_scheme(w)
    box = GammaBox([(-30, 30), (-30, 30)])
    exact_patch = generate_patch(s, box)
    float_patch = generate_patch(s, box, mode=FloatMode(256))
    assert [(p.gamma, p.piece) for p in exact_patch] == [(p.gamma, p.piece) for p in float_patch]
    assert float_patch.min_margin is not None
    assert float_patch.min_margin > 1e-40
    assert len(exact_patch) > 20


def test_patch_order_lexicographic():
    w = fib_interval_window()
    s = fib_scheme(w)
    patch = generate_patch(s, GammaBox([(-6, 6), (-6, 6)]))
    gammas = [p.gamma for p in patch]
    assert gammas == sorted(gammas)


def test_lifted_point_projections_reconstruct():
    w = fib_interval_window()
    s = fib_scheme(w)
    patch = generate_patch(s, GammaBox([(-5, 5), (-5, 5)]))
    for p in patch:
        assert linalg.vadd(p.y, p.w) == s.lift(p.gamma)


def test_density_against_window_volume():
    # long 1-d physical ball; count/(2R) approaches the internal length of
    # the window divided by the lattice covolume (orthogonal splitting)
    w = fib_interval_window()
    s = fib_scheme(w)
    r = 10**4
    patch = generate_patch(s, PhysicalBall(r))
    length_sq = linalg.vnormsq(w.pieces[0].vectors[0])
    length = float(to_mpf(length_sq, 64)) ** 0.5
    density = len(patch) / (2 * r)
    assert abs(density - length) / length < 0.02
