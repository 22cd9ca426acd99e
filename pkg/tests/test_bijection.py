"""Bijection setup, fiber, and displacement tests on the golden-ratio line scheme.

The scheme projects Z^2 onto the line of slope 1/PHI; the transversal is the
diagonal, whose lattice meets Z^2 in multiples of (1,1).  Window = internal
image of one diagonal cell (times N for sublattice variants), shifted
generically.
"""

import random
from fractions import Fraction

import pytest

from cutproject.bijection import (
    DisplacementBound,
    bijection_pairs,
    build_setup,
    displacement_bound,
    fiber_ordinal,
    fibers,
    map_point,
    verify_patch,
)
from cutproject.errors import (
    DegenerateDecompositionError,
    NoComplementError,
    NotFundamentalDomainError,
)
from cutproject import linalg
from cutproject.scalars import golden_ratio, scalar_sign
from cutproject.scheme import (
    GammaBox,
    PhysicalBall,
    Scheme,
    Window,
    WindowPiece,
    generate_patch,
)

PHI = golden_ratio()
SHIFT = Fraction(1, 7)


def line_scheme():
    return Scheme([(PHI, 1)], [(-1, PHI)])


def cell_length(scheme):
    return scheme.internal_coords((1, 1))[0]


def interval_window(scheme, lo, length):
    u = scheme.internal[0]
    return Window([WindowPiece([linalg.vscale(length, u)], linalg.vscale(lo, u))])


def make_setup(n_index=1, shift=SHIFT):
    scheme = line_scheme()
    c = cell_length(scheme)
    windowed = scheme.with_window(interval_window(scheme, shift, n_index * c))
    sub = [(n_index, n_index)] if n_index != 1 else None
    return build_setup(windowed, [(1, 1)], sub, [(0, 1)])


def test_build_basic_fields():
    setup = make_setup()
    assert setup.points_per_fiber == 1
    assert setup.fiber_lattice.tolist() == [[1, 1]]
    assert setup.complement_lattice.tolist() == [[0, 1]]
    # oblique image of (0,1) along the diagonal, frozen value
    assert setup.projected_complement[0] == (-(PHI * PHI), -PHI)
    assert setup.target_basis == setup.projected_complement


def test_transversal_must_avoid_physical():
    scheme = Scheme([(1, 0)], [(0, 1)])
    windowed = scheme.with_window(interval_window(scheme, Fraction(0), Fraction(1)))
    with pytest.raises(DegenerateDecompositionError):
        build_setup(windowed, [(1, 0)])


def test_sublattice_must_be_inside():
    scheme = line_scheme()
    c = cell_length(scheme)
    windowed = scheme.with_window(interval_window(scheme, SHIFT, c))
    with pytest.raises(ValueError):
        build_setup(windowed, [(1, 1)], [(1, 0)], [(0, 1)])


def test_complement_must_split():
    scheme = line_scheme()
    c = cell_length(scheme)
    windowed = scheme.with_window(interval_window(scheme, SHIFT, c))
    with pytest.raises(NoComplementError):
        build_setup(windowed, [(1, 1)], None, [(2, 0)])
    with pytest.raises(NoComplementError):
        build_setup(windowed, [(1, 1)], None, [(1, 1)])


def test_window_volume_checked():
    # The projected unit square is PHI^3 times too long for the diagonal cell.
    scheme = line_scheme()
    b1 = scheme.internal_coords((1, 0))[0]
    b2 = scheme.internal_coords((0, 1))[0]
    windowed = scheme.with_window(interval_window(scheme, b1, b2 - b1))
    with pytest.raises(NotFundamentalDomainError):
        build_setup(windowed, [(1, 1)], None, [(0, 1)])


def test_window_tiling_checked():
    # Two overlapping half-cells have the right total volume but double-cover.
    scheme = line_scheme()
    c = cell_length(scheme)
    u = scheme.internal[0]
    half = linalg.vscale(c / 2, u)
    pieces = [
        WindowPiece([half], linalg.vscale(SHIFT, u)),
        WindowPiece([half], linalg.vscale(SHIFT + c / 4, u)),
    ]
    windowed = scheme.with_window(Window(pieces))
    with pytest.raises(NotFundamentalDomainError) as err:
        build_setup(windowed, [(1, 1)], None, [(0, 1)])
    assert "tiling" in str(err.value)


def test_fibers_single_point_each():
    setup = make_setup()
    patch = generate_patch(setup.scheme, GammaBox([(0, 45), (0, 45)]))
    assert len(patch.points) > 10
    records = fibers(setup, patch)
    assert sum(len(r.points) for r in records) == len(patch.points)
    complete = [r for r in records if r.complete]
    assert complete
    for rec in complete:
        assert len(rec.points) == 1
        assert rec.ordinals == (0,)
        assert rec.expected == tuple(
            (0, tuple(p.gamma)) for p in rec.points)


def test_fibers_doubled_sublattice():
    setup = make_setup(n_index=2)
    patch = generate_patch(setup.scheme, GammaBox([(0, 30), (0, 30)]))
    records = fibers(setup, patch)
    complete = [r for r in records if r.complete]
    assert complete
    for rec in complete:
        assert len(rec.points) == 2
        assert rec.ordinals == (0, 1)
    report = verify_patch(setup, patch)
    assert report.fiber_counts_ok
    assert report.ok


def test_map_is_complement_projection_when_trivial():
    setup = make_setup()
    patch = generate_patch(setup.scheme, GammaBox([(0, 15), (0, 15)]))
    gen = setup.projected_complement[0]
    comps = []
    for p in patch.points:
        comp, j = fiber_ordinal(setup, p)
        assert j == 0
        assert map_point(setup, p) == linalg.vscale(comp[0], gen)
        comps.append(comp[0])
    # complete fibers form a run of consecutive complement coefficients
    records = [r for r in fibers(setup, patch) if r.complete]
    core = sorted(r.comp_coeffs[0] for r in records)
    assert core == list(range(core[0], core[0] + len(core)))


def test_map_halfstep_refinement():
    setup = make_setup(n_index=2)
    patch = generate_patch(setup.scheme, GammaBox([(0, 25), (0, 25)]))
    gen = setup.projected_complement[0]
    seen_parity = set()
    ts = set()
    for p in patch.points:
        image = map_point(setup, p)
        t = image[0] / gen[0]
        two_t = 2 * t
        assert scalar_sign(two_t - round(float(two_t))) == 0
        k = round(float(two_t))
        seen_parity.add(k % 2)
        ts.add(k)
    assert seen_parity == {0, 1}
    assert len(ts) == len(patch.points)


def test_verify_patch_box():
    setup = make_setup()
    patch = generate_patch(setup.scheme, GammaBox([(0, 25), (0, 25)]))
    report = verify_patch(setup, patch)
    assert report.ok
    assert report.n_points == len(patch.points)
    assert report.n_complete > 0
    assert report.within_bound
    assert not report.failures
    assert report.observed_max() <= float(report.bound) + 1e-12


def test_verify_patch_ball():
    setup = make_setup()
    patch = generate_patch(setup.scheme, PhysicalBall(15))
    assert len(patch.points) > 5
    report = verify_patch(setup, patch)
    assert report.ok


def test_permutation_robustness():
    setup = make_setup(n_index=4)
    patch = generate_patch(setup.scheme, GammaBox([(0, 40), (0, 40)]))
    base = verify_patch(setup, patch)
    assert base.ok
    rng = random.Random(5)
    for _ in range(4):
        perm = list(range(4))
        rng.shuffle(perm)
        report = verify_patch(setup, patch, ordinal_map=tuple(perm))
        assert report.injective
        assert report.within_bound


def test_bound_arithmetic_exact():
    b = DisplacementBound(Fraction(1), Fraction(1))
    assert b.covers_sq(Fraction(4))
    assert not b.covers_sq(Fraction(41, 10))
    b2 = DisplacementBound(Fraction(2), Fraction(8))
    assert b2.covers_sq(Fraction(18))
    assert not b2.covers_sq(Fraction(181, 10))
    assert abs(b2.value() - 18 ** 0.5) < 1e-12


def test_bound_terms():
    setup1 = make_setup()
    b1 = displacement_bound(setup1)
    assert b1.step_sq == 0
    assert scalar_sign(b1.pair_sq) > 0
    setup2 = make_setup(n_index=2)
    b2 = displacement_bound(setup2)
    # fractional step is half the projected generator
    gen_sq = linalg.vnormsq(setup2.projected_complement[0])
    assert b2.step_sq == Fraction(1, 4) * gen_sq


def test_map_point_requires_acceptance():
    setup = make_setup()
    with pytest.raises(ValueError):
        map_point(setup, (40, 0))


def test_patch_scheme_guard():
    setup = make_setup()
    other = make_setup(shift=Fraction(1, 9))
    patch = generate_patch(other.scheme, GammaBox([(0, 10), (0, 10)]))
    with pytest.raises(ValueError):
        fibers(setup, patch)


def test_pairs_export_shape():
    setup = make_setup()
    patch = generate_patch(setup.scheme, GammaBox([(0, 10), (0, 10)]))
    pairs = bijection_pairs(setup, patch)
    assert len(pairs) == len(patch.points)
    for point, image, disp_sq in pairs:
        assert len(image) == 2
        assert scalar_sign(disp_sq) >= 0
        assert displacement_bound(setup).covers_sq(disp_sq)
