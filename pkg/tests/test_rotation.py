"""Rotation counting, discrepancy curves, and the suspended-scheme bound."""

import itertools
from fractions import Fraction

import pytest

from cutproject import linalg
from cutproject.bijection import displacement_bound, verify_patch
from cutproject.errors import (
    CutProjectError,
    PrecisionExhaustedError,
    RankDeficientError,
)
from cutproject.rotation import (
    _hits_range,
    bound_sweep,
    discrepancy_bound,
    discrepancy_curve,
    hit_count,
    interval_certificate,
    lattice_drift,
    offset_grid,
    return_times,
    rotation_instance,
    suspension,
    suspension_box,
    time_displacement_bound,
    with_offset,
)
from cutproject.scalars import Surd, golden_ratio, scalar_sign, sqrt_int
from cutproject.scheme import generate_patch

ALPHA = golden_ratio() - 1
R2 = sqrt_int(2)


def golden(offset=None):
    return rotation_instance((ALPHA,), [((0,), -1)], offset)


def root2(offset=None):
    return rotation_instance((R2 - 1, 3 - 2 * R2), [((1, 0), 1), ((0, 1), 1)],
                             offset)


def slow_hits(inst, n, span=None):
    # independent route: scan a translate box wide enough to catch every
    # candidate, solve the spanning coordinates from scratch for each
    if span is None:
        span = abs(n) + 3
    total = 0
    for m in itertools.product(range(-span, span + 1), repeat=inst.dimension):
        y = [n * inst.alpha[i] + inst.offset[i] + m[i]
             for i in range(inst.dimension)]
        t = linalg.solve_coords(linalg.mat(inst.vectors), y)
        if all(scalar_sign(tj) >= 0 and scalar_sign(tj - 1) < 0 for tj in t):
            total += 1
    return total


def test_instance_fields():
    g = golden()
    assert g.dimension == 1
    assert g.volume == ALPHA
    assert g.gap == golden_ratio()
    assert g.lam == ((0, -1),)
    assert g.vectors == ((ALPHA,),)
    assert g.independent is True
    assert g.mode == "exact"

    r = root2()
    assert r.volume == R2 - 1
    assert r.vectors == ((2 - R2, 2 * R2 - 3), (1 - R2, 2 * R2 - 2))
    # 2*alpha_1 + alpha_2 == 1, so the coordinates are rationally dependent
    assert r.independent is False


def test_dependent_spanning_vectors_rejected():
    with pytest.raises(RankDeficientError):
        rotation_instance((R2 - 1, 3 - 2 * R2), [((1, 0), 1), ((2, 0), 2)])


def test_with_offset_keeps_rotation():
    g = with_offset(golden(), (Fraction(1, 7),))
    assert g.offset == (Fraction(1, 7),)
    assert g.alpha == golden().alpha
    assert g.volume == ALPHA


def test_hit_count_against_slow_scan():
    g = golden()
    for n in range(-25, 26):
        assert hit_count(g, n) == slow_hits(g, n)
    gx = golden((Fraction(2, 7),))
    for n in range(-12, 13):
        assert hit_count(gx, n) == slow_hits(gx, n)
    r = root2((Fraction(1, 7), Fraction(2, 7)))
    for n in range(-6, 7):
        assert hit_count(r, n) == slow_hits(r, n)


def test_golden_early_hits():
    g = golden()
    assert [hit_count(g, n) for n in range(10)] == [1, 0, 1, 0, 1, 1, 0, 1, 0, 1]


def test_exact_discrepancy_values():
    c = discrepancy_curve(golden(), 10)
    assert c.d_exact(1) == 1 - ALPHA
    assert c.d_exact(10) == 6 - 10 * ALPHA
    at, top = c.max_abs()
    assert at == 9
    assert top == pytest.approx(float(9 * ALPHA - 5), abs=1e-12)


def test_unit_cell_has_zero_discrepancy():
    flat = rotation_instance((ALPHA,), [((1,), 0)])
    assert flat.volume == 1
    c = discrepancy_curve(flat, 40)
    assert all(h == 1 for h in c.hits)
    square = rotation_instance((R2 - 1, 3 - 2 * R2),
                               [((1, 0), 0), ((0, 1), 0)],
                               (Fraction(1, 7), Fraction(2, 7)))
    assert square.volume == 1
    c2 = discrepancy_curve(square, 30)
    assert all(h == 1 for h in c2.hits)


def test_vector_engine_matches_scalar():
    g = golden((Fraction(1, 7),))
    fast, engine = _hits_range(g, -50, 80)
    assert engine == "vector"
    assert list(fast) == [hit_count(g, n) for n in range(-50, 80)]

    r = root2((Fraction(1, 7), Fraction(2, 7)))
    fast2, engine2 = _hits_range(r, -20, 40)
    assert engine2 == "vector"
    assert list(fast2) == [hit_count(r, n) for n in range(-20, 40)]


def test_negative_orientation_window():
    g = rotation_instance((ALPHA,), [((0,), 1)])
    assert g.volume == ALPHA
    for n in range(-25, 26):
        assert hit_count(g, n) == slow_hits(g, n)


def test_huge_denominator_falls_back_to_scalar():
    g = golden((Fraction(1, 10 ** 7),))
    c = discrepancy_curve(g, 400)
    assert c.engine == "scalar"
    small = golden((Fraction(1, 7),))
    assert list(discrepancy_curve(small, 400).hits) != []
    for n in (0, 1, 5, 17):
        assert int(c.hits[n]) == slow_hits(g, n)


def test_summation_conventions_differ_by_endpoints():
    g = golden((Fraction(1, 7),))
    c0 = discrepancy_curve(g, 60, "from_zero")
    c1 = discrepancy_curve(g, 60, "from_one")
    for m in (1, 2, 7, 33, 60):
        assert c0.d_exact(m) - c1.d_exact(m) == hit_count(g, 0) - hit_count(g, m)
    with pytest.raises(ValueError):
        discrepancy_curve(g, 10, "from_two")


def test_return_times_golden_window():
    rt = return_times(golden(), 0, 9)
    assert rt.times() == (0, 2, 4, 5, 7, 9)
    assert rt.total() == 6
    assert rt.multiplicity(5) == 1
    assert rt.multiplicity(6) == 0
    empty = return_times(golden(), 5, 4)
    assert empty.times() == ()


def test_return_time_indexing_anchors_at_zero():
    rt = return_times(golden(), -10, 10)
    assert rt.indexed(0) == 0
    assert rt.indexed(1) == 2
    assert rt.indexed(2) == 4
    assert rt.indexed(-1) < 0
    with pytest.raises(IndexError):
        rt.indexed(99)


def test_gap_spectrum_is_narrow():
    # return times of a one-dimensional rotation show at most three
    # distinct spacings, and the expected spacing sits among them
    rt = return_times(golden(), 0, 377)
    assert len(rt.gaps()) <= 3
    r1 = rotation_instance((R2 - 1,), [((0,), -1)])
    assert len(return_times(r1, 0, 500).gaps()) <= 3


def test_counts_are_prefix_sums():
    g = golden((Fraction(3, 11),))
    c = discrepancy_curve(g, 50)
    running = 0
    for i in range(50):
        running += int(c.hits[i])
        assert int(c.counts[i]) == running
    assert c.density() == running / 50


def test_suspension_matches_counting():
    g = golden()
    scheme, setup = suspension(g)
    assert setup.points_per_fiber == 1
    patch = generate_patch(scheme, suspension_box(g, 0, 60))
    by_height = {}
    for p in patch.points:
        by_height[p.gamma[-1]] = by_height.get(p.gamma[-1], 0) + 1
    for n in range(61):
        assert by_height.get(-n, 0) == hit_count(g, n)
    assert verify_patch(setup, patch).ok


def test_suspension_projects_complement_onto_gap_lattice():
    _, setup = suspension(golden())
    assert setup.projected_complement[0] == (1, golden_ratio())
    b = displacement_bound(setup)
    assert scalar_sign(b.step_sq) == 0
    assert b.pair_sq == Surd(Fraction(5, 2), Fraction(-1, 2), 5)


def test_root2_suspension():
    r = root2((Fraction(1, 7), Fraction(2, 7)))
    scheme, setup = suspension(r)
    assert setup.points_per_fiber == 1
    patch = generate_patch(scheme, suspension_box(r, 0, 40))
    by_height = {}
    for p in patch.points:
        by_height[p.gamma[-1]] = by_height.get(p.gamma[-1], 0) + 1
    for n in range(41):
        assert by_height.get(-n, 0) == hit_count(r, n)
    assert verify_patch(setup, patch).ok


def test_root2_density_approaches_volume():
    r = root2()
    c = discrepancy_curve(r, 2000)
    assert c.density() == pytest.approx(float(r.volume), rel=0.02)


def test_exact_bound_values():
    g = golden()
    b = discrepancy_bound(g)
    assert scalar_sign(b.displacement.step_sq) == 0
    assert g.volume ** 2 * b.displacement.pair_sq == Surd(5, -2, 5)
    assert b.value() == pytest.approx(1.7265425281, abs=1e-9)
    assert b.covers(Fraction(17, 10))
    assert not b.covers(Fraction(174, 100))
    assert b.covers(1 - ALPHA)
    assert b.covers(6 - 10 * ALPHA)


def test_time_axis_bound_is_unit_for_golden():
    tb = time_displacement_bound(golden())
    assert tb.pair_sq == 1
    assert scalar_sign(tb.step_sq) == 0
    assert tb.covers_sq(Fraction(1))
    assert not tb.covers_sq(Fraction(101, 100))


def test_return_times_stay_near_ideal_spacing():
    g = golden()
    report = lattice_drift(g, 0, 377)
    assert report.within
    assert report.compared == return_times(g, 0, 377).total()
    assert report.max_abs <= time_displacement_bound(g).value() + 1e-9


def test_interval_certificates():
    assert interval_certificate(ALPHA, ALPHA).multiple == 1
    assert interval_certificate(ALPHA, 2 * ALPHA - 1).multiple == 2
    assert interval_certificate(ALPHA, 7 * ALPHA - 4).multiple == 7
    assert interval_certificate(ALPHA, 1).multiple == 0
    blind = interval_certificate(ALPHA, Fraction(1, 2))
    assert blind.multiple is None
    assert not blind.certified
    with pytest.raises(ValueError):
        interval_certificate(ALPHA, Fraction(0))


def test_offset_grid_shape():
    g = golden()
    grid = offset_grid(g, 40)
    assert len(grid) == 40
    assert grid == offset_grid(g, 40)
    assert grid[0] == (Fraction(0),)
    for x in grid:
        assert len(x) == 1
        assert scalar_sign(x[0]) >= 0
        assert scalar_sign(x[0] - 1) < 0
    irrational = [x for x in grid
                  if hasattr(x[0], "is_rational") and not x[0].is_rational()]
    assert irrational
    rational = [x for x in grid[1:] if not hasattr(x[0], "is_rational")]
    assert rational


def test_bound_sweep_golden():
    g = golden()
    report = bound_sweep(g, 800, offsets=offset_grid(g, 6))
    assert report.all_within
    assert len(report.results) == 6
    assert report.worst.max_abs <= report.largest_bound
    assert all(r.certified in ("float-margin", "exact") for r in report.results)


def test_bound_sweep_root2():
    r = root2()
    report = bound_sweep(r, 500, offsets=offset_grid(r, 4))
    assert report.all_within


def test_float_mode_matches_exact_counts():
    exact = golden((Fraction(1, 3),))
    approx = rotation_instance((ALPHA,), [((0,), -1)], (Fraction(1, 3),),
                               precision=128)
    assert approx.mode == "float"
    assert approx.independent is None
    for n in range(51):
        assert hit_count(approx, n) == hit_count(exact, n)
    c = discrepancy_curve(approx, 30)
    assert c.engine == "float"
    with pytest.raises(CutProjectError):
        suspension(approx)
    with pytest.raises(CutProjectError):
        c.d_exact(3)


def test_float_mode_refuses_boundary_decisions():
    # with a zero translate the time-one point lands exactly on a facet
    approx = rotation_instance((ALPHA,), [((0,), -1)], precision=128)
    with pytest.raises(PrecisionExhaustedError):
        hit_count(approx, 1)


def test_float_mode_rejects_degenerate_vectors():
    with pytest.raises(PrecisionExhaustedError):
        rotation_instance((R2 - 1, 3 - 2 * R2), [((1, 0), 1), ((2, 0), 2)],
                          precision=64)
