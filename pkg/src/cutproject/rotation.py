"""Return-time analysis of torus rotations through a suspended scheme.

A rotation instance holds a step vector alpha in R^s, a half-open
parallelotope spanned by vectors of the form (integer vector) - (integer
multiple of alpha), and a translate.  Counting the integer translates of
n*alpha that land in the parallelotope, time step by time step, yields the
running discrepancy against the parallelotope volume.

The same data suspends to a cut-and-project scheme one dimension up: the
physical line is spanned by (alpha, 1), the internal space by the first s
coordinate axes, and the lattice vectors pairing each spanning vector with
its integer lift form a transversal.  The fiber bijection of that scheme is
what keeps the discrepancy bounded, and its displacement constant turns
into an explicit bound on the curve.

Discrepancy sweeps run on an integer-vectorized engine when every scalar
lives in one quadratic field; the engine guesses floors in floating point,
then certifies every decision with integer sign tests, and falls back to
plain exact arithmetic when magnitudes threaten to overflow 64-bit words.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt, sqrt
from typing import Optional

import mpmath
import numpy as np

from . import linalg
from .bijection import (
    BijectionSetup,
    DisplacementBound,
    build_setup,
    displacement_bound,
)
from .errors import CutProjectError, PrecisionExhaustedError, RankDeficientError
from .scalars import exact_ceil, exact_floor, from_number, scalar_sign, to_mpf
from .scheme import GammaBox, Scheme, parallelotope_window

__all__ = [
    "RotationInstance",
    "rotation_instance",
    "with_offset",
    "hit_count",
    "DiscrepancyCurve",
    "discrepancy_curve",
    "ReturnTimes",
    "return_times",
    "IntervalCertificate",
    "interval_certificate",
    "offset_grid",
    "suspension",
    "suspension_box",
    "DiscrepancyBound",
    "discrepancy_bound",
    "time_displacement_bound",
    "DriftReport",
    "lattice_drift",
    "OffsetResult",
    "SweepReport",
    "bound_sweep",
]


@dataclass(frozen=True)
class RotationInstance:
    """Exact (or fixed-precision) data of one rotation counting problem.

    vectors[j] = lifts[j][0] - lifts[j][1] * alpha spans the half-open
    parallelotope; lam[j] appends the integer multiplier to the integer
    vector and spans the transversal of the suspended scheme.  volume is
    the absolute determinant of the spanning vectors and gap its inverse,
    the expected spacing of return times.
    """

    dimension: int
    alpha: tuple
    lifts: tuple
    lam: tuple
    vectors: tuple
    offset: tuple
    volume: object
    gap: object
    independent: Optional[bool]
    mode: str
    bits: Optional[int]
    box_lo: tuple
    box_hi: tuple
    vinv: tuple


def _normalize_lifts(lifts, s):
    out = []
    for entry in lifts:
        nvec, nlast = entry
        nvec = tuple(int(x) for x in nvec)
        if len(nvec) != s:
            raise ValueError("integer lift has length %d, expected %d" % (len(nvec), s))
        out.append((nvec, int(nlast)))
    if len(out) != s:
        raise ValueError("need exactly %d spanning vectors, got %d" % (s, len(out)))
    return tuple(out)


def _parallelotope_box(vectors, s):
    # exact axis bounds of {sum t_j v_j : 0 <= t_j < 1}
    lo = []
    hi = []
    for i in range(s):
        a = Fraction(0)
        b = Fraction(0)
        for v in vectors:
            if scalar_sign(v[i]) < 0:
                a = a + v[i]
            else:
                b = b + v[i]
        lo.append(a)
        hi.append(b)
    return tuple(lo), tuple(hi)


def _rational_independence(alpha):
    """Whether 1, alpha_1, ..., alpha_s are linearly independent over Q."""
    ds = []
    for a in alpha:
        d = getattr(a, "d", 0)
        if d and d not in ds:
            ds.append(d)
    cols = {0: 0}
    for i, d in enumerate(ds):
        cols[d] = i + 1
    width = len(cols)
    rows = [[Fraction(1)] + [Fraction(0)] * (width - 1)]
    for a in alpha:
        row = [Fraction(0)] * width
        if hasattr(a, "is_rational"):
            row[0] = a.a
            if a.d:
                row[cols[a.d]] = a.b
        else:
            row[0] = Fraction(a)
        rows.append(row)
    return linalg.rank(linalg.mat(rows)) == len(alpha) + 1


def rotation_instance(alpha, lifts, offset=None, precision=None) -> RotationInstance:
    """Validate and assemble a rotation counting instance.

    With precision=None every input is kept exact.  A positive precision
    switches to mpf arithmetic at that many bits; membership decisions that
    fall within 10^(-bits/4) of a facet then raise PrecisionExhaustedError
    instead of guessing.
    """
    s = len(tuple(alpha))
    if s < 1:
        raise ValueError("rotation needs at least one coordinate")
    lifts = _normalize_lifts(lifts, s)
    if precision is None:
        exact_alpha = tuple(from_number(a) for a in alpha)
        x = tuple(from_number(v) for v in (offset if offset is not None else [0] * s))
        if len(x) != s:
            raise ValueError("offset has wrong dimension")
        vectors = tuple(
            tuple(nvec[i] - nlast * exact_alpha[i] for i in range(s))
            for nvec, nlast in lifts
        )
        det = linalg.det(linalg.mat(vectors))
        sg = scalar_sign(det)
        if sg == 0:
            raise RankDeficientError("window spanning vectors are linearly dependent")
        volume = det if sg > 0 else -det
        lo, hi = _parallelotope_box(vectors, s)
        return RotationInstance(
            dimension=s,
            alpha=exact_alpha,
            lifts=lifts,
            lam=tuple(nvec + (nlast,) for nvec, nlast in lifts),
            vectors=vectors,
            offset=x,
            volume=volume,
            gap=1 / volume,
            independent=_rational_independence(exact_alpha),
            mode="exact",
            bits=None,
            box_lo=lo,
            box_hi=hi,
            vinv=linalg.inverse(linalg.mat(vectors)),
        )
    bits = int(precision)
    if bits < 16:
        raise ValueError("precision below 16 bits is not supported")
    with mpmath.workprec(bits):
        margin = mpmath.mpf(10) ** (-(bits // 4))
        falpha = tuple(to_mpf(a, bits) for a in alpha)
        x = tuple(to_mpf(v, bits) for v in (offset if offset is not None else [0] * s))
        vectors = tuple(
            tuple(nvec[i] - nlast * falpha[i] for i in range(s))
            for nvec, nlast in lifts
        )
        det = _float_det(vectors, s)
        if abs(det) <= margin:
            raise PrecisionExhaustedError(
                "spanning vectors are dependent to working precision")
        volume = abs(det)
        lo = []
        hi = []
        for i in range(s):
            lo.append(mpmath.fsum(min(v[i], 0) for v in vectors))
            hi.append(mpmath.fsum(max(v[i], 0) for v in vectors))
        return RotationInstance(
            dimension=s,
            alpha=falpha,
            lifts=lifts,
            lam=tuple(nvec + (nlast,) for nvec, nlast in lifts),
            vectors=vectors,
            offset=x,
            volume=volume,
            gap=1 / volume,
            independent=None,
            mode="float",
            bits=bits,
            box_lo=tuple(lo),
            box_hi=tuple(hi),
            vinv=_float_inverse(vectors, s),
        )


def _float_det(rows, s):
    if s == 1:
        return rows[0][0]
    if s == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    m = [[mpmath.mpf(x) for x in row] for row in rows]
    det = mpmath.mpf(1)
    for c in range(s):
        p = max(range(c, s), key=lambda r: abs(m[r][c]))
        if m[p][c] == 0:
            return mpmath.mpf(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, s):
            f = m[r][c] / m[c][c]
            for cc in range(c, s):
                m[r][cc] -= f * m[c][cc]
    return det


def _float_inverse(rows, s):
    m = [[mpmath.mpf(x) for x in row] + [mpmath.mpf(1 if i == j else 0) for j in range(s)]
         for i, row in enumerate(rows)]
    for c in range(s):
        p = max(range(c, s), key=lambda r: abs(m[r][c]))
        m[c], m[p] = m[p], m[c]
        piv = m[c][c]
        m[c] = [x / piv for x in m[c]]
        for r in range(s):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return tuple(tuple(row[s:]) for row in m)


def with_offset(inst: RotationInstance, offset) -> RotationInstance:
    """Same rotation data with a different translate."""
    precision = None if inst.mode == "exact" else inst.bits
    return rotation_instance(inst.alpha, inst.lifts, offset, precision)


# -- counting ------------------------------------------------------------


def hit_count(inst: RotationInstance, n) -> int:
    """Number of integer translates of n*alpha + offset inside the window.

    Candidates come from the window's exact axis bounds; each is decided by
    solving for the spanning coordinates and sign-testing the half-open
    constraints.
    """
    n = int(n)
    if inst.mode == "float":
        return _hit_count_float(inst, n)
    u = tuple(n * a + x for a, x in zip(inst.alpha, inst.offset))
    ranges = []
    for i in range(inst.dimension):
        lo = exact_ceil(inst.box_lo[i] - u[i])
        hi = exact_floor(inst.box_hi[i] - u[i])
        if hi < lo:
            return 0
        ranges.append(range(lo, hi + 1))
    count = 0
    for m in itertools.product(*ranges):
        y = tuple(ui + mi for ui, mi in zip(u, m))
        t = linalg.mat_vec(inst.vinv, y)
        if all(scalar_sign(tj) >= 0 and scalar_sign(tj - 1) < 0 for tj in t):
            count += 1
    return count


def _hit_count_float(inst: RotationInstance, n: int) -> int:
    with mpmath.workprec(inst.bits):
        margin = mpmath.mpf(10) ** (-(inst.bits // 4))
        u = [n * a + x for a, x in zip(inst.alpha, inst.offset)]
        ranges = []
        for i in range(inst.dimension):
            # widen by one candidate on each side; membership rejects extras
            lo = int(mpmath.floor(inst.box_lo[i] - u[i])) - 1
            hi = int(mpmath.ceil(inst.box_hi[i] - u[i])) + 1
            ranges.append(range(lo, hi + 1))
        count = 0
        for m in itertools.product(*ranges):
            y = [ui + mi for ui, mi in zip(u, m)]
            inside = True
            for j in range(inst.dimension):
                tj = mpmath.fsum(y[i] * inst.vinv[i][j] for i in range(inst.dimension))
                if min(abs(tj), abs(tj - 1)) < margin:
                    raise PrecisionExhaustedError(
                        "hit decision at time %d, translate %s falls within the "
                        "facet margin at %d bits" % (n, m, inst.bits))
                if not (0 < tj < 1):
                    inside = False
                    break
            if inside:
                count += 1
        return count


# -- the integer-vectorized engine --------------------------------------


class _EngineOverflow(Exception):
    pass


_SIGN_GUARD_A = 2_000_000_000


def _parts(x):
    """x as (p, q, r, d) with x = (p + q*sqrt(d))/r, r > 0, all integers."""
    if hasattr(x, "is_rational"):
        a, b, d = x.a, x.b, x.d
        r = (a.denominator * b.denominator) // gcd(a.denominator, b.denominator)
        return (a.numerator * (r // a.denominator),
                b.numerator * (r // b.denominator), r, d)
    f = Fraction(x)
    return (f.numerator, 0, f.denominator, 0)


def _lcm(values):
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out


def _sign_vec(a, b, d, guard_b):
    """Exact elementwise sign of a + b*sqrt(d) for int64 arrays."""
    if a.size and (np.abs(a).max() > _SIGN_GUARD_A or np.abs(b).max() > guard_b):
        raise _EngineOverflow
    sa = np.sign(a)
    sb = np.sign(b)
    t = np.sign(a * a - d * (b * b))
    mixed = sa * sb < 0
    return np.where(sb == 0, sa,
                    np.where(sa == 0, sb,
                             np.where(mixed, sa * t, sa)))


def _floor_vec(a, b, r, d, sq, guard_b):
    """Exact elementwise floor of (a + b*sqrt(d))/r for int64 arrays.

    The float guess is only a starting point; every entry is certified by
    integer sign tests and nudged until both bracketing tests pass.
    """
    g = np.floor((a.astype(np.float64) + b.astype(np.float64) * sq) / r).astype(np.int64)
    for _ in range(64):
        low = _sign_vec(a - g * r, b, d, guard_b) < 0
        high = _sign_vec(a - (g + 1) * r, b, d, guard_b) >= 0
        if not (low.any() or high.any()):
            return g
        g = g - low + high
    raise _EngineOverflow


def _ceil_vec(a, b, r, d, sq, guard_b):
    g = _floor_vec(a, b, r, d, sq, guard_b)
    exact = (b == 0) & (a % r == 0)
    return g + ~exact


class _VectorData:
    """Field components of one instance, scaled to common denominators."""

    __slots__ = ("s", "d", "sq", "r", "rv", "pa", "qa", "px", "qx",
                 "plo", "qlo", "phi", "qhi", "pv", "qv", "deltas",
                 "guard_b", "climit")

    def __init__(self, inst):
        s = inst.dimension
        u_parts = [_parts(v) for v in inst.alpha + inst.offset + inst.box_lo + inst.box_hi]
        v_parts = [[_parts(inst.vinv[i][j]) for j in range(s)] for i in range(s)]
        ds = {p[3] for p in u_parts if p[3]} | {p[3] for row in v_parts for p in row if p[3]}
        if len(ds) > 1:
            raise _EngineOverflow
        self.s = s
        self.d = ds.pop() if ds else 2
        self.sq = sqrt(self.d)
        self.r = _lcm([p[2] for p in u_parts])
        self.rv = _lcm([p[2] for row in v_parts for p in row])

        def scaled(parts, target):
            f = target // parts[2]
            return parts[0] * f, parts[1] * f

        self.pa, self.qa = zip(*(scaled(p, self.r) for p in u_parts[:s]))
        self.px, self.qx = zip(*(scaled(p, self.r) for p in u_parts[s:2 * s]))
        self.plo, self.qlo = zip(*(scaled(p, self.r) for p in u_parts[2 * s:3 * s]))
        self.phi, self.qhi = zip(*(scaled(p, self.r) for p in u_parts[3 * s:]))
        self.pv = [[scaled(v_parts[i][j], self.rv)[0] for j in range(s)] for i in range(s)]
        self.qv = [[scaled(v_parts[i][j], self.rv)[1] for j in range(s)] for i in range(s)]
        self.deltas = [exact_floor(inst.box_hi[i] - inst.box_lo[i]) for i in range(s)]
        self.guard_b = isqrt(4_500_000_000_000_000_000 // self.d)
        mv = max([abs(v) for row in self.pv for v in row]
                 + [abs(v) for row in self.qv for v in row] + [1])
        self.climit = (1 << 62) // (2 * s * mv * self.d)
        big = max(abs(v) for v in self.pa + self.qa + self.px + self.qx
                  + self.plo + self.qlo + self.phi + self.qhi)
        if big > _SIGN_GUARD_A // 4 or self.r > _SIGN_GUARD_A // 4:
            raise _EngineOverflow


def _vector_hits(data: _VectorData, lo: int, hi: int):
    s, d, r, rv = data.s, data.d, data.r, data.rv
    n = np.arange(lo, hi, dtype=np.int64)
    if n.size and max(abs(lo), abs(hi)) * max(
            max(abs(v) for v in data.pa), max(abs(v) for v in data.qa), 1) > (1 << 60):
        raise _EngineOverflow
    au = [data.pa[i] * n + data.px[i] for i in range(s)]
    bu = [data.qa[i] * n + data.qx[i] for i in range(s)]
    base = []
    span = []
    for i in range(s):
        b_ = _ceil_vec(data.plo[i] - au[i], data.qlo[i] - bu[i], r, d, data.sq, data.guard_b)
        t_ = _floor_vec(data.phi[i] - au[i], data.qhi[i] - bu[i], r, d, data.sq, data.guard_b)
        base.append(b_)
        span.append(t_ - b_)
        if (span[i] > data.deltas[i]).any():
            raise _EngineOverflow
    hits = np.zeros(n.shape, dtype=np.int64)
    for delta in itertools.product(*(range(m + 1) for m in data.deltas)):
        valid = np.ones(n.shape, dtype=bool)
        for i in range(s):
            valid &= delta[i] <= span[i]
        if not valid.any():
            continue
        c = [au[i] + (base[i] + delta[i]) * r for i in range(s)]
        for i in range(s):
            if np.abs(c[i]).max() > data.climit or np.abs(bu[i]).max() > data.climit:
                raise _EngineOverflow
        for j in range(s):
            aj = np.zeros(n.shape, dtype=np.int64)
            bj = np.zeros(n.shape, dtype=np.int64)
            for i in range(s):
                aj += data.pv[i][j] * c[i] + d * data.qv[i][j] * bu[i]
                bj += data.pv[i][j] * bu[i] + data.qv[i][j] * c[i]
            valid &= _sign_vec(aj, bj, d, data.guard_b) >= 0
            valid &= _sign_vec(aj - r * rv, bj, d, data.guard_b) < 0
            if not valid.any():
                break
        hits += valid
    return hits


def _hits_range(inst: RotationInstance, lo: int, hi: int):
    """Hit counts for every time in [lo, hi), plus the engine that ran."""
    if hi <= lo:
        return np.zeros(0, dtype=np.int64), "empty"
    if inst.mode == "exact" and inst.dimension <= 3:
        try:
            return _vector_hits(_VectorData(inst), lo, hi), "vector"
        except _EngineOverflow:
            pass
    label = "float" if inst.mode == "float" else "scalar"
    return np.array([hit_count(inst, n) for n in range(lo, hi)], dtype=np.int64), label


# -- discrepancy ---------------------------------------------------------


class DiscrepancyCurve:
    """Running counts against the expected volume times horizon.

    counts[M-1] holds the number of hits over the first M times of the
    chosen convention; the discrepancy at M is counts[M-1] - M * volume.
    """

    def __init__(self, inst, horizon, convention, start, hits, engine):
        self.instance = inst
        self.horizon = horizon
        self.convention = convention
        self.start = start
        self.hits = hits
        self.counts = np.cumsum(hits)
        self.engine = engine
        self._dfloat = None

    def d_float(self):
        if self._dfloat is None:
            vol = float(self.instance.volume)
            m = np.arange(1, self.horizon + 1, dtype=np.float64)
            self._dfloat = self.counts.astype(np.float64) - m * vol
        return self._dfloat

    def d_exact(self, m: int):
        if not 1 <= m <= self.horizon:
            raise ValueError("horizon index out of range")
        if self.instance.mode != "exact":
            raise CutProjectError("exact discrepancy values need an exact instance")
        return int(self.counts[m - 1]) - m * self.instance.volume

    def max_abs(self):
        df = self.d_float()
        i = int(np.argmax(np.abs(df)))
        return i + 1, float(abs(df[i]))

    def density(self) -> float:
        return float(self.counts[-1]) / self.horizon


_CONVENTIONS = {"from_zero": 0, "from_one": 1}


def discrepancy_curve(inst: RotationInstance, horizon: int,
                      convention: str = "from_zero") -> DiscrepancyCurve:
    """Full discrepancy prefix data up to the horizon.

    from_zero sums hits over times 0..M-1, from_one over 1..M; the two
    curves differ exactly by hit_count(0) - hit_count(M) at every M.
    """
    horizon = int(horizon)
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if convention not in _CONVENTIONS:
        raise ValueError("unknown convention %r" % (convention,))
    start = _CONVENTIONS[convention]
    hits, engine = _hits_range(inst, start, start + horizon)
    return DiscrepancyCurve(inst, horizon, convention, start, hits, engine)


# -- return times --------------------------------------------------------


@dataclass(frozen=True)
class ReturnTimes:
    """Sorted multiset of times with at least one hit in a scanned range.

    Indexing follows the convention that index 1 names the first positive
    time, so index 0 is the last time <= 0 when the range contains one.
    """

    entries: tuple
    scanned: tuple

    def times(self):
        out = []
        for n, mult in self.entries:
            out.extend([n] * mult)
        return tuple(out)

    def multiplicity(self, n: int) -> int:
        for m, mult in self.entries:
            if m == n:
                return mult
        return 0

    def total(self) -> int:
        return sum(m for _, m in self.entries)

    def indexed(self, j: int) -> int:
        flat = self.times()
        first_pos = 0
        while first_pos < len(flat) and flat[first_pos] <= 0:
            first_pos += 1
        pos = first_pos - 1 + j
        if not 0 <= pos < len(flat):
            raise IndexError("index %d outside the scanned range" % (j,))
        return flat[pos]

    def gaps(self):
        flat = self.times()
        return tuple(sorted({b - a for a, b in zip(flat, flat[1:]) if b != a}))


def return_times(inst: RotationInstance, lo: int, hi: int) -> ReturnTimes:
    """All times in [lo, hi] with a hit, with multiplicities."""
    lo = int(lo)
    hi = int(hi)
    if hi < lo:
        return ReturnTimes(entries=(), scanned=(lo, hi))
    hits, _ = _hits_range(inst, lo, hi + 1)
    entries = tuple((lo + i, int(h)) for i, h in enumerate(hits) if h)
    return ReturnTimes(entries=entries, scanned=(lo, hi))


# -- interval certificates ----------------------------------------------


@dataclass(frozen=True)
class IntervalCertificate:
    """Search result for writing a length as k*step modulo one."""

    length: object
    depth: int
    multiple: Optional[int]

    @property
    def certified(self) -> bool:
        return self.multiple is not None


def _is_integer(x) -> bool:
    if hasattr(x, "is_rational"):
        if not x.is_rational():
            return False
        x = x.as_fraction()
    return Fraction(x).denominator == 1


def interval_certificate(step, length, depth: int = 50) -> IntervalCertificate:
    """Smallest |k| <= depth with length congruent to k*step modulo one.

    The check is exact, so a returned certificate is a proof and an empty
    one only means no witness exists within the search depth.
    """
    a = from_number(step)
    ell = from_number(length)
    if scalar_sign(ell) <= 0 or scalar_sign(ell - 1) > 0:
        raise ValueError("interval length must lie in (0, 1]")
    depth = int(depth)
    for k in range(0, depth + 1):
        for kk in ((k,) if k == 0 else (k, -k)):
            if _is_integer(ell - kk * a):
                return IntervalCertificate(length=ell, depth=depth, multiple=kk)
    return IntervalCertificate(length=ell, depth=depth, multiple=None)


# -- offset grids --------------------------------------------------------


def offset_grid(inst: RotationInstance, count: int = 100):
    """Deterministic translates in [0,1)^s, rational and irrational mixed.

    Even indices shift a rational ladder, odd indices multiply the rotation
    coordinates themselves, so irrational translates appear whenever the
    rotation is irrational.  Index 0 is always the zero translate.
    """
    if inst.mode != "exact":
        raise CutProjectError("offset grids need an exact instance")
    s = inst.dimension
    out = []
    for i in range(int(count)):
        if i == 0:
            out.append(tuple(Fraction(0) for _ in range(s)))
            continue
        xs = []
        for j in range(s):
            if i % 2 == 0:
                e = Fraction(i, count) + Fraction(2 * j + 1, 4 * count)
            else:
                e = (Fraction(i, count) + Fraction(j, count)) * inst.alpha[j]
            xs.append(e - exact_floor(e))
        out.append(tuple(xs))
    return tuple(out)


# -- the suspended scheme ------------------------------------------------


def suspension(inst: RotationInstance, *, tiling_samples: int = 128):
    """Scheme one dimension up whose accepted heights mirror the hits.

    The physical line is spanned by (alpha, 1); a lattice point (m, h) is
    accepted exactly when (-h)*alpha + m lands in the translated window, so
    height -n carries the hits of time n.  Returns the scheme together with
    its validated fiber-bijection setup.
    """
    if inst.mode != "exact":
        raise CutProjectError("the suspended scheme needs exact coordinates")
    s = inst.dimension
    n = s + 1
    physical = [tuple(inst.alpha) + (1,)]
    internal = [tuple(1 if j == i else 0 for j in range(n)) for i in range(s)]
    wvectors = [tuple(v) + (0,) for v in inst.vectors]
    woffset = tuple(-x for x in inst.offset) + (0,)
    scheme = Scheme(physical, internal,
                    window=parallelotope_window(wvectors, woffset))
    setup = build_setup(scheme, inst.lam, fiber_sublattice=inst.lam,
                        tiling_samples=tiling_samples)
    return scheme, setup


def suspension_box(inst: RotationInstance, n_lo: int, n_hi: int) -> GammaBox:
    """Lattice box holding every accepted point with time in [n_lo, n_hi]."""
    if inst.mode != "exact":
        raise CutProjectError("suspension boxes need an exact instance")
    ranges = []
    for i in range(inst.dimension):
        ends = [n_lo * inst.alpha[i] + inst.offset[i],
                n_hi * inst.alpha[i] + inst.offset[i]]
        if scalar_sign(ends[1] - ends[0]) < 0:
            ends.reverse()
        ranges.append((exact_ceil(inst.box_lo[i] - ends[1]),
                       exact_floor(inst.box_hi[i] - ends[0])))
    ranges.append((-int(n_hi), -int(n_lo)))
    return GammaBox(ranges)


# -- bounds --------------------------------------------------------------


@dataclass(frozen=True)
class DiscrepancyBound:
    """volume * (bijection displacement constant) + 1, held exactly.

    displacement is the ambient-metric constant of the suspended scheme's
    fiber bijection; covers() compares a discrepancy value against the
    bound without ever rounding, by clearing the two square roots.
    """

    volume: object
    displacement: DisplacementBound

    def value(self, bits: int = 64) -> float:
        with mpmath.workprec(bits):
            return float(to_mpf(self.volume, bits)
                         * (mpmath.sqrt(to_mpf(self.displacement.step_sq, bits))
                            + mpmath.sqrt(to_mpf(self.displacement.pair_sq, bits)))
                         + 1)

    def __float__(self) -> float:
        return self.value()

    def covers(self, d_value) -> bool:
        # |d| <= 1 + vol*sqrt(A) + vol*sqrt(B), decided on exact scalars
        mag = d_value if scalar_sign(d_value) >= 0 else -d_value
        e = mag - 1
        if scalar_sign(e) <= 0:
            return True
        v2 = self.volume * self.volume
        a = v2 * self.displacement.step_sq
        b = v2 * self.displacement.pair_sq
        u = e * e - a - b
        if scalar_sign(u) <= 0:
            return True
        return scalar_sign(u * u - 4 * a * b) <= 0


def discrepancy_bound(inst: RotationInstance, *, tiling_samples: int = 64) -> DiscrepancyBound:
    """Exact curve bound derived from the suspended scheme's bijection."""
    _, setup = suspension(inst, tiling_samples=tiling_samples)
    return DiscrepancyBound(volume=inst.volume, displacement=displacement_bound(setup))


def time_displacement_bound(inst: RotationInstance) -> DisplacementBound:
    """Displacement constant rescaled to the time axis.

    Physical distances sit on the line spanned by (alpha, 1), so dividing
    both squared terms by 1 + |alpha|^2 measures displacement in units of
    one time step.
    """
    amb = discrepancy_bound(inst).displacement
    scale = 1 + sum((a * a for a in inst.alpha), Fraction(0))
    return DisplacementBound(amb.step_sq / scale, amb.pair_sq / scale)


@dataclass(frozen=True)
class DriftReport:
    """How far indexed return times stray from the ideal spaced lattice."""

    shift: Optional[int]
    max_abs: float
    within: bool
    compared: int


def lattice_drift(inst: RotationInstance, lo: int, hi: int,
                  bound: Optional[DisplacementBound] = None) -> DriftReport:
    """Best integer alignment of return times against multiples of the gap.

    Tests n_j - (j + c) * gap over the scanned range for shifts c near the
    anchored indexing; within means some shift keeps every deviation under
    the time-axis displacement constant, checked exactly.
    """
    if bound is None:
        bound = time_displacement_bound(inst)
    rt = return_times(inst, lo, hi)
    flat = rt.times()
    if not flat:
        return DriftReport(shift=None, max_abs=0.0, within=True, compared=0)
    first_pos = 0
    while first_pos < len(flat) and flat[first_pos] <= 0:
        first_pos += 1
    # center the shift search on the middle element's own alignment
    mid = len(flat) // 2
    j_mid = mid - first_pos + 1
    guess = exact_floor(flat[mid] * inst.volume) - j_mid
    best = None
    for c in range(guess - 2, guess + 3):
        worst = Fraction(0)
        ok = True
        for pos, t in enumerate(flat):
            j = pos - first_pos + 1
            dev = t - (j + c) * inst.gap
            q = dev * dev
            if scalar_sign(q - worst) > 0:
                worst = q
            if not bound.covers_sq(q):
                ok = False
                break
        reach = float(mpmath.sqrt(to_mpf(worst, 64)))
        if ok:
            return DriftReport(shift=c, max_abs=reach, within=True,
                               compared=len(flat))
        if best is None or reach < best[1]:
            best = (c, reach)
    return DriftReport(shift=best[0], max_abs=best[1], within=False,
                       compared=len(flat))


# -- offset sweeps -------------------------------------------------------


@dataclass(frozen=True)
class OffsetResult:
    offset: tuple
    max_at: int
    max_abs: float
    within: bool
    certified: str


@dataclass(frozen=True)
class SweepReport:
    """Per-offset curve maxima against per-offset exact bounds."""

    horizon: int
    results: tuple
    bound_values: tuple

    @property
    def all_within(self) -> bool:
        return all(r.within for r in self.results)

    @property
    def worst(self) -> OffsetResult:
        return max(self.results, key=lambda r: r.max_abs)

    @property
    def largest_bound(self) -> float:
        return max(self.bound_values)


def bound_sweep(inst: RotationInstance, horizon: int, offsets=None,
                convention: str = "from_zero", tiling_samples: int = 16) -> SweepReport:
    """Check max |discrepancy| <= bound across a family of translates.

    Every translate gets its own suspended scheme and exact bound.  Curve
    values clear of the bound by a float margin are certified by the error
    budget of the integer counts; anything closer is re-checked exactly.
    """
    if offsets is None:
        offsets = offset_grid(inst)
    results = []
    bound_values = []
    for x in offsets:
        shifted = with_offset(inst, x)
        bound = discrepancy_bound(shifted, tiling_samples=tiling_samples)
        bf = bound.value()
        curve = discrepancy_curve(shifted, horizon, convention)
        df = curve.d_float()
        at = int(np.argmax(np.abs(df)))
        near = np.nonzero(np.abs(df) > bf - 1e-9)[0]
        if near.size:
            ok = all(bound.covers(curve.d_exact(int(i) + 1)) for i in near)
            certified = "exact"
        else:
            ok = True
            certified = "float-margin"
        results.append(OffsetResult(offset=tuple(x), max_at=at + 1,
                                    max_abs=float(abs(df[at])), within=ok,
                                    certified=certified))
        bound_values.append(bf)
    return SweepReport(horizon=int(horizon), results=tuple(results),
                       bound_values=tuple(bound_values))
