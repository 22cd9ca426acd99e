"""Integer lattice algebra: Smith normal form, saturation, complements, index.

Matrices are numpy arrays with dtype=object holding Python ints, so entries
never overflow.  Lattices are row lattices: the rows of a basis matrix
generate the lattice by integer combinations.

The Smith reduction follows a fixed pivot rule (smallest magnitude nonzero
entry, ties broken by lowest row then lowest column) so that repeated runs
and cross-implementations produce identical transforms.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg
from .errors import NoComplementError, RankDeficientError

__all__ = [
    "int_matrix",
    "identity_int",
    "int_det",
    "SnfResult",
    "smith_normal_form",
    "saturate",
    "complement",
    "sublattice_index",
    "lattice_equal",
    "lattice_contains",
    "hermite_form",
    "coset_structure",
    "coset_label",
    "coset_rank",
]


def int_matrix(rows: Sequence[Sequence[int]]) -> np.ndarray:
    a = np.array([[int(x) for x in row] for row in rows], dtype=object)
    if a.ndim != 2:
        raise ValueError("expected a 2-d array of integers")
    return a


def identity_int(n: int) -> np.ndarray:
    a = np.zeros((n, n), dtype=object)
    for i in range(n):
        a[i, i] = 1
    return a


def int_det(a: np.ndarray) -> int:
    """Exact determinant of an integer matrix (Bareiss elimination)."""
    a = int_matrix(a)
    n, m = a.shape
    if n != m:
        raise ValueError("determinant needs a square matrix")
    w = [[int(x) for x in row] for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if w[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if w[i][k] != 0), None)
            if swap is None:
                return 0
            w[k], w[swap] = w[swap], w[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                w[i][j] = (w[i][j] * w[k][k] - w[i][k] * w[k][j]) // prev
            w[i][k] = 0
        prev = w[k][k]
    return sign * w[n - 1][n - 1]


class SnfResult(NamedTuple):
    d: np.ndarray
    u: np.ndarray
    v: np.ndarray


class _Ops:
    """Row/column operations on D with U, V and their inverses kept in step.

    Invariants: u @ original @ v == d, u @ uinv == I, vinv @ v == I.
    """

    def __init__(self, a: np.ndarray):
        r, c = a.shape
        self.d = a.copy()
        self.u = identity_int(r)
        self.uinv = identity_int(r)
        self.v = identity_int(c)
        self.vinv = identity_int(c)

    def row_swap(self, i, j):
        if i == j:
            return
        self.d[[i, j], :] = self.d[[j, i], :]
        self.u[[i, j], :] = self.u[[j, i], :]
        self.uinv[:, [i, j]] = self.uinv[:, [j, i]]

    def col_swap(self, i, j):
        if i == j:
            return
        self.d[:, [i, j]] = self.d[:, [j, i]]
        self.v[:, [i, j]] = self.v[:, [j, i]]
        self.vinv[[i, j], :] = self.vinv[[j, i], :]

    def row_add(self, dst, src, q):
        # row dst += q * row src
        if q == 0:
            return
        self.d[dst, :] += q * self.d[src, :]
        self.u[dst, :] += q * self.u[src, :]
        self.uinv[:, src] -= q * self.uinv[:, dst]

    def col_add(self, dst, src, q):
        if q == 0:
            return
        self.d[:, dst] += q * self.d[:, src]
        self.v[:, dst] += q * self.v[:, src]
        self.vinv[src, :] -= q * self.vinv[dst, :]

    def row_negate(self, i):
        self.d[i, :] = -self.d[i, :]
        self.u[i, :] = -self.u[i, :]
        self.uinv[:, i] = -self.uinv[:, i]


def _pick_pivot(d: np.ndarray, t: int):
    """Smallest-magnitude nonzero entry of d[t:, t:]; ties by row then column."""
    best = None
    r, c = d.shape
    for i in range(t, r):
        for j in range(t, c):
            x = d[i, j]
            if x != 0:
                key = (abs(x), i, j)
                if best is None or key < best[0]:
                    best = (key, i, j)
    if best is None:
        return None
    return best[1], best[2]


def _snf_ops(a: np.ndarray) -> _Ops:
    ops = _Ops(a)
    d = ops.d
    r, c = d.shape
    for t in range(min(r, c)):
        while True:
            pos = _pick_pivot(d, t)
            if pos is None:
                break
            ops.row_swap(t, pos[0])
            ops.col_swap(t, pos[1])
            p = d[t, t]
            dirty = False
            for i in range(t + 1, r):
                q = -(d[i, t] // p)
                ops.row_add(i, t, q)
                if d[i, t] != 0:
                    dirty = True
            for j in range(t + 1, c):
                q = -(d[t, j] // p)
                ops.col_add(j, t, q)
                if d[t, j] != 0:
                    dirty = True
            if dirty:
                continue
            # enforce divisibility of the remaining block by the pivot
            stained = False
            for i in range(t + 1, r):
                for j in range(t + 1, c):
                    if d[i, j] % p != 0:
                        ops.row_add(t, i, 1)
                        stained = True
                        break
                if stained:
                    break
            if not stained:
                break
        if d[t, t] < 0:
            ops.row_negate(t)
    return ops


def smith_normal_form(a) -> SnfResult:
    """Diagonalize an integer matrix: u @ a @ v == d.

    The diagonal is nonnegative with each entry dividing the next, and u, v
    are unimodular.
    """
    a = int_matrix(a)
    ops = _snf_ops(a)
    return SnfResult(ops.d, ops.u, ops.v)


def _snf_rank(d: np.ndarray) -> int:
    return sum(1 for i in range(min(d.shape)) if d[i, i] != 0)


def hermite_form(a) -> np.ndarray:
    """Canonical row Hermite form with zero rows dropped.

    Pivots are positive, entries above a pivot are reduced to [0, pivot).
    Used internally as the canonical label for a row lattice.
    """
    w = [list(int(x) for x in row) for row in int_matrix(a)]
    rows = len(w)
    cols = len(w[0]) if rows else 0
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if w[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        w[r], w[piv] = w[piv], w[r]
        # euclidean reduction of the column below the pivot row
        while True:
            nz = [i for i in range(r + 1, rows) if w[i][c] != 0]
            if not nz:
                break
            rows_nz = [r] + nz if w[r][c] != 0 else nz
            imin = min(rows_nz, key=lambda i: abs(w[i][c]))
            if imin != r:
                w[r], w[imin] = w[imin], w[r]
            for i in range(r + 1, rows):
                if w[i][c] != 0:
                    q = w[i][c] // w[r][c]
                    w[i] = [x - q * y for x, y in zip(w[i], w[r])]
        if w[r][c] < 0:
            w[r] = [-x for x in w[r]]
        for i in range(r):
            q = w[i][c] // w[r][c]
            if q:
                w[i] = [x - q * y for x, y in zip(w[i], w[r])]
        r += 1
    out = [row for row in w[:r]]
    return int_matrix(out) if out else np.zeros((0, cols), dtype=object)


def lattice_equal(a, b) -> bool:
    ha, hb = hermite_form(a), hermite_form(b)
    return ha.shape == hb.shape and bool((ha == hb).all())


def lattice_contains(basis, vector) -> bool:
    """Is the integer vector an integer combination of the generator rows?"""
    basis = int_matrix(basis)
    stacked = np.vstack([basis, int_matrix([list(vector)])])
    return lattice_equal(basis, stacked)


def saturate(b) -> np.ndarray:
    """Basis of the saturation: all integer points in the real span of the rows.

    Raises RankDeficientError when the rows are dependent over the rationals.
    """
    b = int_matrix(b)
    ops = _snf_ops(b)
    r = _snf_rank(ops.d)
    if r < b.shape[0]:
        raise RankDeficientError("rows are rationally dependent")
    # rows of b generate Z^r . D . vinv, so the saturation is the span of the
    # first r rows of vinv
    return ops.vinv[:r, :].copy()


def complement(l) -> np.ndarray:
    """Basis of a direct-sum complement: Z^n == rows(l) (+) rows(result).

    Only saturated lattices split off; otherwise NoComplementError.
    """
    l = int_matrix(l)
    ops = _snf_ops(l)
    r = _snf_rank(ops.d)
    if r < l.shape[0]:
        raise RankDeficientError("rows are rationally dependent")
    for i in range(r):
        if ops.d[i, i] != 1:
            raise NoComplementError(
                "lattice is not saturated; no direct-sum complement exists"
            )
    return ops.vinv[r:, :].copy()


def sublattice_index(outer, inner) -> int:
    """Index [outer : inner] of one row lattice inside another.

    Raises ValueError when inner is not inside outer, RankDeficientError when
    ranks differ (infinite index).
    """
    outer = int_matrix(outer)
    inner = int_matrix(inner)
    if outer.shape[1] != inner.shape[1]:
        raise ValueError("ambient dimensions differ")
    if inner.shape[0] != outer.shape[0]:
        raise RankDeficientError("ranks differ, index is not finite")
    rows = []
    for v in inner:
        coords = linalg.solve_coords(linalg.mat(outer.tolist()), tuple(int(x) for x in v))
        row = []
        for c in coords:
            f = Fraction(c)
            if f.denominator != 1:
                raise ValueError("inner lattice is not contained in outer")
            row.append(f.numerator)
        rows.append(row)
    n = abs(int_det(int_matrix(rows)))
    if n == 0:
        raise RankDeficientError("inner lattice has lower rank, index is not finite")
    return n


class CosetStructure(NamedTuple):
    """Coordinates for outer/inner cosets: label(a) = (a @ v) mod diag."""

    v: np.ndarray
    diag: tuple[int, ...]
    order: int


def coset_structure(outer, inner) -> CosetStructure:
    """Structure of outer/inner for two bases of the same ambient lattice.

    outer and inner are bases with rows(inner) <= rows(outer); labels are
    computed on coordinate vectors relative to the outer basis.
    """
    outer = int_matrix(outer)
    inner = int_matrix(inner)
    rows = []
    for v in inner:
        coords = linalg.solve_coords(linalg.mat(outer.tolist()), tuple(int(x) for x in v))
        row = []
        for c in coords:
            f = Fraction(c)
            if f.denominator != 1:
                raise ValueError("inner lattice is not contained in outer")
            row.append(f.numerator)
        rows.append(row)
    m = int_matrix(rows)
    k = m.shape[1]
    if m.shape[0] < k:
        raise RankDeficientError("inner lattice has lower rank, index is not finite")
    res = smith_normal_form(m)
    diag = tuple(int(res.d[i, i]) for i in range(k))
    if any(d == 0 for d in diag):
        raise RankDeficientError("inner lattice has lower rank, index is not finite")
    order = 1
    for d in diag:
        order *= d
    return CosetStructure(res.v, diag, order)


def coset_label(cs: CosetStructure, coords) -> tuple[int, ...]:
    """Label of an outer-basis coordinate vector modulo the inner lattice."""
    a = np.array([int(x) for x in coords], dtype=object)
    t = a @ cs.v
    return tuple(int(x) % d for x, d in zip(t, cs.diag))


def coset_rank(cs: CosetStructure, label: tuple[int, ...]) -> int:
    """Position of a label in lexicographic order over all labels."""
    out = 0
    for x, d in zip(label, cs.diag):
        out = out * d + x
    return out
