"""Dense exact linear algebra over the rationals and quadratic fields.

Vectors are tuples of exact scalars (int, Fraction, or Surd) and matrices are
tuples of row tuples.  Everything here is plain Gaussian elimination; pivots
are the first nonzero entry, which is deterministic and safe because zero
tests are exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import RankDeficientError

Vec = tuple
Mat = tuple


def _div(x, y):
    # int / int must stay exact
    if isinstance(x, int) and isinstance(y, int):
        return Fraction(x, y)
    return x / y


def vec(xs: Sequence) -> Vec:
    return tuple(xs)


def mat(rows: Sequence[Sequence]) -> Mat:
    return tuple(tuple(r) for r in rows)


def vadd(u: Vec, v: Vec) -> Vec:
    return tuple(a + b for a, b in zip(u, v, strict=True))


def vsub(u: Vec, v: Vec) -> Vec:
    return tuple(a - b for a, b in zip(u, v, strict=True))


def vscale(c, u: Vec) -> Vec:
    return tuple(c * a for a in u)


def vdot(u: Vec, v: Vec):
    out = 0
    for a, b in zip(u, v, strict=True):
        out = out + a * b
    return out


def vnormsq(u: Vec):
    return vdot(u, u)


def mat_vec(rows: Mat, x: Vec) -> Vec:
    """x as coordinates against the rows: returns sum_i x_i * row_i."""
    out = None
    for c, row in zip(x, rows, strict=True):
        term = vscale(c, row)
        out = term if out is None else vadd(out, term)
    return out


def mat_mul(a: Mat, b: Mat) -> Mat:
    bt = tuple(zip(*b))
    return tuple(tuple(vdot(ra, cb) for cb in bt) for ra in a)


def _elim(rows):
    """Row echelon form by exact elimination; returns (rows, pivot columns)."""
    rows = [list(r) for r in rows]
    m = len(rows)
    n = len(rows[0]) if m else 0
    piv_cols = []
    r = 0
    for c in range(n):
        pivot = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        p = rows[r][c]
        rows[r] = [_div(x, p) for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
        if r == m:
            break
    return rows, piv_cols


def rank(rows: Mat) -> int:
    if not rows:
        return 0
    return len(_elim(rows)[1])


def det(rows: Mat):
    """Determinant of a square matrix of exact scalars."""
    n = len(rows)
    work = [list(r) for r in rows]
    out = 1
    sign = 1
    for c in range(n):
        pivot = next((i for i in range(c, n) if work[i][c] != 0), None)
        if pivot is None:
            return 0 * out
        if pivot != c:
            work[c], work[pivot] = work[pivot], work[c]
            sign = -sign
        p = work[c][c]
        out = out * p
        for i in range(c + 1, n):
            if work[i][c] != 0:
                f = _div(work[i][c], p)
                work[i] = [x - f * y for x, y in zip(work[i], work[c])]
    return out if sign == 1 else -out


def solve_coords(basis: Mat, target: Vec) -> Vec:
    """Coordinates x with sum_i x_i * basis_i == target.

    The basis rows must be independent; raises RankDeficientError otherwise,
    and ValueError when the target is outside their span.
    """
    m = len(basis)
    # eliminate on the transposed system: solve x * basis = target
    n = len(target)
    rows = [[basis[i][j] for i in range(m)] + [target[j]] for j in range(n)]
    red, piv = _elim(rows)
    if len(piv) < m or any(c >= m for c in piv):
        if len(piv) < m and all(c < m for c in piv):
            raise RankDeficientError("basis rows are dependent")
        raise ValueError("target is outside the span of the basis")
    x = [0] * m
    for r, c in enumerate(piv):
        x[c] = red[r][m]
    # consistency rows beyond the pivots must have vanished
    for r in range(len(piv), n):
        if red[r][m] != 0:
            raise ValueError("target is outside the span of the basis")
    return tuple(x)


def inverse(rows: Mat) -> Mat:
    """Inverse of a square matrix of exact scalars."""
    n = len(rows)
    aug = [list(rows[i]) + [Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    red, piv = _elim(aug)
    if piv != list(range(n)):
        raise RankDeficientError("matrix is singular")
    return tuple(tuple(red[i][n:]) for i in range(n))
