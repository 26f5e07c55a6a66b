"""Small exact linear algebra over the rationals and the integers.

Everything in the package that touches eigenspaces, fixed spaces or
finite-abelian-group structure goes through these helpers, so they are
kept deliberately boring: dense tuples of :class:`fractions.Fraction`
(or plain ints), Gaussian elimination, and a textbook Smith normal
form with transform tracking.  Matrices are sequences of rows.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Row = tuple[Fraction, ...]
Matrix = tuple[Row, ...]


def frac_matrix(rows: Sequence[Sequence]) -> Matrix:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(
        tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n)
    )


def int_identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]):
    """Matrix product; stays integer if both inputs are integer."""
    bt = list(zip(*b))
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a
    )


def mat_vec(a: Sequence[Sequence], v: Sequence):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def transpose(a: Sequence[Sequence]):
    return tuple(zip(*a))


def rref(rows: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    m = [list(map(Fraction, row)) for row in rows]
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = Fraction(1) / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return tuple(tuple(row) for row in m), pivots


def kernel_basis(rows: Sequence[Sequence]) -> list[Row]:
    """Basis of the right kernel {v : A v = 0}."""
    if not rows:
        return []
    ncols = len(rows[0])
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, c in enumerate(pivots):
            v[c] = -red[r][f]
        basis.append(tuple(v))
    return basis


def row_space_echelon(rows: Sequence[Sequence]) -> Matrix:
    """Canonical (RREF, zero rows dropped) basis of the row space.

    Used as a hashable key identifying a subspace.
    """
    red, pivots = rref(rows)
    return tuple(red[i] for i in range(len(pivots)))


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1]) if rows else 0


def invert(a: Sequence[Sequence]) -> Matrix:
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(a)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return tuple(tuple(row[n:]) for row in red)


def char_poly(a: Sequence[Sequence[int]]) -> list[int]:
    """Characteristic polynomial det(tI - A) by Faddeev-LeVerrier.

    Returns coefficients [c_0, ..., c_n] with c_n = 1, ascending degree.
    Exact for integer input (all intermediate values are integers).

    >>> char_poly([[0, -1], [1, 0]])
    [1, 0, 1]
    """
    n = len(a)
    am = [list(map(Fraction, row)) for row in a]
    coeffs = [Fraction(1)] * (n + 1)
    m = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{n-k+1} I
        if k > 1:
            m = [list(row) for row in matmul(am, m)]
        else:
            m = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            m[i][i] += coeffs[n - k + 1]
        am_m = matmul(am, m)
        trace = sum(am_m[i][i] for i in range(n))
        coeffs[n - k] = -trace / k
    out = []
    for c in coeffs:
        if c.denominator != 1:
            raise ValueError("characteristic polynomial not integral")
        out.append(int(c))
    return out


def smith_normal_form(
    a: Sequence[Sequence[int]],
) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Smith normal form over the integers.

    Returns (U, S, V) with U A V = S, S diagonal with d_1 | d_2 | ...,
    and U, V unimodular.  Row/column operations only; suitable for the
    small matrices (<= ~16 x 16) that arise here.
    """
    s = [list(map(int, row)) for row in a]
    nrows = len(s)
    ncols = len(s[0]) if nrows else 0
    u = int_identity(nrows)
    v = int_identity(ncols)

    def swap_rows(i, j):
        s[i], s[j] = s[j], s[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in s:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, mult):
        s[dst] = [x + mult * y for x, y in zip(s[dst], s[src])]
        u[dst] = [x + mult * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, mult):
        for row in s:
            row[dst] += mult * row[src]
        for row in v:
            row[dst] += mult * row[src]

    def negate_row(i):
        s[i] = [-x for x in s[i]]
        u[i] = [-x for x in u[i]]

    t = 0
    while t < min(nrows, ncols):
        # find a nonzero entry in the remaining block
        pos = None
        best = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if s[i][j] != 0 and (best is None or abs(s[i][j]) < best):
                    best = abs(s[i][j])
                    pos = (i, j)
        if pos is None:
            break
        swap_rows(t, pos[0])
        swap_cols(t, pos[1])
        while True:
            # clear column t
            done = True
            for i in range(t + 1, nrows):
                if s[i][t] != 0:
                    q = s[i][t] // s[t][t]
                    add_row(t, i, -q)
                    if s[i][t] != 0:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, ncols):
                if s[t][j] != 0:
                    q = s[t][j] // s[t][t]
                    add_col(t, j, -q)
                    if s[t][j] != 0:
                        swap_cols(t, j)
                        done = False
            if done:
                break
        if s[t][t] < 0:
            negate_row(t)
        # enforce divisibility d_t | entries of the remaining block
        stray = None
        for i in range(t + 1, nrows):
            for j in range(t + 1, ncols):
                if s[i][j] % s[t][t] != 0:
                    stray = i
                    break
            if stray is not None:
                break
        if stray is not None:
            add_row(stray, t, 1)
            continue
        t += 1
    return u, s, v


def abelian_invariants(a: Sequence[Sequence[int]]) -> list[int]:
    """Invariant factors (> 1) of coker(A : Z^cols -> Z^rows).

    A zero invariant (free summand) is reported as 0.

    >>> abelian_invariants([[2, 0], [0, 3]])   # Z^2 / <(2,0),(0,3)>
    [6]
    """
    if not a or not a[0]:
        return [0] * len(a)
    u, s, v = smith_normal_form(a)
    nrows = len(s)
    ncols = len(s[0])
    divisors = [s[i][i] if i < ncols else 0 for i in range(nrows)]
    return [d for d in divisors if d != 1]


if __name__ == "__main__":
    import doctest

    doctest.testmod()
