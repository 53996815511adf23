"""Dense linear algebra over the two scalar backends.

Exact matrices are lists of rows of Gaussian rationals and are reduced by
Gauss-Jordan elimination with first-nonzero pivoting, so results depend only
on the input and the column order.  Approximate matrices are numpy arrays;
rank uses a column-pivoted QR factorization and kernels come from the SVD.
"""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np
import scipy.linalg

from .scalars import DEFAULT_TOL, ONE, ZERO, GaussianRational, exact, is_zero, to_complex

Matrix = list  # list of rows


def is_exact_matrix(rows: Sequence[Sequence[Any]]) -> bool:
    """True unless the first entry is a float/complex (numpy or builtin)."""
    for row in rows:
        for x in row:
            return not isinstance(x, (float, complex, np.floating, np.complexfloating))
    return True


def as_exact(rows) -> list[list[GaussianRational]]:
    return [[exact(x) for x in row] for row in rows]


def as_numpy(rows, ncols: int | None = None) -> np.ndarray:
    rows = list(rows)
    if not rows:
        return np.zeros((0, ncols or 0), dtype=complex)
    return np.array([[to_complex(x) for x in row] for row in rows], dtype=complex)


def zeros(n: int, m: int) -> Matrix:
    return [[ZERO] * m for _ in range(n)]


def identity(n: int) -> Matrix:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def transpose(rows: Matrix) -> Matrix:
    return [list(col) for col in zip(*rows)]


def _zero_for(*mats) -> Any:
    return ZERO if all(is_exact_matrix(m) for m in mats) else 0j


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    zero = _zero_for(a, b)
    out = []
    for row in a:
        out_row = []
        for col in bt:
            s = zero
            for x, y in zip(row, col):
                if x and y:
                    s += x * y
            out_row.append(s)
        out.append(out_row)
    return out


def matvec(a: Matrix, v: Sequence) -> list:
    zero = _zero_for(a, [v])
    out = []
    for row in a:
        s = zero
        for x, y in zip(row, v):
            if x and y:
                s += x * y
        out.append(s)
    return out


def dot(u: Sequence, v: Sequence):
    s = _zero_for([u], [v])
    for x, y in zip(u, v):
        if x and y:
            s += x * y
    return s


def rref(rows: Matrix, ncols: int | None = None, tol: float | None = None) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns).

    Pivot columns are taken left to right.  Exact input uses the first nonzero
    entry as pivot; approximate input picks the largest entry in the column
    and treats anything below ``tol`` (relative) as zero.
    """
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0]) if ncols is None else ncols
    if not is_exact_matrix(m):
        return _rref_numeric(m, ncols, tol)
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = ONE / m[r][c]
        m[r] = [x * inv if x else x for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y if y else x for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def _rref_numeric(rows, ncols: int, tol: float | None) -> tuple[Matrix, list[int]]:
    tol = DEFAULT_TOL if tol is None else tol
    a = as_numpy(rows)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == a.shape[0]:
            break
        piv = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[piv, c]) <= tol * scale:
            a[r:, c] = 0
            continue
        a[[r, piv]] = a[[piv, r]]
        a[r] = a[r] / a[r, c]
        for i in range(a.shape[0]):
            if i != r:
                a[i] = a[i] - a[i, c] * a[r]
        a[:, c][np.abs(a[:, c]) <= tol * scale] = 0
        a[r, c] = 1
        pivots.append(c)
        r += 1
    return [[complex(x) for x in row] for row in a[:r]], pivots


def rank(rows, tol: float | None = None) -> int:
    rows = list(rows)
    if not rows or not len(rows[0]):
        return 0
    if is_exact_matrix(rows):
        return len(rref(rows)[1])
    a = as_numpy(rows)
    return numeric_rank(a, tol)


def numeric_rank(a: np.ndarray, tol: float | None = None) -> int:
    tol = DEFAULT_TOL if tol is None else tol
    if a.size == 0:
        return 0
    _, r, _ = scipy.linalg.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if not len(diag) or diag[0] == 0:
        return 0
    return int(np.sum(diag > tol * max(1.0, diag[0])))


def nullspace(rows, ncols: int | None = None, tol: float | None = None) -> list[list]:
    """Basis of {v : rows @ v = 0}.

    Exact: one vector per free column, with a 1 in that column (the usual
    RREF kernel basis, ordered by free column).
    """
    rows = list(rows)
    if ncols is None:
        ncols = len(rows[0])
    if not rows:
        return identity(ncols) if ncols else []
    if is_exact_matrix(rows):
        red, pivots = rref(rows, ncols)
        free = [c for c in range(ncols) if c not in pivots]
        basis = []
        for f in free:
            v = [ZERO] * ncols
            v[f] = ONE
            for i, p in enumerate(pivots):
                v[p] = -red[i][f]
            basis.append(v)
        return basis
    a = as_numpy(rows)
    ns = scipy.linalg.null_space(a, rcond=DEFAULT_TOL if tol is None else tol)
    return [list(col) for col in ns.T]


def left_nullspace(rows, tol: float | None = None) -> list[list]:
    rows = list(rows)
    return nullspace(transpose(rows), len(rows), tol)


def independent_rows(rows, tol: float | None = None) -> list[int]:
    """Indices of a greedy (first-come) maximal independent subset of rows."""
    rows = list(rows)
    chosen: list[int] = []
    current = 0
    for i, row in enumerate(rows):
        if rank([rows[j] for j in chosen] + [row], tol) > current:
            chosen.append(i)
            current += 1
    return chosen


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(row) + e for row, e in zip(a, identity(n))]
    red, pivots = rref(aug, n)
    if pivots != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in red]


def det(a: Matrix):
    """Exact determinant by elimination."""
    m = [list(r) for r in a]
    n = len(m)
    d = ONE
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c]), None)
        if piv is None:
            return ZERO
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = -d
        d *= m[c][c]
        inv = ONE / m[c][c]
        for i in range(c + 1, n):
            if m[i][c]:
                f = m[i][c] * inv
                m[i] = [x - f * y if y else x for x, y in zip(m[i], m[c])]
    return d


def solve_left(rows: Matrix, target: Sequence) -> list | None:
    """Coefficients c with c @ rows == target, or None if target is not in the row span."""
    n = len(rows)
    ncols = len(target)
    aug = [list(col) + [t] for col, t in zip(transpose(rows) if rows else [[]] * ncols, target)]
    red, pivots = rref(aug, n + 1)
    if n in pivots:
        return None
    c = [ZERO] * n
    for i, p in enumerate(pivots):
        c[p] = red[i][n]
    return c


def row_space_contains(rows, vec, tol: float | None = None) -> bool:
    rows = list(rows)
    return rank(rows + [list(vec)], tol) == rank(rows, tol)


def orthonormal_row_basis(a: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis (as rows) of the row space of a complex matrix."""
    tol = DEFAULT_TOL if tol is None else tol
    if a.size == 0:
        return np.zeros((0, a.shape[1] if a.ndim == 2 else 0), dtype=complex)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    if not len(s) or s[0] == 0:
        return np.zeros((0, a.shape[1]), dtype=complex)
    r = int(np.sum(s > tol * max(1.0, s[0])))
    return vh[:r]


def is_zero_vector(v, tol: float | None = None) -> bool:
    return all(is_zero(x, tol) for x in v)
