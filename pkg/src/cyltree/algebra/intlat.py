"""Exact integer lattice arithmetic on row bases (Python ints, no overflow).

Lattices are tuples of row tuples in row-style Hermite normal form: pivots
strictly move right, are positive, and the entries above a pivot lie in
``[0, pivot)``.  Zero rows are dropped, so ``len(hnf)`` is the rank.
"""

from functools import lru_cache


def _echelon(rows, pivot_cols):
    """Unimodular row reduction pivoting only on the first ``pivot_cols`` columns."""
    A = [list(r) for r in rows]
    r = 0
    for col in range(pivot_cols):
        while True:
            nz = [i for i in range(r, len(A)) if A[i][col] != 0]
            if not nz:
                break
            i0 = min(nz, key=lambda i: abs(A[i][col]))
            A[r], A[i0] = A[i0], A[r]
            piv = A[r][col]
            clean = True
            for i in range(r + 1, len(A)):
                a = A[i][col]
                if a:
                    q = a // piv
                    if q:
                        A[i] = [x - q * y for x, y in zip(A[i], A[r])]
                    if A[i][col]:
                        clean = False
            if clean:
                break
        if r < len(A) and A[r][col] != 0:
            if A[r][col] < 0:
                A[r] = [-x for x in A[r]]
            piv = A[r][col]
            for i in range(r):
                q = A[i][col] // piv
                if q:
                    A[i] = [x - q * y for x, y in zip(A[i], A[r])]
            r += 1
    return A, r


def hnf(rows, n=None):
    rows = [tuple(int(x) for x in row) for row in rows]
    if n is None:
        n = len(rows[0]) if rows else 0
    for row in rows:
        if len(row) != n:
            raise ValueError(f"row {row} does not have length {n}")
    A, r = _echelon(rows, n)
    return tuple(tuple(row) for row in A[:r])


def rank(lattice):
    return len(lattice)


def left_kernel(rows, n):
    """Basis of ``{y : y @ M == 0}`` for the matrix ``M`` with the given rows."""
    m = len(rows)
    aug = [list(row) + [1 if j == i else 0 for j in range(m)] for i, row in enumerate(rows)]
    A, r = _echelon(aug, n)
    return [tuple(row[n:]) for row in A[r:]]


@lru_cache(maxsize=1 << 16)
def join(a, b, n):
    return hnf(list(a) + list(b), n)


@lru_cache(maxsize=1 << 16)
def contains(a, b, n):
    """True iff lattice ``b`` is a sublattice of ``a``."""
    return join(a, b, n) == a


@lru_cache(maxsize=1 << 16)
def intersect(a, b, n):
    if not a or not b:
        return ()
    rows = list(a) + list(b)
    ker = left_kernel(rows, n)
    vecs = []
    for y in ker:
        ya = y[: len(a)]
        vecs.append(tuple(sum(c * row[j] for c, row in zip(ya, a)) for j in range(n)))
    return hnf(vecs, n)


@lru_cache(maxsize=1 << 16)
def saturation(a, n):
    """The lattice of integer points in the rational span of ``a``."""
    if not a:
        return ()
    cols = [tuple(row[j] for row in a) for j in range(n)]
    null = left_kernel(cols, len(a))
    if not null:
        return hnf([tuple(1 if i == j else 0 for j in range(n)) for i in range(n)], n)
    coord_rows = [tuple(v[i] for v in null) for i in range(n)]
    return hnf(left_kernel(coord_rows, len(null)), n)
