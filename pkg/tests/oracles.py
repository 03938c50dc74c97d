"""Independent oracles: brute force over words and box enumeration over lattices.

Nothing here calls into the package's word or lattice code.
"""

import itertools
from math import gcd

import numpy as np


# ---------------------------------------------------------------- free group words


def free_reduce(word):
    out = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def reduced_words(rank, max_len):
    letters = [s * g for g in range(1, rank + 1) for s in (1, -1)]
    out = []
    for n in range(max_len + 1):
        for w in itertools.product(letters, repeat=n):
            if all(w[i] != -w[i + 1] for i in range(n - 1)):
                out.append(w)
    return out


def root_table(rank, max_len):
    """For every reduced word of length ``<= max_len``: the largest ``k`` with ``w = r^k`` and that ``r``.

    Found by raising every short word to every power and keeping the largest
    exponent that lands on ``w``.
    """
    words = reduced_words(rank, max_len)
    best = {w: (w, 1) for w in words if w}
    for r in words:
        if not r:
            continue
        for k in range(2, max_len + 1):
            p = free_reduce(r * k)
            if len(p) > max_len:
                break
            if p and p in best and k > best[p][1]:
                best[p] = (r, k)
    return best


# ---------------------------------------------------------------- lattices in Z^2

BOX = 24
_GRID = np.array([(x, y) for x in range(-BOX, BOX + 1) for y in range(-BOX, BOX + 1)], dtype=np.int64)


def nonsingular_bases(lo=-3, hi=3):
    for a, b, c, d in itertools.product(range(lo, hi + 1), repeat=4):
        if a * d - b * c:
            yield ((a, b), (c, d))


def det2(rows):
    (a, b), (c, d) = rows
    return a * d - b * c


def member(rows, p):
    """``p`` is an integer combination of the two rows (Cramer's rule)."""
    (a, b), (c, d) = rows
    D = a * d - b * c
    x, y = p
    # p = s*(a, b) + t*(c, d)
    s_num = x * d - y * c
    t_num = a * y - b * x
    return s_num % D == 0 and t_num % D == 0


def box_mask(rows):
    (a, b), (c, d) = rows
    D = a * d - b * c
    s_num = _GRID[:, 0] * d - _GRID[:, 1] * c
    t_num = a * _GRID[:, 1] - b * _GRID[:, 0]
    return (s_num % D == 0) & (t_num % D == 0)


def sum_covolume(a_rows, b_rows):
    """Covolume of ``A + B``: the gcd of the 2x2 minors of the stacked generators."""
    rows = list(a_rows) + list(b_rows)
    g = 0
    for i, j in itertools.combinations(range(len(rows)), 2):
        g = gcd(g, det2((rows[i], rows[j])))
    return abs(g)


def intersection_covolume(a_rows, b_rows):
    return abs(det2(a_rows)) * abs(det2(b_rows)) // sum_covolume(a_rows, b_rows)
