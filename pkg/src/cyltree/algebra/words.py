"""Reduced words in a free group.

A word is a tuple of non-zero ints: ``i`` stands for the i-th generator
(``1 -> a``, ``2 -> b``, ...) and ``-i`` for its inverse.
"""

import re
from functools import lru_cache
from math import gcd

from ..errors import ParseError

_TOKEN = re.compile(r"([a-z])\s*('|⁻¹|\^-1)?")


def reduce_word(word):
    out = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse(word):
    return tuple(-x for x in reversed(word))


def multiply(*words):
    return reduce_word([x for w in words for x in w])


def power(word, k):
    if k < 0:
        word, k = inverse(word), -k
    return reduce_word(word * k)


def is_reduced(word):
    return all(word[i] != -word[i + 1] for i in range(len(word) - 1))


def cyclic_core(word):
    """Split a reduced word as ``u + core + inverse(u)`` with a cyclically reduced core."""
    i, j = 0, len(word) - 1
    while i < j and word[i] == -word[j]:
        i += 1
        j -= 1
    return word[:i], word[i : j + 1]


def _period(core):
    n = len(core)
    for p in range(1, n + 1):
        if n % p == 0 and core[:p] * (n // p) == core:
            return p
    return n


@lru_cache(maxsize=1 << 16)
def primitive_root(word):
    """Return ``(root, k)`` with ``word == root**k`` and ``k`` maximal.

    The empty word returns ``((), 0)``.
    """
    if not word:
        return (), 0
    u, core = cyclic_core(word)
    p = _period(core)
    root = u + core[:p] + inverse(u)
    return root, len(core) // p


def letter_key(x):
    return (abs(x), x < 0)


def word_key(word):
    return (len(word), tuple(letter_key(x) for x in word))


def canonical_generator(word):
    """Pick the representative of ``{word, word^-1}`` used as a subgroup label."""
    inv = inverse(word)
    return min(word, inv, key=word_key)


def parse_word(text, rank=None):
    if not isinstance(text, str):
        raise ParseError(f"word must be a string, got {text!r}")
    s = text.strip()
    if s in ("", "1", "e"):
        return ()
    pos = 0
    letters = []
    while pos < len(s):
        if s[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(s, pos)
        if not m:
            raise ParseError(f"malformed word {text!r} at position {pos}")
        g = ord(m.group(1)) - ord("a") + 1
        if rank is not None and g > rank:
            raise ParseError(f"letter {m.group(1)!r} outside alphabet of rank {rank}")
        letters.append(-g if m.group(2) else g)
        pos = m.end()
    return reduce_word(letters)


def format_word(word):
    return " ".join(chr(ord("a") + abs(x) - 1) + ("'" if x < 0 else "") for x in word)


def all_reduced_words(rank, max_len):
    """Every reduced word of length <= max_len, shortest first."""
    letters = [i for g in range(1, rank + 1) for i in (g, -g)]
    layer = [()]
    out = [()]
    for _ in range(max_len):
        layer = [w + (x,) for w in layer for x in letters if not w or w[-1] != -x]
        out.extend(layer)
    return out


def lcm(a, b):
    return a * b // gcd(a, b)
