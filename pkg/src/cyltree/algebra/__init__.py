"""Stabilizer algebras: computable models of a family of subgroups and an
admissible equivalence relation on it.

Three backends are provided:

* ``W``: cyclic subgroups of a free group, up to commensurability.
* ``L``: sublattices of ``Z^n``; the family is the rank-``r`` sublattices and
  the relation is commensurability (same rational span).
* ``P``: an explicit, declared partition table.

All handles are canonical at construction, so handle equality is equality of
subgroups.
"""

from .backends import (
    Algebra,
    LatticeAlgebra,
    PartitionAlgebra,
    StabilizerHandle,
    WordAlgebra,
    algebra_from_json,
)

__all__ = [
    "Algebra",
    "LatticeAlgebra",
    "PartitionAlgebra",
    "StabilizerHandle",
    "WordAlgebra",
    "algebra_from_json",
]
