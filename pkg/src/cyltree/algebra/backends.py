import json
from dataclasses import dataclass, field, replace
from math import gcd

from ..errors import NotInFamily, ParseError, Unsupported, UnknownGenerator, UnsupportedConjugator
from . import intlat, words


@dataclass(frozen=True, order=True)
class StabilizerHandle:
    """Canonical token for a subgroup; only meaningful together with its algebra."""

    backend: str
    payload: object

    def __repr__(self):
        return f"<{self.backend} {self.payload!r}>"


class Algebra:
    """Capability set shared by all backends.

    ``intersect`` and ``join`` are optional and raise :class:`Unsupported`
    when absent.
    """

    backend_id = "?"

    def handle(self, payload):
        return StabilizerHandle(self.backend_id, payload)

    def normalize(self, raw):
        raise NotImplementedError

    def to_json(self, h):
        raise NotImplementedError

    def key(self, h):
        """Stable string for a handle, used in canonical forms and node names."""
        return json.dumps(self.to_json(h), separators=(",", ":"))

    def class_id(self, h):
        """Stable string naming the equivalence class of an in-family handle."""
        raise NotImplementedError

    def equivalent(self, a, b):
        self._require_family(a, b)
        return self.class_id(a) == self.class_id(b)

    def includes(self, a, b):
        raise NotImplementedError

    def conjugate(self, g, a):
        raise NotImplementedError

    def intersect(self, a, b):
        raise Unsupported(f"backend {self.backend_id} cannot intersect")

    def join(self, a, b):
        raise Unsupported(f"backend {self.backend_id} cannot join")

    def in_family(self, a):
        raise NotImplementedError

    def is_finite(self, a):
        raise NotImplementedError

    def is_trivial(self, a):
        raise NotImplementedError

    def trivial(self):
        raise Unsupported(f"backend {self.backend_id} has no trivial handle")

    def has_intersect(self):
        return False

    def generator_names(self):
        return None

    def _require_family(self, *hs):
        for h in hs:
            if not self.in_family(h):
                raise NotInFamily(f"{self.key(h)} is not in the family")

    def extends(self, other):
        """True when every handle of ``other`` means the same subgroup here."""
        return self.config_json() == other.config_json()

    def config_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class WordAlgebra(Algebra):
    """Cyclic subgroups ``<w>`` of the free group of the given rank.

    A subgroup is stored as the shortlex-least of ``w`` and ``w^-1``; the word
    is freely reduced but not cyclically reduced, so conjugate subgroups stay
    distinct.
    """

    rank: int = 2
    backend_id = "W"

    def __post_init__(self):
        if self.rank < 1:
            raise ParseError("W backend needs rank >= 1")

    def word(self, raw):
        if isinstance(raw, (tuple, list)) and all(isinstance(x, int) for x in raw):
            w = words.reduce_word(raw)
            if any(abs(x) > self.rank or x == 0 for x in w):
                raise ParseError(f"letters {raw!r} outside alphabet of rank {self.rank}")
            return w
        return words.parse_word(raw, self.rank)

    def normalize(self, raw):
        if isinstance(raw, StabilizerHandle):
            raw = raw.payload
        return self.handle(words.canonical_generator(self.word(raw)))

    def from_word(self, w):
        return self.handle(words.canonical_generator(words.reduce_word(w)))

    def to_json(self, h):
        return words.format_word(h.payload)

    def root(self, h):
        """``(canonical root, exponent)`` of the generator of ``h``."""
        r, k = words.primitive_root(h.payload)
        return words.canonical_generator(r), k

    def class_id(self, h):
        return words.format_word(self.root(h)[0])

    def includes(self, a, b):
        if not b.payload:
            return True
        if not a.payload:
            return False
        ra, ka = self.root(a)
        rb, kb = self.root(b)
        return ra == rb and kb % ka == 0

    def conjugate(self, g, a):
        g = self.word(g)
        return self.from_word(words.multiply(words.inverse(g), a.payload, g))

    def intersect(self, a, b):
        if not a.payload or not b.payload:
            return self.trivial()
        ra, ka = self.root(a)
        rb, kb = self.root(b)
        if ra != rb:
            return self.trivial()
        return self.from_word(words.power(ra, words.lcm(ka, kb)))

    def join(self, a, b):
        if not a.payload:
            return b
        if not b.payload:
            return a
        ra, ka = self.root(a)
        rb, kb = self.root(b)
        if ra != rb:
            raise Unsupported("subgroup generated by two non-commuting cyclic subgroups is not cyclic")
        return self.from_word(words.power(ra, gcd(ka, kb)))

    def has_intersect(self):
        return True

    def in_family(self, a):
        return bool(a.payload)

    def is_finite(self, a):
        return not a.payload

    def is_trivial(self, a):
        return not a.payload

    def trivial(self):
        return self.handle(())

    def config_json(self):
        return {"backend": "W", "rank": self.rank}


@dataclass(frozen=True)
class LatticeAlgebra(Algebra):
    """Sublattices of ``Z^dim``; the family is the lattices of rank ``family_rank``.

    The ambient group is abelian, so the only admissible conjugator is the
    identity.
    """

    dim: int = 2
    family_rank: int = 0
    backend_id = "L"

    def __post_init__(self):
        if self.dim < 1:
            raise ParseError("L backend needs dim >= 1")
        if self.family_rank == 0:
            object.__setattr__(self, "family_rank", self.dim)
        if not 1 <= self.family_rank <= self.dim:
            raise ParseError("L backend needs 1 <= family_rank <= dim")

    def normalize(self, raw):
        if isinstance(raw, StabilizerHandle):
            raw = raw.payload
        if not isinstance(raw, (list, tuple)):
            raise ParseError(f"lattice must be a list of rows, got {raw!r}")
        rows = []
        for row in raw:
            if not isinstance(row, (list, tuple)) or len(row) != self.dim:
                raise ParseError(f"row {row!r} is not a vector of length {self.dim}")
            if not all(isinstance(x, int) and not isinstance(x, bool) for x in row):
                raise ParseError(f"row {row!r} has non-integer entries")
            rows.append(tuple(row))
        return self.handle(intlat.hnf(rows, self.dim))

    def to_json(self, h):
        return [list(r) for r in h.payload]

    def class_id(self, h):
        return json.dumps([list(r) for r in intlat.saturation(h.payload, self.dim)], separators=(",", ":"))

    def equivalent(self, a, b):
        self._require_family(a, b)
        return intlat.saturation(a.payload, self.dim) == intlat.saturation(b.payload, self.dim)

    def includes(self, a, b):
        ra, rb = len(a.payload), len(b.payload)
        if rb > ra:
            return False
        if rb == ra and rb and intlat.saturation(a.payload, self.dim) != intlat.saturation(b.payload, self.dim):
            return False
        return intlat.contains(a.payload, b.payload, self.dim)

    def conjugate(self, g, a):
        if g in (None, "", "1", "e", "id") or (isinstance(g, (list, tuple)) and not any(g)):
            return a
        raise UnsupportedConjugator(f"lattices only admit the identity conjugator, got {g!r}")

    def intersect(self, a, b):
        return self.handle(intlat.intersect(a.payload, b.payload, self.dim))

    def join(self, a, b):
        return self.handle(intlat.join(a.payload, b.payload, self.dim))

    def has_intersect(self):
        return True

    def in_family(self, a):
        return len(a.payload) == self.family_rank

    def is_finite(self, a):
        return not a.payload

    def is_trivial(self, a):
        return not a.payload

    def trivial(self):
        return self.handle(())

    def config_json(self):
        return {"backend": "L", "dim": self.dim, "family_rank": self.family_rank}


@dataclass(frozen=True)
class LabelInfo:
    cls: str = None
    in_family: bool = False
    finite: bool = False
    trivial: bool = False


@dataclass(frozen=True, eq=False)
class PartitionAlgebra(Algebra):
    """A declared table of labels, classes, inclusions and conjugation maps.

    Inclusion pairs ``(sub, sup)`` are closed reflexively and transitively on
    load.  Axiom 2 consistency is *not* enforced here; it is reported by the
    admissibility validator.
    """

    labels: dict = field(default_factory=dict)
    inclusions: frozenset = frozenset()
    generators: dict = field(default_factory=dict)
    intersections: dict = field(default_factory=dict)
    joins: dict = field(default_factory=dict)
    backend_id = "P"

    @classmethod
    def from_table(cls, table):
        labels = {}
        classes = table.get("classes", {})
        for name, info in table.get("labels", {}).items():
            info = info or {}
            labels[name] = info
        owner = {}
        for cname, members in classes.items():
            for m in members:
                if m in owner:
                    raise ParseError(f"label {m!r} is in two classes")
                owner[m] = cname
                labels.setdefault(m, {})
        final = {}
        for name, info in labels.items():
            c = owner.get(name)
            final[name] = LabelInfo(
                cls=c,
                in_family=bool(info.get("in_family", c is not None)),
                finite=bool(info.get("finite", False)),
                trivial=bool(info.get("trivial", False)),
            )
            if final[name].in_family and c is None:
                raise ParseError(f"in-family label {name!r} has no class")
        pairs = set()
        for pair in table.get("inclusions", []):
            if len(pair) != 2 or any(p not in final for p in pair):
                raise ParseError(f"bad inclusion pair {pair!r}")
            pairs.add(tuple(pair))
        closure = _closure(pairs, final)
        gens = {}
        for g, mapping in table.get("generators", {}).items():
            for src, dst in mapping.items():
                if src not in final or dst not in final:
                    raise ParseError(f"generator {g!r} maps unknown label {src!r} or {dst!r}")
            gens[g] = dict(mapping)
        inter = {}
        for a, b, c in table.get("intersections", []):
            for x in (a, b, c):
                if x not in final:
                    raise ParseError(f"intersection mentions unknown label {x!r}")
            inter[frozenset((a, b))] = c
        joins = {}
        for a, b, c in table.get("joins", []):
            for x in (a, b, c):
                if x not in final:
                    raise ParseError(f"join mentions unknown label {x!r}")
            joins[frozenset((a, b))] = c
        return cls(labels=final, inclusions=frozenset(closure), generators=gens, intersections=inter, joins=joins)

    def normalize(self, raw):
        if isinstance(raw, StabilizerHandle):
            raw = raw.payload
        if not isinstance(raw, str) or raw not in self.labels:
            raise ParseError(f"unknown label {raw!r}")
        return self.handle(raw)

    def to_json(self, h):
        return h.payload

    def class_id(self, h):
        return self.labels[h.payload].cls

    def includes(self, a, b):
        return (b.payload, a.payload) in self.inclusions

    def conjugate(self, g, a):
        if g in (None, "", "1", "e", "id"):
            return a
        if g not in self.generators:
            raise UnknownGenerator(f"generator {g!r} is not declared")
        return self.handle(self.generators[g].get(a.payload, a.payload))

    def intersect(self, a, b):
        if a == b:
            return a
        if self.includes(a, b):
            return b
        if self.includes(b, a):
            return a
        key = frozenset((a.payload, b.payload))
        if key not in self.intersections:
            raise Unsupported(f"no declared intersection for {a.payload!r}, {b.payload!r}")
        return self.handle(self.intersections[key])

    def join(self, a, b):
        if self.includes(a, b):
            return a
        if self.includes(b, a):
            return b
        key = frozenset((a.payload, b.payload))
        if key not in self.joins:
            raise Unsupported(f"no declared join for {a.payload!r}, {b.payload!r}")
        return self.handle(self.joins[key])

    def has_intersect(self):
        return bool(self.intersections)

    def in_family(self, a):
        return self.labels[a.payload].in_family

    def is_finite(self, a):
        return self.labels[a.payload].finite

    def is_trivial(self, a):
        return self.labels[a.payload].trivial

    def generator_names(self):
        return sorted(self.generators)

    def all_handles(self):
        return [self.handle(x) for x in sorted(self.labels)]

    def with_join(self, hs):
        """Extend the table by the subgroup generated by ``hs`` when it is not declared.

        The new label contains everything below a member and lies below every
        declared common upper bound, so it is exactly the least upper bound of
        ``hs`` among the table's labels.  Returns ``(algebra, handle)``.
        """
        names = sorted({h.payload for h in hs})
        for top in names:
            if all((n, top) in self.inclusions for n in names):
                return self, self.handle(top)
        name = "join(" + ",".join(names) + ")"
        if name in self.labels:
            return self, self.handle(name)
        labels = dict(self.labels)
        labels[name] = LabelInfo(cls=None, in_family=False, finite=False, trivial=False)
        incl = set(self.inclusions)
        incl.add((name, name))
        incl |= {(x, name) for x, y in self.inclusions if y in names}
        incl |= {(name, c) for c in self.labels if all((n, c) in self.inclusions for n in names)}
        return replace(self, labels=labels, inclusions=frozenset(incl)), self.handle(name)

    def extends(self, other):
        if not isinstance(other, PartitionAlgebra):
            return False
        if any(self.labels.get(n) != info for n, info in other.labels.items()):
            return False
        old = set(other.labels)
        if {(a, b) for a, b in self.inclusions if a in old and b in old} != set(other.inclusions):
            return False
        return all(self.intersections.get(k) == v for k, v in other.intersections.items()) and all(
            self.joins.get(k) == v for k, v in other.joins.items()
        ) and self.generators == other.generators

    def config_json(self):
        classes = {}
        labels = {}
        for name in sorted(self.labels):
            info = self.labels[name]
            if info.cls is not None:
                classes.setdefault(info.cls, []).append(name)
            entry = {}
            if info.in_family != (info.cls is not None):
                entry["in_family"] = info.in_family
            if info.finite:
                entry["finite"] = True
            if info.trivial:
                entry["trivial"] = True
            labels[name] = entry
        out = {
            "backend": "P",
            "labels": labels,
            "classes": {c: classes[c] for c in sorted(classes)},
            "inclusions": sorted([list(p) for p in self.inclusions if p[0] != p[1]]),
        }
        if self.generators:
            out["generators"] = {g: dict(sorted(m.items())) for g, m in sorted(self.generators.items())}
        if self.intersections:
            out["intersections"] = sorted(sorted(k) + [v] for k, v in self.intersections.items())
        if self.joins:
            out["joins"] = sorted(sorted(k) + [v] for k, v in self.joins.items())
        return out


def _closure(pairs, labels):
    up = {x: {x} for x in labels}
    for a, b in pairs:
        up[a].add(b)
    changed = True
    while changed:
        changed = False
        for x in labels:
            new = set(up[x])
            for y in up[x]:
                new |= up[y]
            if new != up[x]:
                up[x] = new
                changed = True
    return {(x, y) for x in labels for y in up[x]}


def algebra_from_json(cfg):
    if not isinstance(cfg, dict) or "backend" not in cfg:
        raise ParseError("algebra block needs a 'backend' field")
    b = cfg["backend"]
    if b == "W":
        return WordAlgebra(rank=int(cfg.get("rank", 2)))
    if b == "L":
        return LatticeAlgebra(dim=int(cfg.get("dim", 2)), family_rank=int(cfg.get("family_rank", 0)))
    if b == "P":
        return PartitionAlgebra.from_table(cfg)
    raise ParseError(f"unknown backend {b!r}")
