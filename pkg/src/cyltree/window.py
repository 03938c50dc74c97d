"""Finite labeled tree windows, their validation, cylinders, and maps between them.

A window is a finite piece of a G-tree: a simplicial tree whose edges carry
stabilizer handles, with optional vertex stabilizers and flags marking where
the window was truncated.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property

from . import treeutil
from .errors import DisconnectedClass, IllegalMove, Unsupported
from .treeutil import ekey


@dataclass(frozen=True)
class TreeAutomorphism:
    """A generator of the action, known only through a partial vertex map."""

    name: str
    vertex_map: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class GTreeWindow:
    algebra: object
    vertices: tuple
    edges: tuple
    edge_stab: dict
    vertex_stab: dict = field(default_factory=dict)
    boundary: frozenset = frozenset()
    generators: tuple = ()
    relative_marks: tuple = ()
    small: dict = field(default_factory=dict)
    # G_Y declared for the cylinder containing the keyed edge
    cylinder_stabs: dict = field(default_factory=dict)
    # upper bounds for edges whose edge_stab is only a lower bound
    edge_upper: dict = field(default_factory=dict)
    declared: dict = field(default_factory=dict)

    @classmethod
    def build(cls, algebra, vertices, edges, **kw):
        """Normalize ids and edge keys; ``edges`` is a list of ``(u, v, handle)``."""
        vs = tuple(sorted(set(vertices)))
        es, stab = [], {}
        for u, v, h in edges:
            k = ekey(u, v)
            es.append(k)
            stab[k] = h
        return cls(algebra=algebra, vertices=vs, edges=tuple(sorted(es)), edge_stab=stab, **kw)

    @cached_property
    def adj(self):
        return treeutil.adjacency(self.vertices, self.edges)

    @cached_property
    def is_tree(self):
        return len(set(self.edges)) == len(self.edges) and treeutil.is_tree(self.vertices, self.edges)

    def incident(self, v):
        return [ekey(v, y) for y in self.adj[v]]

    def path_edges(self, a, b):
        return treeutil.path_edges(self.adj, a, b)

    def extra_classes(self):
        return list(self.declared.get("extra_classes", []))

    @cached_property
    def present_handles(self):
        """Every handle the window mentions, plus the whole table for P."""
        hs = set(self.edge_stab.values()) | set(self.vertex_stab.values())
        hs |= set(self.cylinder_stabs.values()) | set(self.edge_upper.values())
        hs |= set(self.extra_classes())
        if hasattr(self.algebra, "all_handles"):
            hs |= set(self.algebra.all_handles())
        return sorted(hs, key=self.algebra.key)

    @cached_property
    def family_handles(self):
        return [h for h in self.present_handles if self.algebra.in_family(h)]

    @cached_property
    def sandwich_closed(self):
        """``a ⊆ h ⊆ b`` with ``a, b`` in the family forces ``h`` in the family, over present handles."""
        return not sandwich_violations(self.algebra, self.present_handles, limit=1)

    def small_flag(self, v):
        """Declared value, else computed from present handles, else ``None``."""
        if v in self.small:
            return self.small[v]
        g = self.vertex_stab.get(v)
        if g is None:
            return None
        A = self.algebra
        return A.in_family(g) or any(A.includes(h, g) for h in self.family_handles)

    def with_changes(self, **kw):
        return replace(self, **kw)


def sandwich_violations(A, handles, limit=None):
    """Triples ``(a, h, b)`` of handles with ``a ⊆ h ⊆ b``, ``a, b`` in the family, ``h`` not."""
    fam = [h for h in handles if A.in_family(h)]
    out = []
    for h in handles:
        if A.in_family(h):
            continue
        below = [a for a in fam if A.includes(h, a)]
        if not below:
            continue
        for b in fam:
            if A.includes(b, h):
                out.append((below[0], h, b))
                if limit and len(out) >= limit:
                    return out
                break
    return out


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    def add(self, kind, **info):
        self.violations.append({"kind": kind, **info})

    @property
    def ok(self):
        return not self.violations

    def kinds(self):
        return [v["kind"] for v in self.violations]

    def to_json(self):
        return {"ok": self.ok, "violations": self.violations}


def validate_window(w):
    """Structural checks; an empty report means the window is a valid E-tree window."""
    rep = ValidationReport()
    A = w.algebra
    vset = set(w.vertices)
    for u, v in w.edges:
        if u not in vset or v not in vset:
            rep.add("UnknownVertex", edge=[u, v])
        if u == v:
            rep.add("NotATree", reason="loop", edge=[u, v])
    if len(set(w.edges)) != len(w.edges):
        rep.add("NotATree", reason="repeated edge")
    if not rep.ok:
        return rep
    if not w.is_tree:
        rep.add("NotATree", reason="cycle or disconnected")
        return rep
    for e in w.edges:
        if not A.in_family(w.edge_stab[e]):
            rep.add("NotInFamily", edge=list(e), stab=A.to_json(w.edge_stab[e]))
    for v, g in w.vertex_stab.items():
        if v not in vset:
            rep.add("UnknownVertex", vertex=v)
            continue
        for e in w.incident(v):
            if not A.includes(g, w.edge_stab[e]):
                rep.add("VertexEdgeInclusion", vertex=v, edge=list(e))
    for name, vs in (("boundary", w.boundary), ("small", w.small)):
        for v in vs:
            if v not in vset:
                rep.add("UnknownVertex", vertex=v, field=name)
    for mark in w.relative_marks:
        for v in mark:
            if v not in vset:
                rep.add("UnknownVertex", vertex=v, field="relative_marks")
    for e, h in w.cylinder_stabs.items():
        if e not in w.edge_stab:
            rep.add("UnknownEdge", edge=list(e), field="cylinder_stabs")
        elif not A.includes(h, w.edge_stab[e]):
            rep.add("CylinderStabInclusion", edge=list(e))
    for e, h in w.edge_upper.items():
        if e not in w.edge_stab:
            rep.add("UnknownEdge", edge=list(e), field="edge_upper")
        elif not A.includes(h, w.edge_stab[e]):
            rep.add("UpperBoundInclusion", edge=list(e))
    for g in w.generators:
        _check_generator(w, g, rep)
    return rep


def _check_generator(w, g, rep):
    A = w.algebra
    images = list(g.vertex_map.values())
    if len(set(images)) != len(images):
        rep.add("GeneratorNotInjective", generator=g.name)
    for x, y in g.vertex_map.items():
        if x not in w.adj or y not in w.adj:
            rep.add("UnknownVertex", generator=g.name, vertex=x if x not in w.adj else y)
            return
    for u, v in w.edges:
        if u in g.vertex_map and v in g.vertex_map:
            gu, gv = g.vertex_map[u], g.vertex_map[v]
            ge = ekey(gu, gv)
            if ge not in w.edge_stab:
                rep.add("GeneratorBreaksAdjacency", generator=g.name, edge=[u, v])
                continue
            try:
                expect = A.conjugate(g.name, w.edge_stab[(u, v)])
            except Exception as exc:  # unsupported conjugator or unknown generator
                rep.add("GeneratorUnsupported", generator=g.name, error=str(exc))
                return
            if expect != w.edge_stab[ge]:
                rep.add("GeneratorStabMismatch", generator=g.name, edge=[u, v])


def validate_admissibility(w):
    """Check axioms 1 and 2 on present handles and axiom 3 instantiated on the window."""
    rep = ValidationReport()
    A = w.algebra
    fam = w.family_handles
    # axiom 1
    names = [g.name for g in w.generators]
    for extra in A.generator_names() or []:
        if extra not in names:
            names.append(extra)
    for g in names:
        try:
            conj = {h: A.conjugate(g, h) for h in fam}
        except Exception as exc:
            rep.add("Axiom1Unsupported", generator=g, error=str(exc))
            continue
        for h, gh in conj.items():
            if not A.in_family(gh):
                rep.add("Axiom1Violation", generator=g, a=A.to_json(h), reason="conjugate leaves family")
        for i, a in enumerate(fam):
            for b in fam[i + 1 :]:
                if A.class_id(a) == A.class_id(b):
                    ga, gb = conj[a], conj[b]
                    if A.in_family(ga) and A.in_family(gb) and not A.equivalent(ga, gb):
                        rep.add("Axiom1Violation", generator=g, a=A.to_json(a), b=A.to_json(b))
    # axiom 2
    cls = {h: A.class_id(h) for h in fam}
    for i, a in enumerate(fam):
        for b in fam[i + 1 :]:
            if cls[a] != cls[b] and (A.includes(a, b) or A.includes(b, a)):
                sub, sup = (b, a) if A.includes(a, b) else (a, b)
                rep.add("Axiom2Violation", a=A.to_json(sub), b=A.to_json(sup))
    # axiom 3 on the window
    if w.is_tree and w.vertices:
        for v in _axiom3(w):
            rep.add("Axiom3Violation", **v)
    # declared cylinder stabilizers must contain their cylinder's edges
    if w.is_tree:
        for e, h in w.cylinder_stabs.items():
            if e not in w.edge_stab or not A.in_family(w.edge_stab[e]):
                continue
            c = A.class_id(w.edge_stab[e])
            for f in w.edges:
                s = w.edge_stab[f]
                if A.in_family(s) and A.class_id(s) == c and not A.includes(h, s):
                    rep.add("CylinderStabInclusion", edge=list(f), declared_on=list(e))
    return rep


def _axiom3(w):
    """For each class, every edge in the hull of the vertices it fixes must lie in the class."""
    A = w.algebra
    touched = {}
    for v in w.vertices:
        cands = [w.edge_stab[e] for e in w.incident(v)]
        g = w.vertex_stab.get(v)
        if g is not None and A.in_family(g):
            cands.append(g)
        for h in cands:
            if A.in_family(h):
                touched.setdefault(A.class_id(h), set()).add(v)
    root = w.vertices[0]
    order, parent = [], {root: None}
    stack = [root]
    while stack:
        x = stack.pop()
        order.append(x)
        for y in w.adj[x]:
            if y != parent[x]:
                parent[y] = x
                stack.append(y)
    out = []
    for c in sorted(touched):
        S = touched[c]
        cnt = {}
        for x in reversed(order):
            cnt[x] = (x in S) + sum(cnt[y] for y in w.adj[x] if y != parent[x])
        for x in order:
            p = parent[x]
            if p is None or not (0 < cnt[x] < len(S)):
                continue
            e = ekey(p, x)
            s = w.edge_stab[e]
            if not A.in_family(s) or A.class_id(s) != c:
                inside = _subtree(w, x, parent)
                a = min(S & inside)
                b = min(S - inside)
                out.append({"a": a, "b": b, "edge": list(e), "class": c})
    return out


def _subtree(w, x, parent):
    seen = {x}
    stack = [x]
    while stack:
        y = stack.pop()
        for z in w.adj[y]:
            if z != parent[y] and z not in seen:
                seen.add(z)
                stack.append(z)
    return seen


@dataclass(frozen=True)
class Cylinder:
    class_id: str
    edges: frozenset
    vertices: frozenset
    boundary: frozenset
    stabilizer: object = None
    truncated: bool = False
    representative: object = None

    def diameter(self, w):
        return treeutil.diameter(w.adj, self.vertices)

    @property
    def name(self):
        return "Y" + self.class_id


def compute_cylinders(w):
    """Partition the edges into cylinders, ordered by class id."""
    A = w.algebra
    groups = {}
    for e in w.edges:
        groups.setdefault(A.class_id(w.edge_stab[e]), []).append(e)
    count = {}
    for es in groups.values():
        for v in {x for e in es for x in e}:
            count[v] = count.get(v, 0) + 1
    cyls = []
    for c in sorted(groups):
        es = groups[c]
        vs = {x for e in es for x in e}
        sub = treeutil.adjacency(vs, es)
        dist, _ = treeutil.bfs(sub, min(vs))
        if len(dist) != len(vs):
            raise DisconnectedClass(f"class {c} is not connected in the window")
        stab = None
        for e in sorted(es):
            if e in w.cylinder_stabs:
                stab = w.cylinder_stabs[e]
                break
        rep = min((w.edge_stab[e] for e in es), key=A.key)
        cyls.append(
            Cylinder(
                class_id=c,
                edges=frozenset(es),
                vertices=frozenset(vs),
                boundary=frozenset(v for v in vs if count[v] > 1),
                stabilizer=stab,
                truncated=bool(vs & w.boundary),
                representative=rep,
            )
        )
    return cyls


@dataclass(frozen=True, eq=False)
class EquivariantMap:
    """A map of windows given on vertices; edges go to the geodesic between images."""

    source: GTreeWindow
    target: GTreeWindow
    vertex_map: dict

    @cached_property
    def edge_map(self):
        return {(u, v): tuple(self.target.path_edges(self.vertex_map[u], self.vertex_map[v])) for u, v in self.source.edges}

    @property
    def is_cellular(self):
        return all(len(p) <= 1 for p in self.edge_map.values())

    @property
    def is_collapse(self):
        return is_collapse_map(self)

    def compose(self, other):
        """``other o self``."""
        return EquivariantMap(self.source, other.target, {v: other.vertex_map[self.vertex_map[v]] for v in self.source.vertices})

    def well_formed(self):
        return set(self.vertex_map) == set(self.source.vertices) and all(
            y in self.target.adj for y in self.vertex_map.values()
        )


def is_collapse_map(f):
    """True iff ``x in [a, b]`` implies ``f(x) in [f(a), f(b)]`` for all vertices.

    For each source ``a``, it suffices to check ``f(x) in [f(a), f(y)]`` for
    every edge ``x -> y`` pointing away from ``a``: geodesics from a common
    point nest in a tree, so the condition propagates along every path.
    """
    s, t = f.source, f.target
    if not f.well_formed():
        return False
    dt = treeutil.all_distances(t.adj)
    fm = f.vertex_map
    for a in s.vertices:
        fa = fm[a]
        da = dt[fa]
        _, parent = treeutil.bfs(s.adj, a)
        for y, x in parent.items():
            if x is None:
                continue
            fx, fy = fm[x], fm[y]
            if da[fx] + dt[fx][fy] != da[fy]:
                return False
    return True


def is_collapse_map_bruteforce(f):
    """Direct triple enumeration; used as an oracle in tests."""
    s, t = f.source, f.target
    ds = treeutil.all_distances(s.adj)
    dt = treeutil.all_distances(t.adj)
    fm = f.vertex_map
    for a in s.vertices:
        for b in s.vertices:
            for x in s.vertices:
                if ds[a][x] + ds[x][b] == ds[a][b]:
                    if dt[fm[a]][fm[x]] + dt[fm[x]][fm[b]] != dt[fm[a]][fm[b]]:
                        return False
    return True


def _rekey_cylinder_stabs(w, dropped, new_edges_of):
    """Move declared cylinder stabilizers off dropped edges onto a surviving edge of the same class."""
    A = w.algebra
    out = {}
    for e, h in w.cylinder_stabs.items():
        if e not in dropped:
            out[new_edges_of(e)] = h
            continue
        c = A.class_id(w.edge_stab[e])
        for f in w.edges:
            if f not in dropped and A.class_id(w.edge_stab[f]) == c:
                out.setdefault(new_edges_of(f), h)
                break
    return out


def collapse_edges(w, edges):
    """Contract ``edges``; returns the collapsed window and the collapse map.

    A merged vertex is named by its least member.  Its stabilizer is the join
    of the members' stabilizers when every member has one; a declared table
    without that join is extended by a label for it (so the collapsed window
    may carry a larger table than ``w``).
    """
    A = w.algebra
    edges = {ekey(*e) for e in edges}
    for e in edges:
        if e not in w.edge_stab:
            raise IllegalMove(f"{e} is not an edge")
    rep = {v: v for v in w.vertices}

    def find(x):
        while rep[x] != x:
            rep[x] = rep[rep[x]]
            x = rep[x]
        return x

    for u, v in sorted(edges):
        ru, rv = find(u), find(v)
        if ru != rv:
            lo, hi = sorted((ru, rv))
            rep[hi] = lo
    members = {}
    for v in w.vertices:
        members.setdefault(find(v), []).append(v)
    vmap = {v: find(v) for v in w.vertices}
    new_edges = [(vmap[u], vmap[v], w.edge_stab[(u, v)]) for u, v in w.edges if (u, v) not in edges]
    vstab = {}
    small = {}
    for r, ms in members.items():
        if len(ms) == 1:
            if ms[0] in w.vertex_stab:
                vstab[r] = w.vertex_stab[ms[0]]
            if ms[0] in w.small:
                small[r] = w.small[ms[0]]
            continue
        if all(m in w.vertex_stab for m in ms):
            try:
                g = w.vertex_stab[ms[0]]
                for m in ms[1:]:
                    g = A.join(g, w.vertex_stab[m])
                vstab[r] = g
            except Unsupported:
                if hasattr(A, "with_join"):
                    A, vstab[r] = A.with_join([w.vertex_stab[m] for m in ms])
        if any(w.small.get(m) is False for m in ms):
            small[r] = False

    def new_key(e):
        return ekey(vmap[e[0]], vmap[e[1]])

    out = GTreeWindow.build(
        A,
        sorted(members),
        new_edges,
        vertex_stab=vstab,
        boundary=frozenset(vmap[v] for v in w.boundary),
        relative_marks=tuple(frozenset(vmap[v] for v in m) for m in w.relative_marks),
        small=small,
        cylinder_stabs=_rekey_cylinder_stabs(w, edges, new_key),
        edge_upper={new_key(e): h for e, h in w.edge_upper.items() if e not in edges},
        declared={k: v for k, v in w.declared.items() if k != "minimal"},
    )
    return out, EquivariantMap(w, out, vmap)


def elementary_move(w, move, allow_leaf=False):
    """Apply one elementary collapse or expansion.

    ``move`` is a dict: ``{"op": "collapse", "edge": [u, v]}`` contracts the
    edge into the endpoint whose stabilizer is strictly larger (or the second
    endpoint when both equal the edge stabilizer), and
    ``{"op": "expand", "vertex": v, "handle": H, "edges": [...], "new_vertex": id}``
    splits off a new vertex with stabilizer ``H`` carrying the listed edges.

    Collapsing a leaf whose stabilizer equals its edge's, or expanding with
    no moved edges, only happens in non-minimal trees and is refused unless
    ``allow_leaf``.
    """
    A = w.algebra
    op = move.get("op")
    if op == "collapse":
        e = ekey(*move["edge"])
        if e not in w.edge_stab:
            raise IllegalMove(f"{list(e)} is not an edge")
        ge = w.edge_stab[e]
        u, v = e
        cands = [x for x in (u, v) if w.vertex_stab.get(x) == ge]
        if not cands:
            raise IllegalMove("edge stabilizer equals neither endpoint stabilizer")
        if "into" in move:
            keep = move["into"]
            gone = u if keep == v else v
            if gone not in cands:
                raise IllegalMove("collapsed endpoint stabilizer differs from the edge stabilizer")
        else:
            gone = cands[0]
            keep = v if gone == u else u
        if len(w.adj[gone]) < 2 and not allow_leaf:
            raise IllegalMove("collapsing a leaf with stabilizer equal to its edge is a non-minimal move")
        return _contract_into(w, e, gone, keep)
    if op == "expand":
        v = move["vertex"]
        if v not in w.adj:
            raise IllegalMove(f"unknown vertex {v!r}")
        gv = w.vertex_stab.get(v)
        if gv is None:
            raise IllegalMove(f"vertex {v!r} has no stabilizer")
        H = A.normalize(move["handle"])
        if not A.in_family(H):
            raise IllegalMove("new edge stabilizer is not in the family")
        if not A.includes(gv, H):
            raise IllegalMove("new edge stabilizer is not contained in the vertex stabilizer")
        moved = [ekey(*e) for e in move.get("edges", [])]
        inc = set(w.incident(v))
        for e in moved:
            if e not in inc:
                raise IllegalMove(f"{list(e)} is not incident to {v!r}")
            if not A.includes(H, w.edge_stab[e]):
                raise IllegalMove(f"stabilizer of {list(e)} is not contained in the new vertex stabilizer")
        if not moved and not allow_leaf:
            raise IllegalMove("expansion without moved edges creates a non-minimal leaf")
        nv = move["new_vertex"]
        if nv in w.adj:
            raise IllegalMove(f"vertex id {nv!r} already used")
        moved = set(moved)

        def re(e):
            if e in moved:
                other = e[0] if e[1] == v else e[1]
                return ekey(nv, other)
            return e

        new_edges = [(*re(e), w.edge_stab[e]) for e in w.edges] + [(v, nv, H)]
        vstab = dict(w.vertex_stab)
        vstab[nv] = H
        return GTreeWindow.build(
            A,
            list(w.vertices) + [nv],
            new_edges,
            vertex_stab=vstab,
            boundary=w.boundary,
            relative_marks=w.relative_marks,
            small=dict(w.small),
            cylinder_stabs={re(e): h for e, h in w.cylinder_stabs.items()},
            edge_upper={re(e): h for e, h in w.edge_upper.items()},
            declared=dict(w.declared),
        )
    raise IllegalMove(f"unknown move {op!r}")


def _contract_into(w, e, gone, keep):
    A = w.algebra

    def re(f):
        a, b = f
        return ekey(keep if a == gone else a, keep if b == gone else b)

    new_edges = [(*re(f), w.edge_stab[f]) for f in w.edges if f != e]
    vstab = {x: h for x, h in w.vertex_stab.items() if x != gone}
    small = {x: s for x, s in w.small.items() if x != gone}
    boundary = frozenset(keep if x == gone else x for x in w.boundary)
    return GTreeWindow.build(
        A,
        [x for x in w.vertices if x != gone],
        new_edges,
        vertex_stab=vstab,
        boundary=boundary,
        relative_marks=tuple(frozenset(keep if x == gone else x for x in m) for m in w.relative_marks),
        small=small,
        cylinder_stabs=_rekey_cylinder_stabs(w, {e}, re),
        edge_upper={re(f): h for f, h in w.edge_upper.items() if f != e},
        declared=dict(w.declared),
    )


def window_canonical_form(w):
    """Canonical form of a window labeled by vertex and edge stabilizers."""
    A = w.algebra

    def vlab(v):
        g = w.vertex_stab.get(v)
        return [None if g is None else A.to_json(g), v in w.boundary]

    return treeutil.canonical_form(w.vertices, w.edges, vlab, lambda e: A.to_json(w.edge_stab[ekey(*e)]))
