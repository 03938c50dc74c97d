"""The tree of cylinders, its collapsed form, the algebraic graph Z, and induced maps.

Node ids of a dual tree are strings: ``"x:" + vertex`` for a window vertex
lying in two or more cylinders, ``"Y:" + class_id`` for a cylinder.  Nodes of
the collapsed tree keep the least member id of the component they stand for.
"""

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property

from . import treeutil
from .errors import (
    ImageNotCylinderOrPoint,
    MissingVertexStabs,
    NotEquivariant,
    PreconditionNotDeclared,
    SandwichClosureUnverified,
    SmallFlagUnknown,
    Unsupported,
)
from .treeutil import ekey
from .window import GTreeWindow, compute_cylinders


def vnode(v):
    return "x:" + v


def ynode(c):
    return "Y:" + c


@dataclass(frozen=True)
class DualEdge:
    """Stabilizer data of an edge ``(x, Y)``.

    ``stab`` is ``G_x ∩ G_Y`` when computable.  ``lower`` is a witnessed
    subgroup (the stabilizer of an edge of ``Y`` at ``x``); ``upper`` is
    ``G_Y`` or ``G_x``.  ``in_family`` is ``None`` when undecided.
    """

    stab: object
    lower: object
    upper: object
    in_family: object
    via: str = "exact"


@dataclass(frozen=True, eq=False)
class BipartiteDualTree:
    source: GTreeWindow
    kind: dict
    stab: dict
    edges: dict
    collapsed: bool = False
    members: dict = field(default_factory=dict)
    classes: dict = field(default_factory=dict)
    cylinders: tuple = ()
    project: dict = field(default_factory=dict)

    @cached_property
    def nodes(self):
        return sorted(self.kind)

    @cached_property
    def adj(self):
        return treeutil.adjacency(self.nodes, self.edges)

    @property
    def is_point(self):
        return len(self.kind) <= 1

    @cached_property
    def unresolved(self):
        return sorted(k for k, e in self.edges.items() if e.in_family is None)

    def is_tree(self):
        return treeutil.is_tree(self.nodes, list(self.edges))

    def to_json(self):
        A = self.source.algebra

        def h(x):
            return None if x is None else A.to_json(x)

        return {
            "collapsed": self.collapsed,
            "nodes": [
                {"id": n, "kind": self.kind[n], "stab": h(self.stab.get(n)), "classes": list(self.classes.get(n, ())), "members": list(self.members.get(n, (n,)))}
                for n in self.nodes
            ],
            "edges": [
                {"u": u, "v": v, "stab": h(e.stab), "lower": h(e.lower), "upper": h(e.upper), "in_family": e.in_family, "via": e.via}
                for (u, v), e in sorted(self.edges.items())
            ],
            "unresolved": [list(k) for k in self.unresolved],
        }


def _edge_info(w, gx, gy, witness):
    A = w.algebra
    upper = gy if gy is not None else gx
    if gx is not None and gy is not None:
        try:
            s = A.intersect(gx, gy)
            return DualEdge(s, witness, upper, A.in_family(s), "exact")
        except Unsupported:
            pass
    # G_e ⊆ G_eps ⊆ upper; sandwich-closedness settles membership when upper is in the family
    if upper is not None and A.in_family(upper) and w.sandwich_closed:
        return DualEdge(None, witness, upper, True, "sandwich")
    return DualEdge(None, witness, upper, None, "unresolved")


def tree_of_cylinders(w):
    """Build ``T_c``; an edgeless window gives a single node for its vertex."""
    A = w.algebra
    cyls = compute_cylinders(w)
    if not w.edges:
        kind = {vnode(v): "v0" for v in w.vertices}
        stab = {vnode(v): w.vertex_stab.get(v) for v in w.vertices}
        return BipartiteDualTree(w, kind, stab, {}, members={n: (n,) for n in kind}, cylinders=tuple(cyls), project={n: n for n in kind})
    count = {}
    for Y in cyls:
        for v in Y.vertices:
            count[v] = count.get(v, 0) + 1
    kind, stab, classes, edges = {}, {}, {}, {}
    for v in w.vertices:
        if count.get(v, 0) >= 2:
            kind[vnode(v)] = "v0"
            stab[vnode(v)] = w.vertex_stab.get(v)
    for Y in cyls:
        y = ynode(Y.class_id)
        kind[y] = "v1"
        stab[y] = Y.stabilizer
        classes[y] = (Y.class_id,)
        for x in sorted(Y.boundary):
            witness = min((w.edge_stab[e] for e in w.incident(x) if e in Y.edges), key=A.key)
            edges[ekey(vnode(x), y)] = _edge_info(w, w.vertex_stab.get(x), Y.stabilizer, witness)
    return BipartiteDualTree(
        w, kind, stab, edges, members={n: (n,) for n in kind}, classes=classes, cylinders=tuple(cyls), project={n: n for n in kind}
    )


def _join_all(A, hs):
    if not hs or any(h is None for h in hs):
        return None
    for top in hs:
        # a member containing all others is the join, whatever the backend declares
        if all(A.includes(top, h) for h in hs):
            return top
    g = hs[0]
    try:
        for h in hs[1:]:
            g = A.join(g, h)
    except Unsupported:
        return None
    return g


def collapse_dual(tc, keys):
    """Contract the listed edges of a dual tree; merged nodes take their least member id."""
    A = tc.source.algebra
    rep = {n: n for n in tc.kind}

    def find(x):
        while rep[x] != x:
            rep[x] = rep[rep[x]]
            x = rep[x]
        return x

    for u, v in sorted(keys):
        ru, rv = find(u), find(v)
        if ru != rv:
            lo, hi = sorted((ru, rv))
            rep[hi] = lo
    groups = {}
    for n in tc.nodes:
        groups.setdefault(find(n), []).append(n)
    kind, stab, members, classes = {}, {}, {}, {}
    for r, ms in groups.items():
        mem = tuple(sorted(m for n in ms for m in tc.members.get(n, (n,))))
        members[r] = mem
        classes[r] = tuple(sorted({c for n in ms for c in tc.classes.get(n, ())}))
        if len(ms) == 1:
            kind[r] = tc.kind[ms[0]]
            stab[r] = tc.stab.get(ms[0])
        else:
            kind[r] = "m"
            stab[r] = _join_all(A, [tc.stab.get(n) for n in ms])
    keys = set(keys)
    edges = {ekey(find(u), find(v)): e for (u, v), e in tc.edges.items() if (u, v) not in keys}
    project = {n: find(tc.project[n]) for n in tc.project}
    return BipartiteDualTree(tc.source, kind, stab, edges, True, members, classes, tc.cylinders, project)


def collapsed_tree_of_cylinders(w, tc=None):
    """``T_c*``: contract every edge of ``T_c`` whose stabilizer is known to lie outside the family.

    Edges whose membership is undecided are kept and listed in ``unresolved``.
    """
    tc = tc or tree_of_cylinders(w)
    return collapse_dual(tc, [k for k, e in tc.edges.items() if e.in_family is False])


def dual_to_window(d):
    """Reinterpret a dual tree as a window, so the construction can be rerun on it.

    An edge keeps its exact stabilizer when known; otherwise it carries its
    witnessed lower bound (which lies in the same class) together with its
    upper bound.  Nodes standing for window vertices in two cylinders are
    declared non-small: their stabilizers contain groups of two classes.
    """
    w = d.source
    A = w.algebra
    edges, upper = [], {}
    for (u, v), e in sorted(d.edges.items()):
        if e.stab is not None and e.in_family:
            edges.append((u, v, e.stab))
        else:
            edges.append((u, v, e.lower))
            if e.upper is not None:
                upper[(u, v)] = e.upper
    vstab = {n: h for n, h in d.stab.items() if h is not None}
    small = {n: False for n, k in d.kind.items() if k != "v1"}
    cyl_stab = {}
    # a cylinder of the collapsed tree has the same stabilizer as the cylinder of w it comes from
    by_class = {Y.class_id: Y for Y in d.cylinders}
    for u, v, h in edges:
        Y = by_class.get(A.class_id(h))
        if Y is not None and Y.stabilizer is not None:
            cyl_stab[(u, v)] = Y.stabilizer
    truncated = {ynode(Y.class_id) for Y in d.cylinders if Y.truncated}
    boundary = set()
    for n, ms in d.members.items():
        for m in ms:
            if m in truncated or (m.startswith("x:") and m[2:] in w.boundary):
                boundary.add(n)
    declared = {k: v for k, v in w.declared.items() if k in ("minimal", "extra_classes")}
    return GTreeWindow.build(
        A,
        d.nodes,
        edges,
        vertex_stab=vstab,
        boundary=frozenset(boundary),
        small=small,
        cylinder_stabs=cyl_stab,
        edge_upper=upper,
        declared=declared,
    )


def _edge_handle(d, k):
    e = d.edges[k]
    return e.stab if (e.stab is not None and e.in_family) else e.lower


def _key(A, h):
    return None if h is None else A.to_json(h)


def dual_canonical_form(d):
    """Canonical form with vertex labels (type, stabilizer or class) and exact edge stabilizers."""
    A = d.source.algebra

    def vlab(n):
        k = d.kind[n]
        if k == "v0":
            return ["v0", _key(A, d.stab.get(n))]
        if k == "v1":
            return ["v1", list(d.classes.get(n, ()))]
        return ["m", list(d.classes.get(n, ())), _key(A, d.stab.get(n))]

    def elab(k):
        return _key(A, d.edges[ekey(*k)].stab)

    return treeutil.canonical_form(d.nodes, list(d.edges), vlab, elab)


def stab_canonical_form(d):
    """Canonical form labeled by stabilizers only, falling back to the class for cylinder nodes.

    Used to compare trees built in different rounds, where a node's type may
    change but its stabilizer does not.
    """
    A = d.source.algebra

    def vlab(n):
        h = d.stab.get(n)
        if h is not None:
            return ["G", A.to_json(h)]
        if d.kind[n] == "v1":
            return ["C", list(d.classes[n])]
        return None

    def elab(k):
        return _key(A, d.edges[ekey(*k)].stab)

    return treeutil.canonical_form(d.nodes, list(d.edges), vlab, elab)


# ---------------------------------------------------------------- Z and j


@dataclass(frozen=True, eq=False)
class AlgebraicGraph:
    v0: dict  # Z node -> window vertices with that stabilizer
    v1: dict  # Z node -> class id
    edges: frozenset

    @cached_property
    def adj(self):
        return treeutil.adjacency(sorted(self.v0) + sorted(self.v1), self.edges)

    def to_json(self):
        return {
            "v0": {k: sorted(v) for k, v in sorted(self.v0.items())},
            "v1": sorted(self.v1),
            "edges": sorted(list(e) for e in self.edges),
        }


def hnode(A, h):
    return "H:" + A.key(h)


def cnode(c):
    return "C:" + c


def algebraic_graph(w):
    A = w.algebra
    v0 = {}
    for v in w.vertices:
        s = w.small_flag(v)
        if s is None:
            raise SmallFlagUnknown(f"small flag of vertex {v!r} is unknown")
        if s:
            continue
        g = w.vertex_stab.get(v)
        if g is None:
            raise MissingVertexStabs(f"non-small vertex {v!r} has no stabilizer")
        v0.setdefault(hnode(A, g), []).append(v)
    reps = {}
    for h in w.family_handles:
        reps.setdefault(A.class_id(h), []).append(h)
    v1 = {cnode(c): c for c in reps}
    edges = set()
    for z, vs in v0.items():
        g = w.vertex_stab[vs[0]]
        for c, hs in reps.items():
            if any(A.includes(g, h) for h in hs):
                edges.add(ekey(z, cnode(c)))
    return AlgebraicGraph(v0, v1, frozenset(edges))


def embedding_j(w, tc=None, z=None):
    """The map ``T_c -> Z``; returns ``(node_map, report)``."""
    A = w.algebra
    tc = tc or tree_of_cylinders(w)
    z = z or algebraic_graph(w)
    jm = {}
    problems = []
    for n in tc.nodes:
        if tc.kind[n] == "v0":
            g = tc.stab.get(n)
            if g is None:
                raise MissingVertexStabs(f"vertex {n[2:]!r} has no stabilizer")
            jm[n] = hnode(A, g)
        else:
            jm[n] = cnode(tc.classes[n][0])
        if jm[n] not in z.adj:
            problems.append({"kind": "ImageNotInZ", "node": n})
    if len(set(jm.values())) != len(jm):
        problems.append({"kind": "NotInjective"})
    zedges = set(z.edges)
    for u, v in tc.edges:
        if ekey(jm[u], jm[v]) not in zedges:
            problems.append({"kind": "EdgeNotMapped", "edge": [u, v]})
    return jm, {"ok": not problems, "problems": problems}


def segment5_check(w):
    """Compare ``j(T_c)`` with the cells of ``Z`` lying in central edges of length-5 segments."""
    if not w.declared.get("minimal"):
        raise PreconditionNotDeclared("segment-5 check needs a window declared minimal")
    tc = tree_of_cylinders(w)
    if tc.is_point:
        raise PreconditionNotDeclared("segment-5 check needs T_c not a point")
    z = algebraic_graph(w)
    jm, jrep = embedding_j(w, tc, z)
    image = set(jm.values()) | {ekey(jm[u], jm[v]) for u, v in tc.edges}
    central = set()
    for p in treeutil.simple_paths(z.adj, 5):
        a, b = p[2], p[3]
        central |= {a, b, ekey(a, b)}

    def fmt(cells):
        return sorted((list(c) if isinstance(c, tuple) else c for c in cells), key=lambda c: json.dumps(c))

    j_nodes = set(jm.values())
    j_edges = {ekey(jm[u], jm[v]) for u, v in tc.edges}
    lemma = []
    for c in z.v1:
        if (c in j_nodes) != (len(z.adj[c]) >= 2):
            lemma.append({"item": 1, "node": c})
    for h in z.v0:
        if (h in j_nodes) != (sum(1 for y in z.adj[h] if y in j_nodes) >= 2):
            lemma.append({"item": 3, "node": h})
    for e in z.edges:
        if (e in j_edges) != (e[0] in j_nodes and e[1] in j_nodes):
            lemma.append({"item": 4, "edge": list(e)})
    # item 2: a non-small vertex adjacent in Z to j(Y) lies in Y
    node_of = {}
    for h, vs in z.v0.items():
        for v in vs:
            node_of[v] = h
    for Y in tc.cylinders:
        c = cnode(Y.class_id)
        for v, h in node_of.items():
            if ekey(h, c) in z.edges and v not in Y.vertices:
                lemma.append({"item": 2, "vertex": v, "class": Y.class_id})
    truncated = bool(w.boundary) or any(Y.truncated for Y in tc.cylinders)
    return {
        "ok": jrep["ok"] and image == central,
        "equal": image == central,
        "embedding": jrep,
        "j_image": fmt(image),
        "central_cells": fmt(central),
        "only_in_j": fmt(image - central),
        "only_in_central": fmt(central - image),
        "lemma_violations": lemma,
        "caveats": ["window truncated: cells near the boundary may be missing from Z"] if truncated else [],
    }


# ---------------------------------------------------------------- induced maps


@dataclass(frozen=True, eq=False)
class CellularMap:
    source: BipartiteDualTree
    target: BipartiteDualTree
    node_map: dict
    caveats: tuple = ()

    def edge_images(self):
        out = {}
        for u, v in self.source.edges:
            a, b = self.node_map[u], self.node_map[v]
            out[(u, v)] = None if a == b else ekey(a, b)
        return out

    def is_cellular(self):
        tedges = set(self.target.edges)
        return all(img is None or img in tedges for img in self.edge_images().values())

    def preserves_alignment(self):
        if self.source.is_point:
            return True
        dt = treeutil.all_distances(self.target.adj)
        nm = self.node_map
        for a in self.source.nodes:
            _, parent = treeutil.bfs(self.source.adj, a)
            da = dt[nm[a]]
            for y, x in parent.items():
                if x is None:
                    continue
                fx, fy = nm[x], nm[y]
                if da[fx] + dt[fx][fy] != da[fy]:
                    return False
        return True

    def to_json(self):
        return {"node_map": dict(sorted(self.node_map.items())), "caveats": list(self.caveats)}


def image_of_cylinder(f, Y, tgt_cyls):
    """Classify ``f(Y)``: ``("point", v)`` or ``("cylinder", class_id)``."""
    T = f.target
    A = T.algebra
    imgs = {f.vertex_map[v] for v in Y.vertices}
    if len(imgs) == 1:
        return "point", next(iter(imgs))
    cells = set()
    for e in Y.edges:
        cells.update(f.edge_map[e])
    classes = {A.class_id(T.edge_stab[e]) for e in cells}
    if len(classes) != 1:
        raise ImageNotCylinderOrPoint(f"image of cylinder {Y.class_id} meets {len(classes)} cylinders")
    c = next(iter(classes))
    if cells != set(tgt_cyls[c].edges):
        raise ImageNotCylinderOrPoint(f"image of cylinder {Y.class_id} is a proper part of cylinder {c}")
    return "cylinder", c


def induced_map(f, src=None, tgt=None):
    """``f_c : T_c -> T'_c`` for a vertex map between windows."""
    if not f.well_formed():
        raise NotEquivariant("vertex map is not total or leaves the target")
    for g in f.source.generators:
        gt = {h.name: h for h in f.target.generators}.get(g.name)
        if gt is None:
            continue
        for x, gx in g.vertex_map.items():
            fx, fgx = f.vertex_map.get(x), f.vertex_map.get(gx)
            if fx in gt.vertex_map and gt.vertex_map[fx] != fgx:
                raise NotEquivariant(f"f(g.{x}) != g.f({x}) for generator {g.name}")
    src = src or tree_of_cylinders(f.source)
    tgt = tgt or tree_of_cylinders(f.target)
    tcyl = {Y.class_id: Y for Y in tgt.cylinders}
    tkind = tgt.kind
    nm = {}
    caveats = []
    for n in src.nodes:
        if src.kind[n] == "v0":
            x = f.vertex_map[n[2:]]
            nm[n] = _point_node(x, tgt, tcyl, caveats, n)
            continue
        Y = next(Y for Y in src.cylinders if ynode(Y.class_id) == n)
        kind, val = image_of_cylinder(f, Y, tcyl)
        nm[n] = ynode(val) if kind == "cylinder" else _point_node(val, tgt, tcyl, caveats, n)
    if not f.source.edges:
        nm = {n: _point_node(f.vertex_map[n[2:]], tgt, tcyl, caveats, n) for n in src.nodes}
    for k in nm.values():
        if k not in tkind:
            raise ImageNotCylinderOrPoint(f"{k} is not a node of the target tree of cylinders")
    m = CellularMap(src, tgt, nm, tuple(caveats))
    if not m.is_cellular():
        raise ImageNotCylinderOrPoint("an edge of T_c maps to a path of length > 1")
    return m


def _point_node(x, tgt, tcyl, caveats, n):
    if vnode(x) in tgt.kind:
        return vnode(x)
    if not tcyl:
        return next(iter(tgt.kind))
    cs = sorted(c for c, Y in tcyl.items() if x in Y.vertices)
    if len(cs) == 1:
        if n.startswith("Y:"):
            caveats.append(f"{n} collapses to {x!r}, which lies in a single cylinder (target not minimal)")
        return ynode(cs[0])
    raise ImageNotCylinderOrPoint(f"{n} maps to vertex {x!r}, which lies in no cylinder")


def compose_cellular(f, g):
    """``g o f``."""
    return CellularMap(f.source, g.target, {n: g.node_map[f.node_map[n]] for n in f.source.nodes})


def induced_map_collapsed(f, fc=None):
    """``f_c* : T_c* -> T'_c*``, factoring ``T_c -> T'_c -> T'_c*`` through ``T_c*``."""
    for w in (f.source, f.target):
        if not w.sandwich_closed:
            raise SandwichClosureUnverified("present handles are not sandwich-closed")
    fc = fc or induced_map(f)
    src_star = collapsed_tree_of_cylinders(f.source, fc.source)
    tgt_star = collapsed_tree_of_cylinders(f.target, fc.target)
    nm = {}
    for n in fc.source.nodes:
        a = src_star.project[n]
        b = tgt_star.project[fc.node_map[n]]
        if nm.setdefault(a, b) != b:
            return None, {"ok": False, "reason": "composite does not factor through T_c*", "node": n}
    m = CellularMap(src_star, tgt_star, nm)
    return m, {"ok": m.is_cellular(), "reason": None if m.is_cellular() else "factored map is not cellular"}


# ---------------------------------------------------------------- DOT


def _dot_id(prefix, text):
    return prefix + hashlib.sha1(text.encode()).hexdigest()[:10]


def _dot_escape(s):
    return s.replace("\\", "\\\\").replace('"', '\\"')


def dual_node_name(n):
    return ("v" + n[2:]) if n.startswith("x:") else _dot_id("Y", n)


def window_dot(w, name="T"):
    A = w.algebra
    lines = [f'graph "{name}" {{']
    for v in sorted(w.vertices):
        shape = "doublecircle" if v in w.boundary else "circle"
        lines.append(f'  "v{_dot_escape(v)}" [shape={shape}, label="{_dot_escape(v)}"];')
    for u, v in sorted(w.edges):
        lab = _dot_escape(json.dumps(A.to_json(w.edge_stab[(u, v)])))
        lines.append(f'  "v{_dot_escape(u)}" -- "v{_dot_escape(v)}" [label="{lab}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def dual_dot(d, name="Tc", highlight=None):
    A = d.source.algebra
    lines = [f'graph "{name}" {{']
    for n in d.nodes:
        full = n[2:] if d.kind[n] != "m" else ",".join(d.members[n])
        label = full if len(full) <= 16 else full[:15] + "…"
        shape = {"v0": "circle", "v1": "box", "m": "diamond"}[d.kind[n]]
        extra = ', style=bold, color="red"' if highlight and n in highlight else ""
        lines.append(f'  "{dual_node_name(n)}" [shape={shape}, label="{_dot_escape(label)}", tooltip="{_dot_escape(full)}"{extra}];')
    for (u, v), e in sorted(d.edges.items()):
        s = e.stab if e.stab is not None else e.lower
        lab = _dot_escape(json.dumps(A.to_json(s)))
        style = "" if e.stab is not None else ", style=dashed"
        lines.append(f'  "{dual_node_name(u)}" -- "{dual_node_name(v)}" [label="{lab}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def zgraph_dot(z, jm=None):
    image = set(jm.values()) if jm else set()
    lines = ['graph "Z" {']
    for n in sorted(z.v0) + sorted(z.v1):
        full = n[2:]
        label = full if len(full) <= 16 else full[:15] + "…"
        shape = "circle" if n in z.v0 else "box"
        extra = ', style=bold, color="red"' if n in image else ""
        lines.append(f'  "{_dot_id("Z", n)}" [shape={shape}, label="{_dot_escape(label)}", tooltip="{_dot_escape(full)}"{extra}];')
    for u, v in sorted(z.edges):
        lines.append(f'  "{_dot_id("Z", u)}" -- "{_dot_id("Z", v)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
