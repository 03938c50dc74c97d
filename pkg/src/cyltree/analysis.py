"""Diagnostics on windows and their collapsed trees of cylinders, and the blow-up refinement."""

import json
from dataclasses import dataclass

from . import treeutil
from .dual import (
    collapsed_tree_of_cylinders,
    dual_to_window,
    stab_canonical_form,
    tree_of_cylinders,
    ynode,
)
from .errors import (
    HypothesisNotDeclared,
    ImageOverlap,
    MissingVertexStabs,
    NotADomination,
    PreconditionNotDeclared,
    SandwichClosureUnverified,
    Unsupported,
    UnresolvedStabilizer,
)
from .treeutil import ekey
from .window import EquivariantMap, GTreeWindow, compute_cylinders, is_collapse_map, window_canonical_form


def segment_stabilizer(w, edges):
    """Intersection of the stabilizers along a path of edges.

    Returns ``(handle, bound)``; ``bound`` is ``"upper"`` when some edge only
    carries an upper bound, in which case the result contains the true
    stabilizer.
    """
    A = w.algebra
    if not A.has_intersect():
        raise Unsupported(f"backend {A.backend_id} has no intersections")
    h, bound = None, "exact"
    for e in edges:
        e = ekey(*e)
        s = w.edge_upper.get(e)
        if s is None:
            s = w.edge_stab[e]
        else:
            bound = "upper"
        h = s if h is None else A.intersect(h, s)
    return h, bound


def acylindricity_check(w, k, mode="almost"):
    """Scan every segment of length ``k + 1``; longer segments have smaller stabilizers."""
    A = w.algebra
    if mode not in ("strict", "almost"):
        raise ValueError("mode is 'strict' or 'almost'")
    if not A.has_intersect():
        raise Unsupported(f"backend {A.backend_id} has no intersections")
    bad = A.is_trivial if mode == "strict" else A.is_finite
    violations, limited, inconclusive = [], [], []
    caveats = []
    diam = treeutil.diameter(w.adj) if w.vertices else 0
    if k + 1 > diam:
        caveats.append(f"k = {k} is at least the window diameter {diam}: no segment of length {k + 1}; vacuous")
    checked = 0
    for p in treeutil.simple_paths(w.adj, k + 1):
        if p[0] > p[-1]:
            continue
        checked += 1
        es = [ekey(p[i], p[i + 1]) for i in range(len(p) - 1)]
        h, bound = segment_stabilizer(w, es)
        if bad(h):
            continue
        entry = {"path": list(p), "stab": A.to_json(h), "bound": bound}
        if any(v in w.boundary for v in p):
            limited.append(entry)
        elif bound == "upper":
            inconclusive.append(entry)
        else:
            violations.append(entry)
    return {
        "k": k,
        "mode": mode,
        "ok": not violations,
        "segments_checked": checked,
        "violations": violations,
        "window_limited": limited,
        "inconclusive": inconclusive,
        "caveats": caveats,
    }


def intersection_hypothesis(w):
    """Pairs of inequivalent present family handles with infinite intersection."""
    A = w.algebra
    if not A.has_intersect():
        raise Unsupported(f"backend {A.backend_id} has no intersections")
    fam = w.family_handles
    out = []
    for i, a in enumerate(fam):
        for b in fam[i + 1 :]:
            if A.class_id(a) != A.class_id(b):
                try:
                    h = A.intersect(a, b)
                except Unsupported:
                    continue
                if not A.is_finite(h):
                    out.append((a, b))
    return out


def collapsed_acylindricity_check(w, k=2, mode="almost"):
    """Acylindricity of ``T_c*`` of ``w``, with the intersection hypothesis reported alongside.

    A ``T_c*`` that is a single point has no segments at all, so the check is
    vacuous there (the window itself may still fail; see ``acylindricity_check``).
    """
    ts = collapsed_tree_of_cylinders(w)
    failures = [[w.algebra.to_json(a), w.algebra.to_json(b)] for a, b in intersection_hypothesis(w)]
    if ts.is_point:
        rep = {
            "k": k,
            "mode": mode,
            "ok": True,
            "segments_checked": 0,
            "violations": [],
            "window_limited": [],
            "inconclusive": [],
            "caveats": ["T_c* is a single point: no segments; vacuous"],
        }
    else:
        rep = acylindricity_check(dual_to_window(ts), k, mode)
    rep["hypothesis_failures"] = failures
    if failures:
        rep["caveats"].append("some inequivalent family members have infinite intersection; the bound is not claimed")
    return rep


def cylinder_diameter_report(w):
    out = []
    for Y in compute_cylinders(w):
        out.append(
            {
                "class": Y.class_id,
                "diameter": Y.diameter(w),
                "edges": len(Y.edges),
                "boundary": sorted(Y.boundary),
                "possibly_truncated": Y.truncated,
            }
        )
    return {"cylinders": out}


def _center(w, Y):
    """Center of a diameter-2 cylinder: the vertex on every edge."""
    common = None
    for e in Y.edges:
        common = set(e) if common is None else common & set(e)
    return min(common) if common else None


def diameter_two_check(d):
    """Diameters of the cylinders of a collapsed tree of cylinders.

    ``<= 2`` is always asserted.  ``== 2`` and the incomplete-cylinder claim
    are asserted only when the source window is declared minimal and its
    present handles are sandwich-closed; cylinders coming from a cylinder of
    the source window with at most one boundary point are window-limited and
    exempt.
    """
    w = d.source
    A = w.algebra
    tw = dual_to_window(d)
    exact = bool(w.declared.get("minimal")) and w.sandwich_closed
    src = {Y.class_id: Y for Y in d.cylinders}
    rows, violations = [], []
    for Z in compute_cylinders(tw):
        diam = Z.diameter(tw)
        Y = src.get(Z.class_id)
        limited = Y is None or len(Y.boundary) <= 1 or Y.truncated
        center = _center(tw, Z) if diam == 2 else None
        complete = None
        if center is not None:
            complete = all(e in Z.edges for e in tw.incident(center))
        fam = None if Z.stabilizer is None else A.in_family(Z.stabilizer)
        row = {
            "class": Z.class_id,
            "diameter": diam,
            "center": center,
            "complete": complete,
            "stab_in_family": fam,
            "window_limited": limited,
        }
        rows.append(row)
        if diam > 2:
            violations.append({"kind": "DiameterAboveTwo", **row})
        if exact and not limited:
            if diam != 2:
                violations.append({"kind": "DiameterNotTwo", **row})
            elif complete is False and fam is True:
                violations.append({"kind": "IncompleteInFamily", **row})
    return {
        "ok": not violations,
        "exactness_claimed": exact,
        "cylinders": rows,
        "violations": violations,
        "caveats": [] if exact else ["diameter exactly 2 not claimed: window not declared minimal or handles not sandwich-closed"],
    }


def unique_collapsed_edge_check(w):
    """At most one edge at each cylinder node is collapsed, and it has stabilizer ``G_Y``."""
    A = w.algebra
    tc = tree_of_cylinders(w)
    rows, violations = [], []
    for Y in tc.cylinders:
        y = ynode(Y.class_id)
        inc = [k for k in tc.edges if y in k]
        if any(tc.edges[k].in_family is None for k in inc):
            raise UnresolvedStabilizer(f"edge stabilizers at cylinder {Y.class_id} are unresolved")
        out = [k for k in inc if tc.edges[k].in_family is False]
        if not out:
            rows.append({"class": Y.class_id, "collapsed": 0})
            continue
        if Y.stabilizer is None:
            raise UnresolvedStabilizer(f"cylinder {Y.class_id} has no stabilizer")
        if not any(A.includes(g, Y.stabilizer) for g in w.vertex_stab.values()):
            raise HypothesisNotDeclared(f"stabilizer of cylinder {Y.class_id} fixes no window vertex")
        rows.append({"class": Y.class_id, "collapsed": len(out)})
        if len(out) > 1:
            violations.append({"kind": "SeveralCollapsed", "class": Y.class_id, "edges": [list(k) for k in out]})
        for k in out:
            s = tc.edges[k].stab
            if s is None:
                raise UnresolvedStabilizer(f"edge {list(k)} has no exact stabilizer")
            if s != Y.stabilizer:
                violations.append({"kind": "StabilizerNotGY", "class": Y.class_id, "edge": list(k)})
    return {"ok": not violations, "cylinders": rows, "violations": violations}


def _require_stabs(w, what):
    missing = [v for v in w.vertices if v not in w.vertex_stab]
    if missing:
        raise MissingVertexStabs(f"{what} has vertices without stabilizer: {missing[:5]}")


def dominates(w, w2):
    """Every vertex stabilizer of ``w`` lies in some vertex stabilizer of ``w2``."""
    _require_stabs(w, "first window")
    _require_stabs(w2, "second window")
    if w2.algebra.extends(w.algebra):
        A = w2.algebra
    elif w.algebra.extends(w2.algebra):
        A = w.algebra
    else:
        raise Unsupported("windows use unrelated stabilizer algebras")
    targets = set(w2.vertex_stab.values())
    return all(any(A.includes(t, g) for t in targets) for g in set(w.vertex_stab.values()))


def same_deformation_space(w, w2):
    return dominates(w, w2) and dominates(w2, w)


def idempotence_check(w):
    """Rebuild the collapsed tree of cylinders from itself and compare."""
    if not w.sandwich_closed:
        raise SandwichClosureUnverified("present handles are not sandwich-closed")
    ts = collapsed_tree_of_cylinders(w)
    if ts.unresolved:
        raise UnresolvedStabilizer(f"{len(ts.unresolved)} edges of T_c* have undecided stabilizers")
    for n, k in ts.kind.items():
        if k == "m" and ts.stab.get(n) is None:
            raise UnresolvedStabilizer(f"merged node {n} has no computable stabilizer")
    w2 = dual_to_window(ts)
    ts2 = collapsed_tree_of_cylinders(w2)
    a, b = stab_canonical_form(ts), stab_canonical_form(ts2)
    ok = a == b
    caveats = []
    if not ok:
        # a node of T_c* lying in a single cylinder of T_c* disappears in the second round;
        # when it absorbed part of the window boundary this is a truncation artifact
        count = {n: 0 for n in w2.vertices}
        for Y in compute_cylinders(w2):
            for n in Y.vertices:
                count[n] += 1
        dropped = [n for n in w2.vertices if count[n] < 2 and ts.kind[n] != "v1"]
        if dropped and all(n in w2.boundary for n in dropped):
            ok = None
            caveats.append(f"window-limited: nodes {dropped} lie in one cylinder only and touch the window boundary")
    return {
        "ok": ok,
        "caveats": caveats,
        "nodes": [len(ts.kind), len(ts2.kind)],
        "edges": [len(ts.edges), len(ts2.edges)],
        "canonical_first": a,
        "canonical_second": b,
    }


def fixed_point_check(w):
    """For a window whose cylinders all have diameter 2, compare ``T_c*`` with the window itself.

    Vertices lying in a single cylinder do not survive in ``T_c*``; on a finite
    window these are the leaves cut off by the window, so they are pruned from
    the window before comparing.  Labels are vertex and edge stabilizers.
    """
    A = w.algebra
    cyls = compute_cylinders(w)
    bad = [Y.class_id for Y in cyls if Y.diameter(w) != 2]
    if bad:
        raise PreconditionNotDeclared(f"cylinders of diameter other than 2: {bad[:5]}")
    _require_stabs(w, "window")
    count = {v: 0 for v in w.vertices}
    for Y in cyls:
        for v in Y.vertices:
            count[v] += 1
    keep = [v for v in w.vertices if count[v] >= 2]
    kept = set(keep)
    edges = [e for e in w.edges if e[0] in kept and e[1] in kept]
    ts = collapsed_tree_of_cylinders(w)
    if ts.unresolved:
        raise UnresolvedStabilizer(f"{len(ts.unresolved)} edges of T_c* have undecided stabilizers")
    tw = dual_to_window(ts)

    def form(x, verts, es):
        def vlab(v):
            g = x.vertex_stab.get(v)
            return None if g is None else A.to_json(g)

        return treeutil.canonical_form(verts, es, vlab, lambda e: A.to_json(x.edge_stab[ekey(*e)]))

    a = form(w, keep, edges)
    b = form(tw, tw.vertices, tw.edges)
    return {"ok": a == b, "pruned": sorted(kept ^ set(w.vertices)), "canonical_window": a, "canonical_collapsed": b}


def collapsed_as_window(w):
    return dual_to_window(collapsed_tree_of_cylinders(w))


def maximality_check(w, w2):
    """If ``w`` dominates ``w2`` and cylinders of ``w2`` stay inside the window, ``T_c*`` dominates ``w2``."""
    if not w.sandwich_closed:
        raise SandwichClosureUnverified("present handles are not sandwich-closed")
    if not dominates(w, w2):
        raise PreconditionNotDeclared("first window does not dominate the second")
    if any(Y.truncated for Y in compute_cylinders(w2)):
        raise PreconditionNotDeclared("a cylinder of the second window touches the window boundary")
    tw = collapsed_as_window(w)
    ok = dominates(tw, w2)
    return {"ok": ok, "caveats": ["bounded cylinders approximated by: no cylinder touches the window boundary"]}


def axis_witnesses(w):
    """Generators translating along a path inside one cylinder: witnesses of an axis in a cylinder."""
    A = w.algebra
    out = []
    cyl = {}
    for Y in compute_cylinders(w):
        for e in Y.edges:
            cyl[e] = Y.class_id
    for g in w.generators:
        m = g.vertex_map
        for v in sorted(m):
            gv = m[v]
            if gv not in m or gv == v:
                continue
            g2v = m[gv]
            d1 = len(w.path_edges(v, gv))
            es = w.path_edges(v, g2v)
            if len(es) == 2 * d1 and len({cyl[e] for e in es}) == 1:
                out.append({"generator": g.name, "vertex": v, "class": cyl[es[0]], "translation": d1})
                break
    return {"witnesses": out, "conclusive": bool(out), "note": None if out else "no witness found; absence is inconclusive"}


# ---------------------------------------------------------------- blow-up


@dataclass(frozen=True, eq=False)
class RefinementResult:
    tree: GTreeWindow
    collapse_to_Tc: EquivariantMap
    collapse_to_Tprime: EquivariantMap
    blown_up_parts: dict
    tc: object
    checks: dict

    def to_json(self):
        from .io import window_to_json

        return {
            "tree": window_to_json(self.tree),
            "blown_up_parts": {p: sorted(vs) for p, vs in sorted(self.blown_up_parts.items())},
            "collapse_to_Tc": dict(sorted(self.collapse_to_Tc.vertex_map.items())),
            "collapse_to_Tprime": dict(sorted(self.collapse_to_Tprime.vertex_map.items())),
            "checks": self.checks,
        }


def _check_domination_map(f):
    s, t = f.source, f.target
    A = t.algebra if t.algebra.extends(s.algebra) else s.algebra
    if not f.well_formed():
        raise NotADomination("vertex map is not total or leaves the target")
    if set(f.vertex_map.values()) != set(t.vertices):
        raise NotADomination("map is not onto the target vertices")
    if not is_collapse_map(f):
        raise NotADomination("map does not preserve alignment")
    covered = set()
    for e, path in f.edge_map.items():
        covered.update(path)
        for e2 in path:
            if not A.includes(t.edge_stab[e2], s.edge_stab[e]):
                raise NotADomination(f"stabilizer of {list(e)} is not contained in that of its image")
    if covered != set(t.edges):
        raise NotADomination("map is not onto the target edges")
    for v, g in s.vertex_stab.items():
        g2 = t.vertex_stab.get(f.vertex_map[v])
        if g2 is not None and not A.includes(g2, g):
            raise NotADomination(f"stabilizer of {v!r} is not contained in that of its image")


def blowup_refinement(f):
    """Common refinement of ``T_c`` and ``T'`` from a collapse map ``f : T -> T'``.

    Each node ``p`` of ``T_c`` is blown up to ``Z_p = f(Y_p)`` (``Y_p`` the
    vertex or cylinder ``p`` stands for), and each edge ``(x, Y)`` of ``T_c``
    becomes an edge joining the copies of ``f(x)`` in ``Z_x`` and ``Z_Y``.
    """
    _check_domination_map(f)
    w, w2 = f.source, f.target
    A = w.algebra
    tc = tree_of_cylinders(w)
    parts, part_edges = {}, {}
    owner = {}
    for n in tc.nodes:
        if tc.kind[n] == "v0":
            parts[n] = {f.vertex_map[n[2:]]}
            part_edges[n] = set()
            continue
        Y = next(Y for Y in tc.cylinders if ynode(Y.class_id) == n)
        parts[n] = {f.vertex_map[v] for v in Y.vertices}
        es = set()
        for e in Y.edges:
            es.update(f.edge_map[e])
        part_edges[n] = es
        for e in es:
            if owner.setdefault(e, n) != n:
                raise ImageOverlap(f"edge {list(e)} of the target lies in Z_{owner[e]} and Z_{n}")
    def hv(p, v):
        return json.dumps([p, v], separators=(",", ":"))

    verts, edges = [], []
    to_tc, to_t2 = {}, {}
    for p in sorted(parts):
        for v in sorted(parts[p]):
            verts.append(hv(p, v))
            to_tc[hv(p, v)] = p
            to_t2[hv(p, v)] = v
        for a, b in sorted(part_edges[p]):
            edges.append((hv(p, a), hv(p, b), w2.edge_stab[(a, b)]))
    added = []
    for (u, v), e in sorted(tc.edges.items()):
        x, y = (u, v) if u.startswith("x:") else (v, u)
        fx = f.vertex_map[x[2:]]
        stab = _dual_edge_handle(e)
        edges.append((hv(x, fx), hv(y, fx), stab))
        added.append(ekey(hv(x, fx), hv(y, fx)))
    T = GTreeWindow.build(A, verts, edges)
    checks = {"is_tree": T.is_tree}
    if not T.is_tree:
        raise NotADomination("blown-up graph is not a tree; the map does not witness domination")
    tc_win = GTreeWindow.build(A, tc.nodes, [(u, v, _dual_edge_handle(e)) for (u, v), e in tc.edges.items()])
    g1 = EquivariantMap(T, tc_win, to_tc)
    g2 = EquivariantMap(T, w2, to_t2)
    checks["collapse_to_Tc_aligned"] = is_collapse_map(g1)
    checks["collapse_to_Tprime_aligned"] = is_collapse_map(g2)
    # collapse the blown-up parts: must give T_c
    inner = [e for e in T.edges if e not in set(added)]
    expected_tc = treeutil.canonical_form(
        tc.nodes, list(tc.edges), lambda p: _dual_vlabel(tc, A, p), lambda k: _key(A, _dual_edge_handle(tc.edges[ekey(*k)]))
    )
    checks["recovers_Tc"] = _contract_compare(T, inner, to_tc, lambda p: _dual_vlabel(tc, A, p), lambda h: _key(A, h), expected_tc)
    # collapse the added edges: must give T'
    checks["recovers_Tprime"] = _contract_compare(
        T, added, to_t2, lambda v: [_key(A, w2.vertex_stab.get(v)), v in w2.boundary], lambda h: _key(A, h), window_canonical_form(w2)
    )
    checks["ok"] = all(checks.values())
    return RefinementResult(T, g1, g2, {p: frozenset(s) for p, s in parts.items()}, tc, checks)


def _key(A, h):
    return None if h is None else A.to_json(h)


def _dual_vlabel(tc, A, n):
    k = tc.kind[n]
    if k == "v0":
        return ["v0", _key(A, tc.stab.get(n))]
    if k == "v1":
        return ["v1", list(tc.classes.get(n, ()))]
    return ["m", list(tc.classes.get(n, ())), _key(A, tc.stab.get(n))]


def _dual_edge_handle(e):
    return e.stab if e.stab is not None else e.lower


def _contract_compare(T, edges, tag, vlabel, elabel_of_handle, expected):
    """Contract ``edges`` of ``T``; every class must carry a single tag, and the labeled quotient must match."""
    rep = {v: v for v in T.vertices}

    def find(x):
        while rep[x] != x:
            rep[x] = rep[rep[x]]
            x = rep[x]
        return x

    for u, v in edges:
        rep[find(u)] = find(v)
    cls_tag = {}
    for v in T.vertices:
        t = tag[v]
        if cls_tag.setdefault(find(v), t) != t:
            return False
    tags = set(cls_tag.values())
    if len(tags) != len(cls_tag):
        return False
    contracted = set(ekey(*e) for e in edges)
    q_edges, q_lab = [], {}
    for e in T.edges:
        if e in contracted:
            continue
        a, b = cls_tag[find(e[0])], cls_tag[find(e[1])]
        k = ekey(a, b)
        if k in q_lab:
            return False
        q_edges.append(k)
        q_lab[k] = elabel_of_handle(T.edge_stab[e])
    try:
        got = treeutil.canonical_form(sorted(tags), q_edges, vlabel, lambda k: q_lab[ekey(*k)])
    except ValueError:
        return False
    return got == expected
