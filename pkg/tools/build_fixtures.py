"""Regenerate the P- and L-backend fixture files from compact shape descriptions.

Run from the repository root: ``python3 tools/build_fixtures.py``.  Every
fixture is a hand-chosen tree; this script only spells out the label tables.
"""

import json
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "cyltree", "fixtures")


def p_fixture(edges, small=(), minimal=True, boundary=(), note=None, collapse=None):
    """``edges`` is a list of ``(u, v, label, class)``.

    Vertices meeting two classes get a non-family label ``V<v>`` containing their
    edge labels; other vertices get ``V<v>`` plus a private extra class ``X<v>``
    unless listed in ``small`` (then a family label ``S<v>`` of their class).
    Each class ``K`` gets a family cylinder label ``Y<K>`` contained in the
    label of its first boundary vertex; the other boundary vertices declare
    their intersection with it.  A class listed in ``collapse`` instead gets a
    non-family cylinder label contained in the label of the given centre.
    """
    collapse = collapse or {}
    verts = []
    for u, v, _, _ in edges:
        for x in (u, v):
            if x not in verts:
                verts.append(x)
    classes, labels, incl, inter = {}, {}, [], []
    at = {x: [] for x in verts}
    for u, v, lab, k in edges:
        classes.setdefault(k, [])
        if lab not in classes[k]:
            classes[k].append(lab)
        for x in (u, v):
            at[x].append((lab, k))
    vstab, extra = {}, []
    for x in verts:
        ks = {k for _, k in at[x]}
        if x in small:
            (k,) = ks
            name = "S" + x
            classes[k].append(name)
        else:
            name = "V" + x
            labels[name] = {}
            if len(ks) < 2:
                classes["X" + x] = ["X" + x]
                incl.append(["X" + x, name])
                extra.append("X" + x)
        for lab, _ in at[x]:
            if [lab, name] not in incl:
                incl.append([lab, name])
        vstab[x] = name
    cyl = []
    for k in list(dict.fromkeys(k for *_, k in edges)):
        y = "Y" + k
        if k in collapse:
            labels[y] = {}
        else:
            classes[k].append(y)
        kedges = [(u, v, lab) for u, v, lab, kk in edges if kk == k]
        for _, _, lab in kedges:
            if [lab, y] not in incl:
                incl.append([lab, y])
        members = [x for x in verts if any(x in (u, v) for u, v, _ in kedges)]
        bd = [x for x in members if len({kk for _, kk in at[x]}) >= 2]
        for x in members:
            if x in small:
                incl.append([vstab[x], y])
        if k in collapse:
            bd.remove(collapse[k])
            bd.insert(0, collapse[k])
        if bd:
            incl.append([y, vstab[bd[0]]])
        for x in bd[1:]:
            here = sorted({lab for lab, kk in at[x] if kk == k})
            if len(here) == 1:
                meet = here[0]
            else:
                meet = "I" + x + k
                classes[k].append(meet)
                incl.extend([[lab, meet] for lab in here] + [[meet, vstab[x]], [meet, y]])
            inter.append([vstab[x], y, meet])
        u, v, _ = min(kedges)
        cyl.append([u, v, y])
    alg = {"backend": "P", "classes": classes, "labels": labels, "inclusions": incl}
    if inter:
        alg["intersections"] = inter
    doc = {
        "algebra": alg,
        "vertices": verts,
        "edges": [[u, v, lab] for u, v, lab, _ in edges],
        "vertex_stabs": vstab,
        "cylinder_stabs": cyl,
        "declared": {"minimal": minimal, "extra_classes": extra},
    }
    if boundary:
        doc["boundary"] = list(boundary)
    if note:
        doc["note"] = note
    return doc


def l_fixture(dim, edges, extras, note=None, minimal=True):
    """``edges`` is a list of ``(u, v, rows)``; ``extras`` maps a vertex to one extra vector.

    Every vertex stabilizer is spanned by its edge stabilizers and its extra
    vector.  Each edge is expected to be a cylinder on its own, whose
    stabilizer is the edge stabilizer.
    """
    verts = []
    for u, v, _ in edges:
        for x in (u, v):
            if x not in verts:
                verts.append(x)
    vstab = {x: [] for x in verts}
    for u, v, rows in edges:
        for x in (u, v):
            vstab[x].extend(rows)
    for x, vec in extras.items():
        vstab[x].append(vec)
    doc = {
        "algebra": {"backend": "L", "dim": dim, "family_rank": 1},
        "vertices": verts,
        "edges": [[u, v, rows] for u, v, rows in edges],
        "vertex_stabs": vstab,
        "cylinder_stabs": [[u, v, rows] for u, v, rows in edges],
        "declared": {"minimal": minimal, "extra_classes": [[vec] for vec in extras.values()]},
    }
    if note:
        doc["note"] = note
    return doc


def write(name, doc):
    with open(os.path.join(OUT, name + ".json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


FIXTURES = {
    "E3": p_fixture(
        [("c", "la", "A1", "K1"), ("c", "lb", "A2", "K1"), ("c", "lc", "B", "K2")],
        note="tripod at c: edges ca and cb equivalent, cc' in its own class",
    ),
    "E5": p_fixture(
        [("v1", "v2", "A", "K1"), ("v2", "v3", "B1", "K2"), ("v3", "v4", "B2", "K2"), ("v4", "v5", "C", "K3")],
        small=("v3",),
        note="path of four edges, middle cylinder of length two with a small interior vertex",
    ),
    "S1": p_fixture(
        [("a", "b", "E1", "K1"), ("b", "c", "E2", "K2"), ("c", "d", "E3", "K3")],
        note="path of three edges in three classes",
    ),
    "S2": p_fixture(
        [
            ("a", "b", "E1", "K1"),
            ("b", "c", "E2", "K2"),
            ("c", "d", "E3", "K3"),
            ("b", "p", "F1", "K4"),
            ("c", "q", "F2", "K5"),
        ],
        note="caterpillar: a path with one pendant edge of a new class at each interior vertex",
    ),
    "S3": p_fixture(
        [
            ("o", "a1", "A1", "KA"),
            ("a1", "a2", "A2", "KB"),
            ("o", "b1", "B1", "KC"),
            ("b1", "b2", "B2", "KD"),
            ("o", "c1", "C1", "KE"),
            ("c1", "c2", "C2", "KF"),
        ],
        note="spider with three legs of length two, every edge its own class",
    ),
    "S4": p_fixture(
        [
            ("x", "y", "M", "KM"),
            ("x", "x1", "P1", "KP"),
            ("x", "x2", "P2", "KP"),
            ("y", "y1", "Q1", "KQ"),
            ("y", "y2", "Q2", "KQ"),
        ],
        note="double star: two centres joined by one edge, each with a two-edge cylinder",
    ),
    "S5": p_fixture(
        [
            ("v0", "v1", "A", "K1"),
            ("v1", "v2", "B", "K2"),
            ("v2", "v3", "C", "K3"),
            ("v3", "v4", "D", "K4"),
            ("v4", "v5", "E", "K5"),
        ],
        note="path of five edges in five classes",
    ),
    "S6": p_fixture(
        [("h", "l1", "A", "K1"), ("h", "l2", "B", "K2"), ("h", "l3", "C", "K3"), ("h", "l4", "D", "K4")],
        note="star with four classes",
    ),
    "S7": p_fixture(
        [
            ("u", "w", "A1", "K1"),
            ("w", "x", "A2", "K1"),
            ("x", "y", "B", "K2"),
            ("y", "z1", "C1", "K3"),
            ("y", "z2", "C2", "K3"),
        ],
        small=("w",),
        note="a two-edge cylinder with a small interior vertex, and a two-edge cylinder fanning out at y",
    ),
    "D2": p_fixture(
        [
            ("c1", "x", "A", "K1"),
            ("c1", "a", "A2", "K1"),
            ("c1", "p", "P1", "K3"),
            ("c1", "q", "P2", "K3"),
            ("x", "c2", "B", "K2"),
            ("c2", "b", "B2", "K2"),
            ("c2", "r", "R1", "K4"),
            ("c2", "s", "R2", "K4"),
        ],
        collapse={"K1": "c1", "K2": "c2", "K3": "c1", "K4": "c2"},
        minimal=False,
        boundary=("a", "b", "p", "q", "r", "s"),
        note="every cylinder is an incomplete two-edge star; T_c* reproduces the tree spanned by c1, x, c2",
    ),
    "AX3": {
        "algebra": {
            "backend": "P",
            "classes": {"K1": ["A", "A2"], "K2": ["B"]},
            "labels": {"Va": {}, "Vb": {}, "Vc": {}, "Vd": {}},
            "inclusions": [["A", "Va"], ["A", "Vb"], ["B", "Vb"], ["B", "Vc"], ["A2", "Vc"], ["A2", "Vd"]],
        },
        "vertices": ["a", "b", "c", "d"],
        "edges": [["a", "b", "A"], ["b", "c", "B"], ["c", "d", "A2"]],
        "vertex_stabs": {"a": "Va", "b": "Vb", "c": "Vc", "d": "Vd"},
        "note": "edges ab and cd are equivalent but bc is not: the class of ab is not convex",
    },
    "SW1": {
        "algebra": {
            "backend": "P",
            "classes": {"C1": ["A", "A2"], "C2": ["B"]},
            "labels": {"H": {}, "V1": {}, "V2": {}, "V3": {}},
            "inclusions": [
                ["A", "H"],
                ["H", "A2"],
                ["A2", "V1"],
                ["A2", "V2"],
                ["B", "V2"],
                ["B", "V3"],
            ],
        },
        "vertices": ["v1", "v2", "v3"],
        "edges": [["v1", "v2", "A"], ["v2", "v3", "B"]],
        "vertex_stabs": {"v1": "V1", "v2": "V2", "v3": "V3"},
        "cylinder_stabs": [["v1", "v2", "A2"], ["v2", "v3", "B"]],
        "note": "H lies between two members of the family but is not in it: the table is not sandwich-closed",
    },
    "E2": {
        "algebra": {"backend": "W", "rank": 2},
        "vertices": ["c", "l1", "l2", "l3"],
        "edges": [["c", "l1", "a"], ["c", "l2", "a a"], ["c", "l3", "a"]],
        "vertex_stabs": {"c": "a"},
        "cylinder_stabs": [["c", "l1", "a"]],
        "declared": {"minimal": True},
        "note": "star with all edges in one class: T_c is a point",
    },
    "E4": {
        "algebra": {"backend": "L", "dim": 2, "family_rank": 2},
        "vertices": ["v1", "v2", "v3", "v4"],
        "edges": [
            ["v1", "v2", [[2, 0], [0, 2]]],
            ["v2", "v3", [[1, 0], [0, 1]]],
            ["v3", "v4", [[6, 0], [0, 6]]],
        ],
        "vertex_stabs": {"v1": [[2, 0], [0, 2]], "v2": [[1, 0], [0, 1]], "v3": [[1, 0], [0, 1]], "v4": [[6, 0], [0, 6]]},
        "cylinder_stabs": [["v1", "v2", [[1, 0], [0, 1]]]],
        "note": "one cylinder of diameter 3 whose length-3 segment has an infinite stabilizer",
    },
    "LC1": {
        "algebra": {"backend": "L", "dim": 3, "family_rank": 1},
        "vertices": ["a", "b", "c", "d"],
        "edges": [["a", "b", [[1, 0, 0]]], ["b", "c", [[0, 1, 0]]], ["c", "d", [[0, 0, 1]]]],
        "vertex_stabs": {"a": [[1, 0, 0]], "b": [[1, 0, 0], [0, 1, 0]], "c": [[0, 1, 0], [0, 0, 1]], "d": [[0, 0, 1]]},
        "cylinder_stabs": [
            ["a", "b", [[1, 0, 0]]],
            ["b", "c", [[1, 0, 0], [0, 1, 0]]],
            ["c", "d", [[0, 0, 1]]],
        ],
        "note": "the middle cylinder's stabilizer has rank 2 and fixes b: exactly one edge of T_c leaves the family",
    },
    "H1": {
        "algebra": {"backend": "L", "dim": 3, "family_rank": 1},
        "vertices": ["a", "b", "c", "d"],
        "edges": [["a", "b", [[1, 0, 0]]], ["b", "c", [[0, 1, 0]]], ["c", "d", [[0, 0, 1]]]],
        "vertex_stabs": {"a": [[1, 0, 0]], "b": [[1, 0, 0], [0, 1, 0]], "c": [[0, 1, 0], [0, 0, 1]], "d": [[0, 0, 1]]},
        "cylinder_stabs": [
            ["a", "b", [[1, 0, 0]]],
            ["b", "c", [[2, 0, 0], [0, 1, 0], [0, 0, 1]]],
            ["c", "d", [[0, 0, 1]]],
        ],
        "note": "the middle cylinder's stabilizer fixes no vertex, so the unique-collapsed-edge hypothesis is not met",
    },
    "L1": l_fixture(
        3,
        [("a", "b", [[1, 0, 0]]), ("b", "c", [[0, 1, 0]]), ("c", "d", [[0, 0, 1]])],
        {"a": [1, 1, 1], "d": [1, 2, 3]},
        note="path of three edges along three coordinate lines of Z^3",
    ),
    "L2": l_fixture(
        3,
        [("o", "p", [[2, 0, 0]]), ("o", "q", [[0, 1, 0]]), ("q", "r", [[0, 0, 3]])],
        {"p": [1, 1, 1], "r": [1, -1, 0]},
        note="path of three edges with non-primitive edge lattices",
    ),
}


if __name__ == "__main__":
    for name, doc in FIXTURES.items():
        write(name, doc)
        print("wrote", name)
