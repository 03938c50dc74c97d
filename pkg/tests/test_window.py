import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyltree.algebra import LatticeAlgebra, WordAlgebra
from cyltree.errors import DisconnectedClass, IllegalMove, ParseError
from cyltree.generate import generate_window
from cyltree.io import window_from_json, window_to_json
from cyltree.treeutil import canonical_form, ekey
from cyltree.window import (
    EquivariantMap,
    GTreeWindow,
    collapse_edges,
    compute_cylinders,
    elementary_move,
    is_collapse_map,
    is_collapse_map_bruteforce,
    validate_admissibility,
    validate_window,
    window_canonical_form,
)


def relabel(w, mapping):
    """The same window with vertex ids renamed."""
    m = mapping.get
    return GTreeWindow.build(
        w.algebra,
        [m(v) for v in w.vertices],
        [(m(u), m(v), w.edge_stab[(u, v)]) for u, v in w.edges],
        vertex_stab={m(v): h for v, h in w.vertex_stab.items()},
        boundary=frozenset(m(v) for v in w.boundary),
        small={m(v): s for v, s in w.small.items()},
        cylinder_stabs={ekey(m(u), m(v)): h for (u, v), h in w.cylinder_stabs.items()},
        edge_upper={ekey(m(u), m(v)): h for (u, v), h in w.edge_upper.items()},
        declared=dict(w.declared),
    )


def shuffled_ids(w, seed):
    rng = random.Random(seed)
    new = [f"r{i}" for i in range(len(w.vertices))]
    rng.shuffle(new)
    return dict(zip(w.vertices, new))


# ---------------------------------------------------------------- validation


def test_e1_is_well_formed_and_admissible(fx):
    w = fx("E1")
    assert validate_window(w).ok
    assert validate_admissibility(w).ok


def test_e4_is_admissible(fx):
    w = fx("E4")
    assert validate_window(w).ok and validate_admissibility(w).ok


def test_axiom3_violation_reported(fx):
    assert "Axiom3Violation" in validate_admissibility(fx("AX3")).kinds()


def test_not_a_tree_reported():
    W = WordAlgebra(2)
    a = W.normalize("a")
    w = GTreeWindow.build(W, ["x", "y", "z"], [("x", "y", a), ("y", "z", a), ("x", "z", a)])
    assert "NotATree" in validate_window(w).kinds()


def test_edge_not_in_family_reported():
    W = WordAlgebra(2)
    w = GTreeWindow.build(W, ["x", "y"], [("x", "y", W.trivial())])
    assert "NotInFamily" in validate_window(w).kinds()


def test_vertex_must_contain_edge():
    W = WordAlgebra(2)
    w = GTreeWindow.build(W, ["x", "y"], [("x", "y", W.normalize("a"))], vertex_stab={"x": W.normalize("a a")})
    assert "VertexEdgeInclusion" in validate_window(w).kinds()


def test_generator_checks():
    W = WordAlgebra(2)
    a = W.normalize("a")
    data = {
        "algebra": {"backend": "W", "rank": 2},
        "vertices": ["x", "y", "z"],
        "edges": [["x", "y", "a"], ["y", "z", "b"]],
        "generators": [{"name": "g", "map": {"x": "z", "y": "z"}}],
    }
    w = window_from_json(data)
    assert "GeneratorNotInjective" in validate_window(w).kinds()
    assert a in w.present_handles


def test_parse_errors():
    with pytest.raises(ParseError):
        window_from_json({"algebra": {"backend": "W"}, "vertices": ["x"]})
    with pytest.raises(ParseError):
        window_from_json({"algebra": {"backend": "W"}, "vertices": ["x", "x"], "edges": []})
    with pytest.raises(ParseError):
        window_from_json({"algebra": {"backend": "W"}, "vertices": ["x", "y"], "edges": [["x", "y"]]})


# ---------------------------------------------------------------- cylinders


def test_e1_cylinders(fx):
    w = fx("E1")
    cyls = compute_cylinders(w)
    assert [sorted(Y.edges) for Y in cyls] == [[("v1", "v2")], [("v2", "v3")]]
    assert all(Y.boundary == frozenset({"v2"}) for Y in cyls)


def test_e2_single_cylinder_without_boundary(fx):
    (Y,) = compute_cylinders(fx("E2"))
    assert len(Y.edges) == 3 and not Y.boundary


def test_e4_single_cylinder_of_diameter_three(fx):
    w = fx("E4")
    (Y,) = compute_cylinders(w)
    assert len(Y.edges) == 3 and Y.diameter(w) == 3


def test_disconnected_class_raises(fx):
    with pytest.raises(DisconnectedClass):
        compute_cylinders(fx("AX3"))


def test_boundary_marks_truncated_cylinder():
    L = LatticeAlgebra(2, 1)
    x = L.normalize([[1, 0]])
    w = GTreeWindow.build(L, ["a", "b"], [("a", "b", x)], boundary=frozenset({"a"}))
    (Y,) = compute_cylinders(w)
    assert Y.truncated


# ---------------------------------------------------------------- maps and moves


def test_collapse_edges_is_a_collapse_map(fx):
    w = fx("E1")
    w2, f = collapse_edges(w, [("v2", "v3")])
    assert len(w2.vertices) == 2 and len(w2.edges) == 1
    assert is_collapse_map(f) and is_collapse_map_bruteforce(f)


def test_fold_is_not_a_collapse_map(fx):
    w = fx("E3")
    tgt, _ = collapse_edges(w, [("c", "lb"), ("c", "lc")])
    fold = EquivariantMap(w, tgt, {"c": "c", "la": "la", "lb": "la", "lc": "c"})
    assert fold.well_formed()
    assert not is_collapse_map(fold)
    assert not is_collapse_map_bruteforce(fold)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 2**16))
def test_collapse_map_agrees_with_bruteforce(seed, pick):
    w = generate_window(seed)
    rng = random.Random(pick)
    chosen = [e for e in w.edges if rng.random() < 0.5]
    _, f = collapse_edges(w, chosen)
    assert is_collapse_map(f) == is_collapse_map_bruteforce(f) is True


def test_elementary_moves_roundtrip():
    L = LatticeAlgebra(2, 1)
    x, y = L.normalize([[1, 0]]), L.normalize([[0, 1]])
    xy = L.join(x, y)
    w = GTreeWindow.build(
        L,
        ["a", "b", "c"],
        [("a", "b", x), ("a", "c", y)],
        vertex_stab={"a": xy, "b": x, "c": y},
    )
    w2 = elementary_move(w, {"op": "expand", "vertex": "a", "handle": [[1, 0]], "edges": [["a", "b"]], "new_vertex": "n"})
    assert len(w2.edges) == 3 and w2.vertex_stab["n"] == x
    back = elementary_move(w2, {"op": "collapse", "edge": ["a", "n"], "into": "a"})
    assert window_canonical_form(back) == window_canonical_form(w)


def test_illegal_moves():
    L = LatticeAlgebra(2, 1)
    x, y = L.normalize([[1, 0]]), L.normalize([[0, 1]])
    w = GTreeWindow.build(L, ["a", "b"], [("a", "b", x)], vertex_stab={"a": L.join(x, y), "b": L.join(x, y)})
    with pytest.raises(IllegalMove):
        elementary_move(w, {"op": "collapse", "edge": ["a", "b"]})
    with pytest.raises(IllegalMove):
        elementary_move(w, {"op": "expand", "vertex": "a", "handle": [[0, 1]], "edges": [["a", "b"]], "new_vertex": "n"})
    with pytest.raises(IllegalMove):
        elementary_move(w, {"op": "expand", "vertex": "a", "handle": [[1, 0]], "edges": [], "new_vertex": "n"})
    with pytest.raises(IllegalMove):
        elementary_move(w, {"op": "twist"})


# ---------------------------------------------------------------- canonical forms and serialization


def test_canonical_form_distinguishes_labels():
    a = canonical_form(["x", "y", "z"], [("x", "y"), ("y", "z")], lambda v: v == "y")
    b = canonical_form(["x", "y", "z"], [("x", "y"), ("y", "z")], lambda v: v == "x")
    assert a != b


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**40), st.integers(0, 2**16))
def test_canonical_form_invariant_under_renumbering(seed, perm_seed):
    w = generate_window(seed)
    w2 = relabel(w, shuffled_ids(w, perm_seed))
    assert window_canonical_form(w) == window_canonical_form(w2)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**40))
def test_serialization_roundtrip(seed):
    w = generate_window(seed)
    data = window_to_json(w)
    again = window_from_json(json.loads(json.dumps(data)))
    assert window_to_json(again) == data
    assert window_canonical_form(again) == window_canonical_form(w)


def test_fixture_roundtrip(fx):
    for name in ("E1", "E2", "E4", "L1", "D2"):
        w = fx(name)
        assert window_to_json(window_from_json(window_to_json(w))) == window_to_json(w)
