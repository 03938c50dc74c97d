import pytest

from cyltree.algebra import LatticeAlgebra, WordAlgebra
from cyltree.analysis import (
    acylindricity_check,
    axis_witnesses,
    blowup_refinement,
    collapsed_as_window,
    cylinder_diameter_report,
    diameter_two_check,
    dominates,
    fixed_point_check,
    idempotence_check,
    intersection_hypothesis,
    maximality_check,
    same_deformation_space,
    segment_stabilizer,
    unique_collapsed_edge_check,
)
from cyltree.dual import collapsed_tree_of_cylinders
from cyltree.errors import (
    HypothesisNotDeclared,
    MissingVertexStabs,
    NotADomination,
    PreconditionNotDeclared,
    SandwichClosureUnverified,
    Unsupported,
)
from cyltree.generate import generate_domination, generate_pair, generate_window
from cyltree.io import window_from_json
from cyltree.window import EquivariantMap, GTreeWindow, TreeAutomorphism, collapse_edges, window_canonical_form

import oracles

# ---------------------------------------------------------------- segments and acylindricity


def test_single_edge_segment(fx):
    w = fx("E4")
    h, bound = segment_stabilizer(w, [("v1", "v2")])
    assert h == w.edge_stab[("v1", "v2")] and bound == "exact"


def test_e4_segment_stabilizer_matches_box_oracle(fx):
    w = fx("E4")
    h, _ = segment_stabilizer(w, [("v1", "v2"), ("v2", "v3"), ("v3", "v4")])
    rows = w.algebra.to_json(h)
    # <(2,0),(0,2)> ∩ Z^2 ∩ <(6,0),(0,6)> = <(6,0),(0,6)>: covolume 36, nontrivial
    assert abs(oracles.det2(rows)) == 36
    assert all(oracles.member(((6, 0), (0, 6)), v) for v in rows)


def test_distinct_roots_give_trivial_segment():
    W = WordAlgebra(2)
    w = GTreeWindow.build(W, ["x", "y", "z"], [("x", "y", W.normalize("a")), ("y", "z", W.normalize("b"))])
    h, _ = segment_stabilizer(w, w.edges)
    assert W.is_trivial(h)


def test_e4_is_not_almost_2_acylindrical(fx):
    rep = acylindricity_check(fx("E4"), 2, "almost")
    assert not rep["ok"]
    assert rep["violations"][0]["path"] == ["v1", "v2", "v3", "v4"]


def test_l_fixture_collapsed_tree_is_almost_2_acylindrical(fx):
    w = fx("L1")
    assert intersection_hypothesis(w) == []
    rep = acylindricity_check(collapsed_as_window(w), 2, "almost")
    assert rep["ok"] and rep["segments_checked"] > 0


def test_acylindricity_vacuous_caveat(fx):
    rep = acylindricity_check(fx("E4"), 10, "almost")
    assert rep["ok"] and rep["caveats"]


def test_acylindricity_needs_intersections(fx):
    with pytest.raises(Unsupported):
        acylindricity_check(fx("E1"), 2)


def test_boundary_paths_are_window_limited():
    L = LatticeAlgebra(2, 2)
    I = L.normalize([[1, 0], [0, 1]])
    w = GTreeWindow.build(L, list("abcd"), [("a", "b", I), ("b", "c", I), ("c", "d", I)], boundary=frozenset({"a"}))
    rep = acylindricity_check(w, 2)
    assert rep["ok"] and len(rep["window_limited"]) == 1


# ---------------------------------------------------------------- diameters


def test_e1_collapsed_diameters(fx):
    rep = diameter_two_check(collapsed_tree_of_cylinders(fx("E1")))
    assert rep["ok"] and all(r["diameter"] <= 2 for r in rep["cylinders"])


def test_non_minimal_window_makes_no_exactness_claim(fx):
    rep = diameter_two_check(collapsed_tree_of_cylinders(fx("D2")))
    assert rep["ok"] and not rep["exactness_claimed"] and rep["caveats"]


def test_cylinder_diameter_report(fx):
    rep = cylinder_diameter_report(fx("E4"))
    assert [r["diameter"] for r in rep["cylinders"]] == [3]


def test_fixed_point_on_diameter_two_window(fx):
    rep = fixed_point_check(fx("D2"))
    assert rep["ok"]
    assert rep["pruned"] == ["a", "b", "p", "q", "r", "s"]


def test_fixed_point_precondition(fx):
    with pytest.raises(PreconditionNotDeclared):
        fixed_point_check(fx("E1"))


# ---------------------------------------------------------------- unique collapsed edge


def test_unique_collapsed_without_collapse(fx):
    assert unique_collapsed_edge_check(fx("E1"))["ok"]


def test_unique_collapsed_lattice_instance(fx):
    rep = unique_collapsed_edge_check(fx("LC1"))
    assert rep["ok"] and sum(r["collapsed"] for r in rep["cylinders"]) == 1


def test_unique_collapsed_hypothesis_guard(fx):
    with pytest.raises(HypothesisNotDeclared):
        unique_collapsed_edge_check(fx("H1"))


# ---------------------------------------------------------------- domination


def test_domination_examples(fx):
    w = fx("E1")
    assert dominates(w, w) and same_deformation_space(w, w)
    w2, _ = collapse_edges(w, [("v2", "v3")])
    assert dominates(w, w2)


def test_disjoint_stabilizers_do_not_dominate():
    L = LatticeAlgebra(2, 1)
    x, y = L.normalize([[1, 0]]), L.normalize([[0, 1]])
    a = GTreeWindow.build(L, ["p"], [], vertex_stab={"p": x})
    b = GTreeWindow.build(L, ["q"], [], vertex_stab={"q": y})
    assert not dominates(a, b) and not dominates(b, a)


def test_domination_needs_stabilizers(fx):
    with pytest.raises(MissingVertexStabs):
        dominates(fx("E2"), fx("E2"))


@pytest.mark.parametrize("backend", ["L", "P"])
def test_pairs_share_deformation_space(backend):
    for seed in range(80):
        w, w2, script = generate_pair(seed, backend)
        assert same_deformation_space(w, w2), (seed, script)


def test_maximality_on_generated_triples():
    done = 0
    for seed in range(200):
        w, w2, f = generate_domination(seed, ["L", "P"][seed % 2])
        try:
            rep = maximality_check(w, w2)
        except PreconditionNotDeclared:
            continue
        assert rep["ok"], seed
        done += 1
    assert done > 50


# ---------------------------------------------------------------- idempotence


def test_e1_idempotence(fx):
    assert idempotence_check(fx("E1"))["ok"]


def test_e2_point_is_fixed(fx):
    rep = idempotence_check(fx("E2"))
    assert rep["ok"] and rep["nodes"] == [1, 1]


def test_lattice_collapse_idempotence(fx):
    assert idempotence_check(fx("LC1"))["ok"]


def test_sandwich_guard(fx):
    with pytest.raises(SandwichClosureUnverified):
        idempotence_check(fx("SW1"))


def test_window_limited_idempotence(fx):
    rep = idempotence_check(fx("D2"))
    assert rep["ok"] is None and rep["caveats"]


# ---------------------------------------------------------------- axis witnesses


def test_axis_witness_found():
    W = WordAlgebra(2)
    a = W.normalize("a")
    w = GTreeWindow.build(
        W,
        ["v0", "v1", "v2", "v3"],
        [("v0", "v1", a), ("v1", "v2", a), ("v2", "v3", a)],
        generators=(TreeAutomorphism("t", {"v0": "v1", "v1": "v2", "v2": "v3"}),),
    )
    rep = axis_witnesses(w)
    assert rep["conclusive"] and rep["witnesses"][0]["translation"] == 1


def test_axis_absence_is_inconclusive(fx):
    rep = axis_witnesses(fx("E1"))
    assert not rep["conclusive"] and rep["note"]


# ---------------------------------------------------------------- blow-up


def test_blowup_e1_collapse(fx):
    w = fx("E1")
    w2, f = collapse_edges(w, [("v2", "v3")])
    r = blowup_refinement(f)
    assert r.checks["ok"]
    assert len(r.tc.edges) == 2 and len(w2.edges) == 1
    assert len(r.tree.edges) == 3


def test_blowup_identity(fx):
    w = fx("E1")
    f = EquivariantMap(w, w, {v: v for v in w.vertices})
    r = blowup_refinement(f)
    assert r.checks["ok"] and r.checks["recovers_Tprime"]


def test_blowup_rejects_fold(fx):
    w = fx("E3")
    tgt, _ = collapse_edges(w, [("c", "lb"), ("c", "lc")])
    fold = EquivariantMap(w, tgt, {"c": "c", "la": "la", "lb": "la", "lc": "c"})
    with pytest.raises(NotADomination):
        blowup_refinement(fold)


def test_blowup_on_generated_triples():
    for seed in range(60):
        _, _, f = generate_domination(seed)
        assert blowup_refinement(f).checks["ok"], seed
