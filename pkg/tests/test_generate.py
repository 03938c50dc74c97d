import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyltree.analysis import same_deformation_space
from cyltree.generate import (
    BACKENDS,
    MAX_VERTICES,
    generate_domination,
    generate_map_chain,
    generate_pair,
    generate_window,
)
from cyltree.io import dumps, window_to_json
from cyltree.window import elementary_move, is_collapse_map, validate_admissibility, validate_window, window_canonical_form


def test_seed_one_size_five_p_is_valid():
    w = generate_window(1, "P", 5)
    assert len(w.vertices) <= 5
    assert validate_window(w).ok and validate_admissibility(w).ok


def test_determinism():
    for b in BACKENDS:
        assert dumps(window_to_json(generate_window(1, b))) == dumps(window_to_json(generate_window(1, b)))
    a, b = generate_pair(3, "L"), generate_pair(3, "L")
    assert a[2] == b[2] and window_canonical_form(a[1]) == window_canonical_form(b[1])


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**63 - 1), st.sampled_from(BACKENDS), st.integers(1, MAX_VERTICES))
def test_generated_windows_are_admissible(seed, backend, size):
    w = generate_window(seed, backend, size)
    assert len(w.vertices) <= size
    assert validate_window(w).ok
    assert validate_admissibility(w).ok


def test_large_windows():
    for seed in range(5):
        w = generate_window(seed, None, MAX_VERTICES)
        assert validate_window(w).ok and validate_admissibility(w).ok


@pytest.mark.parametrize("backend", BACKENDS)
def test_pair_scripts_replay(backend):
    for seed in range(40):
        w, w2, script = generate_pair(seed, backend)
        assert len(script) <= 4
        cur = w
        for m in script:
            cur = elementary_move(cur, m)
        assert window_canonical_form(cur) == window_canonical_form(w2)
        assert validate_window(w2).ok and validate_admissibility(w2).ok


def test_pair_mode_same_deformation_space():
    w, w2, _ = generate_pair(7, "P")
    assert same_deformation_space(w, w2)


def test_map_chains_compose():
    for seed in range(30):
        w, f, g = generate_map_chain(seed)
        assert f.target is g.source
        assert is_collapse_map(f.compose(g))


def test_domination_triples():
    for seed in range(30):
        w, w2, f = generate_domination(seed)
        assert f.source is w and f.target is w2 and is_collapse_map(f)
