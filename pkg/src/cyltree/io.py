"""Instance files: JSON parsing and deterministic serialization.

One format serves every backend; the ``algebra`` block carries the backend
discriminant.  Vertex ids are strings (integers in input are converted).
"""

import json
import os
import tempfile

from .algebra import algebra_from_json
from .errors import ParseError
from .treeutil import ekey
from .window import EquivariantMap, GTreeWindow, TreeAutomorphism


def _vid(x):
    if isinstance(x, bool) or not isinstance(x, (str, int)):
        raise ParseError(f"vertex id must be a string or integer, got {x!r}")
    return str(x)


def _triples(A, rows, field):
    out = {}
    for row in rows or []:
        if not isinstance(row, (list, tuple)) or len(row) != 3:
            raise ParseError(f"{field} entries are [u, v, stab], got {row!r}")
        out[ekey(_vid(row[0]), _vid(row[1]))] = A.normalize(row[2])
    return out


def window_from_json(data):
    if not isinstance(data, dict):
        raise ParseError("instance must be a JSON object")
    for key in ("algebra", "vertices", "edges"):
        if key not in data:
            raise ParseError(f"instance is missing {key!r}")
    A = algebra_from_json(data["algebra"])
    vertices = [_vid(v) for v in data["vertices"]]
    if len(set(vertices)) != len(vertices):
        raise ParseError("repeated vertex id")
    edges = []
    for row in data["edges"]:
        if not isinstance(row, (list, tuple)) or len(row) != 3:
            raise ParseError(f"edges are [u, v, stab], got {row!r}")
        edges.append((_vid(row[0]), _vid(row[1]), A.normalize(row[2])))
    vstab = {_vid(v): A.normalize(s) for v, s in (data.get("vertex_stabs") or {}).items()}
    gens = []
    for g in data.get("generators") or []:
        if not isinstance(g, dict) or "name" not in g:
            raise ParseError(f"generator needs a name, got {g!r}")
        gens.append(TreeAutomorphism(str(g["name"]), {_vid(a): _vid(b) for a, b in (g.get("map") or {}).items()}))
    declared = dict(data.get("declared") or {})
    if "extra_classes" in declared:
        declared["extra_classes"] = [A.normalize(x) for x in declared["extra_classes"]]
    small = {}
    for v, s in (data.get("small") or {}).items():
        if not isinstance(s, bool):
            raise ParseError(f"small flag for {v!r} must be boolean")
        small[_vid(v)] = s
    w = GTreeWindow.build(
        A,
        vertices,
        edges,
        vertex_stab=vstab,
        boundary=frozenset(_vid(v) for v in data.get("boundary") or []),
        generators=tuple(gens),
        relative_marks=tuple(frozenset(_vid(v) for v in m) for m in data.get("relative_marks") or []),
        small=small,
        cylinder_stabs=_triples(A, data.get("cylinder_stabs"), "cylinder_stabs"),
        edge_upper=_triples(A, data.get("edge_upper"), "edge_upper"),
        declared=declared,
    )
    if len(w.edges) != len(set(w.edges)):
        raise ParseError("repeated edge")
    return w


def window_to_json(w):
    A = w.algebra
    out = {
        "algebra": A.config_json(),
        "vertices": sorted(w.vertices),
        "edges": [[u, v, A.to_json(w.edge_stab[(u, v)])] for u, v in sorted(w.edges)],
    }
    if w.vertex_stab:
        out["vertex_stabs"] = {v: A.to_json(w.vertex_stab[v]) for v in sorted(w.vertex_stab)}
    if w.boundary:
        out["boundary"] = sorted(w.boundary)
    if w.generators:
        out["generators"] = [{"name": g.name, "map": dict(sorted(g.vertex_map.items()))} for g in w.generators]
    if w.relative_marks:
        out["relative_marks"] = [sorted(m) for m in w.relative_marks]
    if w.small:
        out["small"] = dict(sorted(w.small.items()))
    for name in ("cylinder_stabs", "edge_upper"):
        d = getattr(w, name)
        if d:
            out[name] = [[u, v, A.to_json(d[(u, v)])] for u, v in sorted(d)]
    if w.declared:
        dec = dict(w.declared)
        if "extra_classes" in dec:
            dec["extra_classes"] = [A.to_json(h) for h in dec["extra_classes"]]
        out["declared"] = dec
    return out


def map_from_json(data, base_dir=None):
    """``{"source": inst, "target": inst, "vertex_map": {...}}``; instances may be file paths."""

    def inst(x):
        if isinstance(x, str):
            return load_window(os.path.join(base_dir or ".", x))
        return window_from_json(x)

    for key in ("source", "target", "vertex_map"):
        if key not in data:
            raise ParseError(f"map file is missing {key!r}")
    s, t = inst(data["source"]), inst(data["target"])
    vm = {_vid(a): _vid(b) for a, b in data["vertex_map"].items()}
    f = EquivariantMap(s, t, vm)
    if not f.well_formed():
        raise ParseError("vertex_map must be total on the source and land in the target")
    return f


def map_to_json(f):
    return {
        "source": window_to_json(f.source),
        "target": window_to_json(f.target),
        "vertex_map": dict(sorted(f.vertex_map.items())),
    }


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc


def load_window(path):
    return window_from_json(read_json(path))


def write_atomic(path, text):
    """Write via a temporary file in the same directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
