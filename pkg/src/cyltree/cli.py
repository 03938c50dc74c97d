"""Command-line front end.

Every command reads instance files, runs one operation and prints (or writes
with ``--out``) a JSON report with sorted keys, so identical inputs give
identical bytes.  Exit codes: 0 when every check passes, 1 when a violation is
found, 2 when an input cannot be parsed or a capability or precondition is
missing; in the last case a JSON error object is printed.
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .analysis import (
    acylindricity_check,
    axis_witnesses,
    blowup_refinement,
    collapsed_acylindricity_check,
    cylinder_diameter_report,
    diameter_two_check,
    fixed_point_check,
    idempotence_check,
    unique_collapsed_edge_check,
)
from .dual import (
    algebraic_graph,
    collapsed_tree_of_cylinders,
    dual_dot,
    embedding_j,
    induced_map,
    induced_map_collapsed,
    segment5_check,
    tree_of_cylinders,
    window_dot,
    zgraph_dot,
)
from .errors import CAPABILITY_ERRORS, CyltreeError
from .generate import BACKENDS, generate_map_chain, generate_pair, generate_window
from .io import dumps, load_window, map_from_json, map_to_json, read_json, window_to_json, write_atomic
from .window import compute_cylinders, validate_admissibility, validate_window

FIXTURE_ENV = "CYLTREE_FIXTURES"
PACKAGE_FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixtures_dir():
    return os.environ.get(FIXTURE_ENV) or PACKAGE_FIXTURES


def resolve(path):
    """A path as given, or else the file of that name in the fixture directory."""
    if os.path.exists(path):
        return path
    alt = os.path.join(fixtures_dir(), path)
    if os.path.exists(alt):
        return alt
    if os.path.exists(alt + ".json"):
        return alt + ".json"
    return path


def load_map(path):
    path = resolve(path)
    return map_from_json(read_json(path), base_dir=os.path.dirname(os.path.abspath(path)))


# ---------------------------------------------------------------- checks


def _validate(w):
    r = validate_window(w)
    return {"ok": r.ok, **r.to_json()}


def _admissibility(w):
    r = validate_admissibility(w)
    return {"ok": r.ok, **r.to_json()}


def _diameter(w):
    return diameter_two_check(collapsed_tree_of_cylinders(w))


def _acylindricity(w):
    """Almost 2-acylindricity of the input tree itself."""
    return acylindricity_check(w, 2, "almost")


CHECKS = {
    "validate": _validate,
    "admissibility": _admissibility,
    "segment5": segment5_check,
    "idempotence": idempotence_check,
    "diameter": _diameter,
    "unique-collapsed": unique_collapsed_edge_check,
    "acylindricity": _acylindricity,
    "collapsed-acylindricity": collapsed_acylindricity_check,
    "fixed-point": fixed_point_check,
    "axis": axis_witnesses,
    "cylinder-diameters": cylinder_diameter_report,
}


def run_check(name, w):
    """``(status, payload)`` with status ``pass``, ``fail``, ``window-limited`` or ``unavailable``."""
    try:
        rep = CHECKS[name](w)
    except CAPABILITY_ERRORS as exc:
        return "unavailable", exc.to_json()
    except CyltreeError as exc:
        return "fail", exc.to_json()
    ok = rep.get("ok", True)
    if ok is None:
        return "window-limited", rep
    return ("pass" if ok else "fail"), rep


def analyze_window(path, checks):
    w = load_window(path)
    out = {}
    for name in checks:
        status, rep = run_check(name, w)
        out[name] = {"status": status, "report": rep}
    return out


def _exit_code(results, strict):
    statuses = [r["status"] for r in results.values()]
    if "fail" in statuses:
        return 1
    if strict and "unavailable" in statuses:
        return 2
    return 0


# ---------------------------------------------------------------- commands


def cmd_validate(args):
    w = load_window(resolve(args.file))
    a, b = validate_window(w), validate_admissibility(w)
    rep = {"window": a.to_json(), "admissibility": b.to_json(), "ok": a.ok and b.ok}
    return rep, 0 if rep["ok"] else 1, window_dot(w)


def _cylinder_json(w, Y):
    A = w.algebra
    return {
        "class": Y.class_id,
        "edges": [list(e) for e in sorted(Y.edges)],
        "vertices": sorted(Y.vertices),
        "boundary": sorted(Y.boundary),
        "stabilizer": None if Y.stabilizer is None else A.to_json(Y.stabilizer),
        "diameter": Y.diameter(w),
        "possibly_truncated": Y.truncated,
    }


def cmd_cylinders(args):
    w = load_window(resolve(args.file))
    return {"cylinders": [_cylinder_json(w, Y) for Y in compute_cylinders(w)]}, 0, window_dot(w)


def cmd_toc(args):
    w = load_window(resolve(args.file))
    tc = tree_of_cylinders(w)
    rep = tc.to_json()
    rep["node_count"] = len(tc.kind)
    rep["edge_count"] = len(tc.edges)
    return rep, 0, dual_dot(tc)


def cmd_collapse(args):
    w = load_window(resolve(args.file))
    tc = tree_of_cylinders(w)
    ts = collapsed_tree_of_cylinders(w, tc)
    rep = ts.to_json()
    rep["node_count"] = len(ts.kind)
    rep["edge_count"] = len(ts.edges)
    rep["collapsed_edges"] = sorted(list(k) for k, e in tc.edges.items() if e.in_family is False)
    rep["unresolved_edges"] = sorted(list(k) for k in ts.unresolved)
    return rep, 0, dual_dot(ts, highlight={n for n, k in ts.kind.items() if k == "m"})


def cmd_zgraph(args):
    w = load_window(resolve(args.file))
    z = algebraic_graph(w)
    jm, jrep = embedding_j(w, z=z)
    rep = {"z": z.to_json(), "j": dict(sorted(jm.items())), "embedding": jrep}
    code = 0 if jrep["ok"] else 1
    try:
        rep["segment5"] = segment5_check(w)
        code = max(code, 0 if rep["segment5"]["ok"] else 1)
    except CAPABILITY_ERRORS as exc:
        rep["segment5"] = exc.to_json()
    return rep, code, zgraph_dot(z, jm)


def cmd_map(args):
    f = load_map(args.file)
    if args.collapsed:
        fc, rep = induced_map_collapsed(f)
        out = {"induced": None if fc is None else fc.to_json(), "report": rep}
        return out, 0 if rep.get("ok", True) else 1, None
    fc = induced_map(f)
    out = {"induced": fc.to_json(), "cellular": fc.is_cellular(), "preserves_alignment": fc.preserves_alignment()}
    return out, 0 if out["cellular"] else 1, None


def cmd_refine(args):
    f = load_map(args.file)
    r = blowup_refinement(f)
    rep = r.to_json()
    return rep, 0 if r.checks.get("ok") else 1, window_dot(r.tree, name="T_hat")


def _selected_checks(name):
    if name in (None, "all"):
        return list(CHECKS)
    if name not in CHECKS:
        raise SystemExit(f"unknown check {name!r}; choose from: all, {', '.join(CHECKS)}")
    return [name]


def cmd_analyze(args):
    checks = _selected_checks(args.check)
    strict = args.check not in (None, "all")
    if args.all:
        return _analyze_corpus(args, checks, strict)
    if not args.files:
        raise SystemExit("analyze needs instance files or --all")
    reports = {}
    code = 0
    for p in args.files:
        res = analyze_window(resolve(p), checks)
        reports[p] = res
        code = max(code, _exit_code(res, strict))
    rep = reports[args.files[0]] if len(args.files) == 1 else reports
    return rep, code, None


def _analyze_corpus(args, checks, strict):
    d = fixtures_dir()
    names = sorted(f for f in os.listdir(d) if f.endswith(".json"))
    out_dir = args.out
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)

    def one(name):
        res = analyze_window(os.path.join(d, name), checks)
        if out_dir:
            write_atomic(os.path.join(out_dir, name[: -len(".json")] + ".report.json"), dumps(res))
        return name, res

    with ThreadPoolExecutor(max_workers=min(8, len(names) or 1)) as pool:
        results = dict(pool.map(one, names))
    summary = {n: {c: r["status"] for c, r in res.items()} for n, res in sorted(results.items())}
    code = max([_exit_code(res, strict) for res in results.values()] or [0])
    args.out = None  # the directory holds the per-fixture reports; the summary goes to stdout
    return {"fixtures_dir": d, "summary": summary}, code, None


def cmd_gen(args):
    if args.pairs:
        w, w2, script = generate_pair(args.seed, args.backend, args.size)
        v = [validate_window(x).ok and validate_admissibility(x).ok for x in (w, w2)]
        rep = {"source": window_to_json(w), "target": window_to_json(w2), "script": script, "valid": v}
        return rep, 0 if all(v) else 1, None
    if args.maps:
        w, f, g = generate_map_chain(args.seed, args.backend, args.size)
        return {"first": map_to_json(f), "second": map_to_json(g)}, 0, None
    w = generate_window(args.seed, args.backend, args.size)
    return window_to_json(w), 0, window_dot(w)


COMMANDS = {
    "validate": cmd_validate,
    "cylinders": cmd_cylinders,
    "toc": cmd_toc,
    "collapse": cmd_collapse,
    "zgraph": cmd_zgraph,
    "map": cmd_map,
    "refine": cmd_refine,
    "analyze": cmd_analyze,
    "gen": cmd_gen,
}


def build_parser():
    p = argparse.ArgumentParser(prog="cyltree", description="Trees of cylinders of finite tree windows.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--dot", help="also write a DOT rendering to this path")
    common.add_argument("--format", choices=["json"], default="json", help="report format (only json)")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("validate", "well-formedness and admissibility reports"),
        ("cylinders", "the cylinders of a window"),
        ("toc", "the tree of cylinders T_c"),
        ("collapse", "the collapsed tree of cylinders T_c*"),
        ("zgraph", "the graph Z, the embedding j and the segment-5 check"),
    ]:
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("file")
    s = sub.add_parser("map", parents=[common], help="the map induced on trees of cylinders")
    s.add_argument("file", help="map file with source, target and vertex_map")
    s.add_argument("--collapsed", action="store_true", help="induce on T_c* instead of T_c")
    s = sub.add_parser("refine", parents=[common], help="blow-up refinement of a domination map")
    s.add_argument("file", help="map file with source, target and vertex_map")
    s = sub.add_parser("analyze", parents=[common], help="run structural checks")
    s.add_argument("files", nargs="*")
    s.add_argument("--check", default="all", help=f"one of: all, {', '.join(CHECKS)}")
    s.add_argument("--all", action="store_true", help=f"analyze every fixture in ${FIXTURE_ENV} concurrently")
    s = sub.add_parser("gen", parents=[common], help="seeded instance generator")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--backend", choices=BACKENDS)
    s.add_argument("--size", type=int, help="maximum number of vertices (at most 64)")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--pairs", action="store_true", help="a window, a window reached by moves, and the move script")
    g.add_argument("--maps", action="store_true", help="two composable collapse maps")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "gen" and args.size is not None and not 1 <= args.size <= 64:
        print(dumps({"error": "ParseError", "message": "--size must be between 1 and 64"}), end="")
        return 2
    try:
        rep, code, dot = COMMANDS[args.command](args)
    except CAPABILITY_ERRORS as exc:
        print(dumps(exc.to_json()), end="")
        return 2
    except CyltreeError as exc:
        print(dumps(exc.to_json()), end="")
        return 1
    text = dumps(rep)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    if args.dot and dot is not None:
        write_atomic(args.dot, dot)
    return code


if __name__ == "__main__":
    sys.exit(main())
