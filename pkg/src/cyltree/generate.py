"""Seeded generators of admissible windows, deformation pairs and collapse maps.

Cylinders are laid out first (each new edge either continues a cylinder
already present at its attaching vertex or opens a new one), and stabilizers
are assigned per cylinder afterwards, so every class is connected by
construction.
"""

import random
from math import gcd

from .algebra import LatticeAlgebra, PartitionAlgebra, WordAlgebra
from .algebra import intlat, words
from .dual import induced_map
from .errors import IllegalMove
from .treeutil import ekey
from .window import GTreeWindow, collapse_edges, compute_cylinders, elementary_move

BACKENDS = ("W", "L", "P")
LATTICE_CONFIGS = ((2, 1), (3, 1), (2, 2), (3, 2))
MAX_VERTICES = 64


def _rng(seed, tag):
    # string seeds are hashed with SHA-512 by ``random``, so this is stable across runs
    return random.Random(f"cyltree:{tag}:{int(seed)}")


def _layout(rng, n, reuse=0.5):
    """Random tree on ``n`` vertices with a connected class label per edge."""
    names = [f"v{i}" for i in range(n)]
    edges, cls = [], {}
    at = {names[0]: []}
    ncls = 0
    for i in range(1, n):
        p = names[rng.randrange(i)]
        c = names[i]
        if at[p] and rng.random() < reuse:
            k = rng.choice(at[p])
        else:
            k = ncls
            ncls += 1
        e = ekey(p, c)
        edges.append(e)
        cls[e] = k
        if k not in at[p]:
            at[p].append(k)
        at[c] = [k]
    return names, edges, cls, ncls


def _classes_at(names, edges, cls):
    at = {v: set() for v in names}
    for e in edges:
        for v in e:
            at[v].add(cls[e])
    return at


def _cyl_members(edges, cls, ncls):
    out = {k: [] for k in range(ncls)}
    for e in edges:
        out[cls[e]].append(e)
    return out


def _boundary_flags(rng, names, edges):
    deg = {v: 0 for v in names}
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    leaves = [v for v in names if deg[v] == 1]
    return frozenset(v for v in leaves if rng.random() < 0.15)


# ---------------------------------------------------------------- backend W


def _random_root(rng, rank, taken):
    for _ in range(100):
        length = rng.randint(1, 4)
        letters = [g for g in range(1, rank + 1) for g in (g, -g)]
        wd = []
        while len(wd) < length:
            x = rng.choice(letters)
            if wd and wd[-1] == -x:
                continue
            wd.append(x)
        root, _ = words.primitive_root(tuple(wd))
        root = words.canonical_generator(root)
        if root not in taken:
            taken.add(root)
            return root
    raise RuntimeError("could not draw a fresh primitive root")


def _gen_w(rng, n):
    rank = rng.choice((2, 3))
    A = WordAlgebra(rank)
    names, edges, cls, ncls = _layout(rng, n)
    taken = set()
    roots = [_random_root(rng, rank, taken) for _ in range(ncls)]
    exp = {e: rng.randint(1, 3) for e in edges}
    stabs = [(u, v, A.from_word(words.power(roots[cls[(u, v)]], exp[(u, v)]))) for u, v in edges]
    at = _classes_at(names, edges, cls)
    vstab, small = {}, {}
    for v in names:
        if len(at[v]) >= 2:
            small[v] = False
            continue
        if not at[v] or rng.random() < 0.3:
            continue
        k = next(iter(at[v]))
        g = 0
        for e in edges:
            if v in e:
                g = gcd(g, exp[e])
        if rng.random() < 0.3:
            g = 1
        vstab[v] = A.from_word(words.power(roots[k], g))
    cyl = {}
    for k, es in _cyl_members(edges, cls, ncls).items():
        cyl[min(es)] = A.from_word(roots[k])
    return GTreeWindow.build(
        A,
        names,
        stabs,
        vertex_stab=vstab,
        small=small,
        cylinder_stabs=cyl,
        boundary=_boundary_flags(rng, names, edges),
    )


# ---------------------------------------------------------------- backend L


def _random_saturated(rng, n, r, taken):
    for _ in range(200):
        rows = [tuple(rng.randint(-3, 3) for _ in range(n)) for _ in range(r)]
        lat = intlat.hnf(rows, n)
        if intlat.rank(lat) != r:
            continue
        sat = intlat.saturation(lat, n)
        if sat not in taken:
            taken.add(sat)
            return sat
    return None


def _sublattice(rng, basis, n):
    r = len(basis)
    rows = []
    for i in range(r):
        coeff = [0] * r
        coeff[i] = rng.randint(1, 3)
        for j in range(i + 1, r):
            coeff[j] = rng.randint(0, 1)
        rows.append(tuple(sum(coeff[j] * basis[j][t] for j in range(r)) for t in range(n)))
    return rows


def _gen_l(rng, n_vertices):
    n, r = rng.choice(LATTICE_CONFIGS)
    A = LatticeAlgebra(n, r)
    names, edges, cls, ncls = _layout(rng, n_vertices, reuse=1.0 if (n, r) == (2, 2) else 0.5)
    taken, sats = set(), []
    for _ in range(ncls):
        s = _random_saturated(rng, n, r, taken)
        if s is None:
            # the configuration ran out of classes; merge into the last one
            s = sats[-1]
        sats.append(s)
    if len(set(sats)) != len(sats):
        # classes must be distinct: fall back to a single class
        cls = {e: 0 for e in edges}
        ncls, sats = 1, sats[:1]
    es = {e: A.normalize(_sublattice(rng, sats[cls[e]], n)) for e in edges}
    members = _cyl_members(edges, cls, ncls)
    at = _classes_at(names, edges, cls)
    vstab = {}
    for v in names:
        g = None
        for e in edges:
            if v in e:
                g = es[e] if g is None else A.join(g, es[e])
        vstab[v] = g if g is not None else A.trivial()
    gy, kind = {}, {}
    for k, ms in members.items():
        base = ms and es[ms[0]]
        for e in ms[1:]:
            base = A.join(base, es[e])
        verts = sorted({v for e in ms for v in e})
        bd = [v for v in verts if len(at[v]) >= 2]
        if r < n and len(bd) >= 2 and rng.random() < 0.35:
            x = rng.choice(bd)
            others = [es[e] for e in edges if x in e and cls[e] != k]
            u = A.normalize([others[0].payload[0]])
            gy[k] = A.join(base, u)
            kind[k] = ("collapse", x)
            vstab[x] = A.join(vstab[x], base)
        else:
            gy[k] = base
            center = rng.choice(bd or verts)
            kind[k] = ("center", center)
            vstab[center] = A.join(vstab[center], base)
    # a collapsing cylinder must have exactly one out-of-family incidence; otherwise fall back
    for k, ms in members.items():
        if kind[k][0] != "collapse":
            continue
        x = kind[k][1]
        verts = {v for e in ms for v in e}
        bad = False
        for y in verts:
            if len(at[y]) < 2:
                continue
            h = A.intersect(vstab[y], gy[k])
            if A.in_family(h) == (y == x):
                bad = True
        if bad:
            base = es[ms[0]]
            for e in ms[1:]:
                base = A.join(base, es[e])
            gy[k] = base
    cyl = {min(ms): gy[k] for k, ms in members.items()}
    return GTreeWindow.build(
        A,
        names,
        [(u, v, es[(u, v)]) for u, v in edges],
        vertex_stab=vstab,
        cylinder_stabs=cyl,
        boundary=_boundary_flags(rng, names, edges),
    )


# ---------------------------------------------------------------- backend P


def _gen_p(rng, n):
    names, edges, cls, ncls = _layout(rng, n)
    at = _classes_at(names, edges, cls)
    members = _cyl_members(edges, cls, ncls)
    labels, classes, incl, inter = {}, {}, [], []

    def fam(lab, k):
        labels[lab] = {}
        classes.setdefault(f"K{k}", []).append(lab)

    pools = {}
    for k in range(ncls):
        size = rng.randint(1, 3)
        pools[k] = [f"E{k}.{i}" for i in range(size)]
        for lab in pools[k]:
            fam(lab, k)
        for lab in pools[k][1:]:
            if rng.random() < 0.5:
                incl.append([lab, pools[k][0]])
    elab = {e: rng.choice(pools[cls[e]]) for e in edges}
    incident = {v: [e for e in edges if v in e] for v in names}
    # a cylinder with no boundary vertex is the whole window: its stabilizer fixes a chosen vertex
    own = {}
    for k, ms in members.items():
        verts = sorted({v for e in ms for v in e})
        if all(len(at[v]) < 2 for v in verts):
            own[rng.choice(verts)] = k
    vlab = {}
    for v in names:
        if v in own:
            vlab[v] = f"Y{own[v]}"
            for e in incident[v]:
                incl.append([elab[e], vlab[v]])
        elif len(at[v]) >= 2:
            vlab[v] = f"V{v}"
            labels[vlab[v]] = {}
            for e in incident[v]:
                incl.append([elab[e], vlab[v]])
        elif at[v]:
            k = next(iter(at[v]))
            vlab[v] = f"S{v}"
            fam(vlab[v], k)
            for e in incident[v]:
                incl.append([elab[e], vlab[v]])
    cyl = {}
    for k, ms in members.items():
        verts = sorted({v for e in ms for v in e})
        bd = [v for v in verts if len(at[v]) >= 2]
        y = f"Y{k}"
        collapse = len(bd) >= 2 and rng.random() < 0.35
        if collapse:
            labels[y] = {}
            x = rng.choice(bd)
            incl.append([y, vlab[x]])
        else:
            fam(y, k)
            if bd:
                incl.append([y, vlab[rng.choice(bd)]])
        for e in ms:
            incl.append([elab[e], y])
        for v in verts:
            if v not in bd and vlab[v] != y:
                incl.append([vlab[v], y])
        for v in bd:
            if collapse and [y, vlab[v]] in incl:
                continue
            if [y, vlab[v]] in incl:
                continue
            here = sorted({elab[e] for e in incident[v] if cls[e] == k})
            if len(here) == 1:
                meet = here[0]
            else:
                meet = f"I{v}.{k}"
                fam(meet, k)
                incl.extend([[lab, meet] for lab in here])
                incl.extend([[meet, vlab[v]], [meet, y]])
            inter.append([vlab[v], y, meet])
        cyl[min(ms)] = y
    table = {"backend": "P", "labels": labels, "classes": classes, "inclusions": incl, "intersections": inter}
    A = PartitionAlgebra.from_table(table)
    return GTreeWindow.build(
        A,
        names,
        [(u, v, A.normalize(elab[(u, v)])) for u, v in edges],
        vertex_stab={v: A.normalize(lab) for v, lab in vlab.items()},
        cylinder_stabs={e: A.normalize(lab) for e, lab in cyl.items()},
        boundary=_boundary_flags(rng, names, edges),
    )


_GEN = {"W": _gen_w, "L": _gen_l, "P": _gen_p}


def pick_backend(seed):
    return BACKENDS[int(seed) % 3]


def generate_window(seed, backend=None, size=None):
    """A window with at most ``size`` vertices (default: between 2 and 10)."""
    backend = backend or pick_backend(seed)
    rng = _rng(seed, "window:" + backend)
    hi = min(size or 10, MAX_VERTICES)
    n = rng.randint(min(2, hi), hi)
    return _GEN[backend](rng, n)


# ---------------------------------------------------------------- moves and maps


def legal_moves(w, rng, fresh):
    A = w.algebra
    out = []
    for u, v in w.edges:
        ge = w.edge_stab[(u, v)]
        for z in (u, v):
            if w.vertex_stab.get(z) == ge and len(w.adj[z]) >= 2:
                keep = v if z == u else u
                out.append({"op": "collapse", "edge": [u, v], "into": keep})
    for v in w.vertices:
        g = w.vertex_stab.get(v)
        if g is None or not w.adj[v]:
            continue
        e0 = rng.choice(w.incident(v))
        H = w.edge_stab[e0]
        if not A.includes(g, H):
            continue
        moved = [list(e) for e in w.incident(v) if A.includes(H, w.edge_stab[e])]
        out.append({"op": "expand", "vertex": v, "handle": A.to_json(H), "edges": moved, "new_vertex": fresh})
    return out


def generate_pair(seed, backend=None, size=None, max_moves=4):
    """A window, a window reached from it by at most ``max_moves`` legal moves, and the move script."""
    w = generate_window(seed, backend, size)
    rng = _rng(seed, "moves")
    cur = w
    script = []
    count = 0
    for _ in range(rng.randint(1, max_moves)):
        fresh = f"n{count}"
        while fresh in cur.adj:
            count += 1
            fresh = f"n{count}"
        moves = legal_moves(cur, rng, fresh)
        if not moves:
            break
        m = rng.choice(moves)
        try:
            cur = elementary_move(cur, m)
        except IllegalMove:
            continue
        count += 1
        script.append(m)
    return w, cur, script


def random_collapse(w, rng, p=None):
    p = rng.uniform(0.15, 0.6) if p is None else p
    chosen = [e for e in w.edges if rng.random() < p]
    return collapse_edges(w, chosen)


def legal_collapse(w, rng, tries=20):
    """A collapse whose image of every fully collapsed cylinder lies in two target cylinders."""
    for _ in range(tries):
        w2, f = random_collapse(w, rng)
        if not induced_map(f).caveats:
            return w2, f
    return collapse_edges(w, [])


def generate_map_chain(seed, backend=None, size=None):
    """Composable collapse maps ``w -f-> w1 -g-> w2`` whose induced maps are defined without caveats."""
    w = generate_window(seed, backend, size)
    rng = _rng(seed, "chain")
    w1, f = legal_collapse(w, rng)
    w2, g = legal_collapse(w1, rng)
    return w, f, g


def generate_domination(seed, backend=None, size=None):
    """A window, a collapse of it, and the collapse map (which witnesses domination)."""
    w = generate_window(seed, backend, size)
    rng = _rng(seed, "domination")
    w2, f = random_collapse(w, rng)
    return w, w2, f


def cylinder_count(w):
    return len(compute_cylinders(w))
