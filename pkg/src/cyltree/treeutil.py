"""Small helpers for finite trees given as adjacency dicts, plus canonical forms.

A canonical form is a string that two labeled trees share iff they are
isomorphic as labeled trees.  The tree is rooted at its centroid (the lesser
encoding wins when there are two) and each subtree is encoded recursively with
its children's encodings sorted.  Labels are JSON-encoded, so no separator can
be confused with label content.
"""

import json
from collections import deque


def ekey(u, v):
    return (u, v) if u <= v else (v, u)


def adjacency(vertices, edges):
    adj = {v: [] for v in vertices}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    for v in adj:
        adj[v].sort()
    return adj


def bfs(adj, source, allowed=None):
    """Distances and parents from ``source``; ``allowed`` restricts the vertices visited."""
    dist = {source: 0}
    parent = {source: None}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if y not in dist and (allowed is None or y in allowed):
                dist[y] = dist[x] + 1
                parent[y] = x
                queue.append(y)
    return dist, parent


def is_tree(vertices, edges):
    vertices = list(vertices)
    if not vertices:
        return not edges
    if len(edges) != len(vertices) - 1:
        return False
    adj = adjacency(vertices, edges)
    dist, _ = bfs(adj, vertices[0])
    return len(dist) == len(vertices)


def path(adj, a, b):
    """Vertex path from ``a`` to ``b``."""
    _, parent = bfs(adj, a)
    if b not in parent:
        raise ValueError(f"{b!r} not reachable from {a!r}")
    out = [b]
    while out[-1] != a:
        out.append(parent[out[-1]])
    return out[::-1]


def path_edges(adj, a, b):
    p = path(adj, a, b)
    return [ekey(p[i], p[i + 1]) for i in range(len(p) - 1)]


def all_distances(adj):
    return {v: bfs(adj, v)[0] for v in adj}


def diameter(adj, vertices=None):
    """Edge diameter of the (connected) subgraph induced on ``vertices``."""
    allowed = set(adj) if vertices is None else set(vertices)
    if not allowed:
        return 0
    start = min(allowed)
    dist, _ = bfs(adj, start, allowed)
    far = max(dist, key=lambda v: (dist[v], v))
    dist2, _ = bfs(adj, far, allowed)
    return max(dist2.values())


def simple_paths(adj, length):
    """All simple paths with ``length`` edges, each listed once per direction."""
    out = []

    def extend(p):
        if len(p) == length + 1:
            out.append(tuple(p))
            return
        for y in adj[p[-1]]:
            if y not in p:
                p.append(y)
                extend(p)
                p.pop()

    for v in sorted(adj):
        extend([v])
    return out


def centroids(adj):
    n = len(adj)
    if n == 0:
        return []
    root = min(adj)
    order = []
    parent = {root: None}
    stack = [root]
    while stack:
        x = stack.pop()
        order.append(x)
        for y in adj[x]:
            if y != parent[x]:
                parent[y] = x
                stack.append(y)
    size = {}
    for x in reversed(order):
        size[x] = 1 + sum(size[y] for y in adj[x] if y != parent[x])
    best = []
    best_w = None
    for x in adj:
        w = max([n - size[x]] + [size[y] for y in adj[x] if y != parent[x]])
        if best_w is None or w < best_w:
            best, best_w = [x], w
        elif w == best_w:
            best.append(x)
    return sorted(best)


def canonical_form(vertices, edges, vertex_label, edge_label=None):
    """Canonical string of a labeled tree (a forest is rejected)."""
    vertices = list(vertices)
    if not vertices:
        return ""
    adj = adjacency(vertices, edges)
    if not is_tree(vertices, edges):
        raise ValueError("canonical_form needs a tree")
    vlab = {v: json.dumps(vertex_label(v), sort_keys=True, separators=(",", ":")) for v in vertices}
    elab = {}
    for u, v in edges:
        lab = edge_label((u, v)) if edge_label else None
        elab[ekey(u, v)] = json.dumps(lab, sort_keys=True, separators=(",", ":"))

    def encode(root):
        # iterative post-order to avoid recursion limits on long paths
        parent = {root: None}
        order = []
        stack = [root]
        while stack:
            x = stack.pop()
            order.append(x)
            for y in adj[x]:
                if y != parent[x]:
                    parent[y] = x
                    stack.append(y)
        enc = {}
        for x in reversed(order):
            kids = sorted("[" + elab[ekey(x, y)] + enc[y] for y in adj[x] if y != parent[x])
            enc[x] = "(" + vlab[x] + "".join(kids) + ")"
        return enc[root]

    return min(encode(c) for c in centroids(adj))
