"""Independent brute-force oracles for cross-checking the library.

Everything here re-derives results from first principles (dense matrices,
exhaustive enumeration, naive fixpoints) and deliberately shares no code
path with the functions it checks.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np


def adjacency_sets(g) -> dict[str, set[str]]:
    return {u: set(g.neighbors(u)) for u in g.nodes()}


def component_count(nodes, edges) -> int:
    """Union-find component count over an explicit node/edge collection."""
    parent = {u: u for u in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    return len({find(u) for u in nodes})


def components_lists(g) -> list[list[str]]:
    nodes = sorted(g.nodes())
    parent = {u: u for u in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u in nodes:
        for v in g.neighbors(u):
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
    groups: dict[str, list[str]] = {}
    for u in nodes:
        groups.setdefault(find(u), []).append(u)
    return sorted((sorted(c) for c in groups.values()), key=lambda c: c[0])


def largest_component_nodes(g) -> list[str]:
    comps = components_lists(g)
    if not comps:
        return []
    return max(comps, key=len)  # first maximum = smallest leading node id


def degree_stats(g) -> dict[str, float]:
    n = g.node_count()
    m = g.edge_count()
    degs = np.array([g.degree(u) for u in g.nodes()], dtype=float)
    out = {"n_nodes": float(n), "n_edges": float(m)}
    out["density"] = 2.0 * m / (n * (n - 1)) if n >= 2 else 0.0
    out["avg_degree"] = 2.0 * m / n if n else 0.0
    if n:
        mean = degs.sum() / n
        out["degree_variance"] = float(((degs - mean) ** 2).sum() / n)
    else:
        out["degree_variance"] = 0.0
    return out


def clustering_by_enumeration(g) -> float:
    """Per-node triangle counts via explicit triple enumeration."""
    nodes = sorted(g.nodes())
    n = len(nodes)
    if n == 0:
        return 0.0
    total = 0.0
    for u in nodes:
        d = g.degree(u)
        if d < 2:
            continue
        tri = 0
        for v, w in combinations(sorted(g.neighbors(u)), 2):
            if g.has_edge(v, w):
                tri += 1
        total += tri / (d * (d - 1) / 2)
    return total / n


def assortativity_corrcoef(g) -> float:
    m = g.edge_count()
    if m == 0:
        return 0.0
    xs, ys = [], []
    for u, v in g.edges():
        xs += [g.degree(u), g.degree(v)]
        ys += [g.degree(v), g.degree(u)]
    x = np.array(xs, dtype=float)
    y = np.array(ys, dtype=float)
    if np.all(x == x[0]) or np.all(y == y[0]):
        return 0.0
    return float(np.corrcoef(x, y)[0, 1])


def apl_floyd_warshall(g) -> float:
    nodes = largest_component_nodes(g)
    n = len(nodes)
    if n < 2:
        return 0.0
    idx = {u: i for i, u in enumerate(nodes)}
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for u in nodes:
        for v in g.neighbors(u):
            if v in idx:
                dist[idx[u], idx[v]] = 1.0
    for k in range(n):
        dist = np.minimum(dist, dist[:, k, None] + dist[None, k, :])
    total = dist.sum()
    return float(total / (n * (n - 1)))


def lambda2_dense(g, scope: str = "lcc") -> float:
    if scope == "global":
        nodes = sorted(g.nodes())
        if component_count(nodes, g.edges()) > 1:
            return 0.0
    else:
        nodes = largest_component_nodes(g)
    n = len(nodes)
    if n < 2:
        return 0.0
    idx = {u: i for i, u in enumerate(nodes)}
    lap = np.zeros((n, n))
    for u in nodes:
        for v in g.neighbors(u):
            if v in idx:
                lap[idx[u], idx[v]] = -1.0
                lap[idx[u], idx[u]] += 1.0
    return float(np.linalg.eigvalsh(lap)[1])


def kcore_peel_naive(g, k: int) -> tuple[set[str], set[tuple[str, str]]]:
    """Whole-pass peeling to a fixpoint (different order than the library)."""
    nodes = set(g.nodes())
    edges = set(g.edges())
    while True:
        deg: dict[str, int] = {u: 0 for u in nodes}
        for u, v in edges:
            deg[u] += 1
            deg[v] += 1
        doomed = {u for u in nodes if deg[u] < k}
        if not doomed:
            return nodes, edges
        nodes -= doomed
        edges = {(u, v) for u, v in edges if u not in doomed and v not in doomed}


def kbrace_fixpoint_naive(g, k: int) -> tuple[set[str], set[tuple[str, str]]]:
    """Recompute every edge's embeddedness from scratch each pass."""
    edges = set(g.edges())
    while True:
        nbrs: dict[str, set[str]] = {}
        for u, v in edges:
            nbrs.setdefault(u, set()).add(v)
            nbrs.setdefault(v, set()).add(u)
        weak = {
            (u, v)
            for u, v in edges
            if len(nbrs.get(u, set()) & nbrs.get(v, set())) < k
        }
        if not weak:
            break
        edges -= weak
    nodes = {u for e in edges for u in e}
    return nodes, edges


def modularity_of(g, assignment: dict[str, int]) -> float:
    m = g.edge_count()
    if m == 0:
        return 0.0
    comms = set(assignment.values())
    q = 0.0
    for c in comms:
        members = {u for u, cc in assignment.items() if cc == c}
        intra = sum(1 for u, v in g.edges() if u in members and v in members)
        deg = sum(g.degree(u) for u in members)
        q += intra / m - (deg / (2.0 * m)) ** 2
    return q


def all_partition_assignments(n: int) -> np.ndarray:
    """Every set partition of n items as community-index rows (Bell(n) rows)."""
    parts = np.zeros((1, 1), dtype=np.int8)
    maxes = np.zeros(1, dtype=np.int8)
    for _ in range(1, n):
        choices = (maxes + 2).astype(np.int64)
        total = int(choices.sum())
        rows = np.repeat(np.arange(len(parts)), choices)
        starts = np.concatenate(([0], np.cumsum(choices)[:-1]))
        newval = (np.arange(total) - np.repeat(starts, choices)).astype(np.int8)
        parts = np.concatenate([parts[rows], newval[:, None]], axis=1)
        maxes = np.maximum(maxes[rows], newval)
    return parts


def best_modularity_exhaustive(g) -> float:
    """Maximum modularity over every partition; caller keeps n small."""
    nodes = sorted(g.nodes())
    n = len(nodes)
    m = g.edge_count()
    assert m >= 1
    idx = {u: i for i, u in enumerate(nodes)}
    deg = np.array([g.degree(u) for u in nodes], dtype=float)
    adj = np.zeros((n, n))
    for u, v in g.edges():
        adj[idx[u], idx[v]] = adj[idx[v], idx[u]] = 1.0
    parts = all_partition_assignments(n)
    q = np.full(len(parts), -float((deg**2).sum()) / (4.0 * m * m))
    for i in range(n):
        for j in range(i + 1, n):
            w = adj[i, j] / m - deg[i] * deg[j] / (2.0 * m * m)
            q += w * (parts[:, i] == parts[:, j])
    return float(q.max())


def auc_pair_count(scores, labels) -> float:
    """Literal Mann-Whitney: count ordered (positive, negative) pairs."""
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    wins = sum(1 for p in pos for q in neg if p > q)
    ties = sum(1 for p in pos for q in neg if p == q)
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


def average_ranks(values) -> list[float]:
    """1-based average ranks with mean rank for ties."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + 1 + j + 1) / 2.0
        for t in range(i, j + 1):
            ranks[order[t]] = mean_rank
        i = j + 1
    return ranks


def representative_by_definition(
    items_by_cat: dict[str, list[tuple[str, list[float]]]],
    category: str,
    weights,
    pooled: bool = True,
    presquare: bool = False,
) -> tuple[str, dict[str, float]]:
    """Literal weighted-rank-distance selection."""
    if pooled:
        rows = [(gid, vec) for cat in sorted(items_by_cat)
                for gid, vec in items_by_cat[cat]]
    else:
        rows = list(items_by_cat[category])
    d = len(rows[0][1])
    ranks_per_feature = [average_ranks([vec[f] for _, vec in rows]) for f in range(d)]
    rank_of = {
        gid: [ranks_per_feature[f][i] for f in range(d)]
        for i, (gid, _) in enumerate(rows)
    }
    member_ids = [gid for gid, _ in items_by_cat[category]]
    mean_rank = [
        sum(rank_of[gid][f] for gid in member_ids) / len(member_ids)
        for f in range(d)
    ]
    dists = {}
    for gid in member_ids:
        if presquare:
            d2 = sum((weights[f] * (rank_of[gid][f] - mean_rank[f])) ** 2 for f in range(d))
        else:
            d2 = sum(weights[f] * (rank_of[gid][f] - mean_rank[f]) ** 2 for f in range(d))
        dists[gid] = math.sqrt(d2)
    best = min(member_ids, key=lambda gid: (dists[gid], gid))
    return best, dists


def pearson(xs, ys) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    return float((dx * dy).sum() / math.sqrt((dx * dx).sum() * (dy * dy).sum()))
