"""Undirected simple graphs with opaque string node ids."""

from __future__ import annotations

from collections import deque
from typing import Iterable


class GraphParseError(ValueError):
    """Malformed edge-list input; carries the offending 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class Graph:
    """Immutable undirected simple graph.

    Node ids are opaque strings. Adjacency is symmetric with set semantics
    (no duplicate edges) and never contains self-loops; self-loop edges
    passed to the constructor register the node but no edge. Instances are
    treated as read-only after construction, so they are safe to share
    across concurrent feature computations.
    """

    __slots__ = ("_adj", "_nodes", "_m")

    def __init__(self, edges: Iterable[tuple[str, str]] = (), nodes: Iterable[str] = ()):
        adj: dict[str, set[str]] = {}
        for u in nodes:
            adj.setdefault(u, set())
        for u, v in edges:
            if u == v:
                adj.setdefault(u, set())
                continue
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        self._adj = adj
        self._nodes = tuple(sorted(adj))
        self._m = sum(len(s) for s in adj.values()) // 2

    def node_count(self) -> int:
        return len(self._nodes)

    def edge_count(self) -> int:
        return self._m

    def nodes(self) -> tuple[str, ...]:
        """All node ids in sorted order."""
        return self._nodes

    def neighbors(self, u: str) -> set[str]:
        """Neighbor set of *u* (do not mutate)."""
        return self._adj[u]

    def degree(self, u: str) -> int:
        return len(self._adj[u])

    def has_node(self, u: str) -> bool:
        return u in self._adj

    def has_edge(self, u: str, v: str) -> bool:
        return u in self._adj and v in self._adj[u]

    def edges(self) -> list[tuple[str, str]]:
        """All edges as (u, v) pairs with u < v, sorted."""
        return [(u, v) for u in self._nodes for v in sorted(self._adj[u]) if u < v]

    def subgraph(self, keep: Iterable[str]) -> "Graph":
        """Induced subgraph on ``keep`` (unknown ids are ignored)."""
        keep_set = {u for u in keep if u in self._adj}
        edges = [
            (u, v)
            for u in keep_set
            for v in self._adj[u]
            if u < v and v in keep_set
        ]
        return Graph(edges, nodes=keep_set)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._adj == other._adj

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count()}, m={self.edge_count()})"


def parse_edge_list(source: str | Iterable[str]) -> Graph:
    """Parse edge-list text into a graph.

    One edge per line as two whitespace-separated tokens. Blank lines and
    lines starting with ``#`` are ignored; duplicate and reversed duplicate
    lines collapse to one edge. A self-loop line ``u u`` registers the node
    but adds no edge (this is also how isolated nodes survive a
    serialize/parse round trip).

    Raises:
        GraphParseError: if a non-comment line does not hold exactly two
            tokens; the error carries the 1-based line number.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    edges: list[tuple[str, str]] = []
    lone: list[str] = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphParseError(line_no, f"expected 2 tokens, found {len(parts)}")
        u, v = parts
        if u == v:
            lone.append(u)
        else:
            edges.append((u, v))
    return Graph(edges, nodes=lone)


def serialize_edge_list(g: Graph) -> str:
    """Render a graph in the edge-list format accepted by parse_edge_list.

    Edges come first in sorted order, then isolated nodes as self-loop
    lines, so ``parse_edge_list(serialize_edge_list(g)) == g`` for every
    graph. Output is byte-deterministic.
    """
    out = [f"{u} {v}" for u, v in g.edges()]
    out.extend(f"{u} {u}" for u in g.nodes() if g.degree(u) == 0)
    return "\n".join(out) + ("\n" if out else "")


def connected_components(g: Graph) -> list[list[str]]:
    """Connected components as sorted node lists, ordered by smallest member."""
    seen: set[str] = set()
    comps: list[list[str]] = []
    for start in g.nodes():
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in g.neighbors(u):
                if v not in seen:
                    seen.add(v)
                    comp.append(v)
                    queue.append(v)
        comps.append(sorted(comp))
    return comps


def largest_connected_component(g: Graph) -> Graph:
    """Induced subgraph on the largest component.

    Size ties go to the component containing the lexicographically smallest
    node id; the empty graph maps to the empty graph.
    """
    comps = connected_components(g)
    if not comps:
        return Graph()
    # max() keeps the first maximum; components are already ordered by
    # their smallest node id.
    return g.subgraph(max(comps, key=len))


def bfs_distances(g: Graph, source: str) -> dict[str, int]:
    """Exact hop counts from *source*; unreachable nodes are absent.

    Raises:
        KeyError: if *source* is not a node of the graph.
    """
    if not g.has_node(source):
        raise KeyError(source)
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u]
        for v in g.neighbors(u):
            if v not in dist:
                dist[v] = du + 1
                queue.append(v)
    return dist
