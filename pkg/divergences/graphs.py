"""Undirected graphs, chordality, triangulation and clique trees.

Graphs are plain ``networkx.Graph`` objects over integer variable ids. A
:class:`ChordalGraph` pairs such a graph with a perfect elimination ordering,
from which maximal cliques and clique trees are derived deterministically.
"""
from __future__ import annotations

import heapq
import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import networkx as nx
import numpy as np
from networkx.utils import UnionFind

from .exceptions import CardinalityMismatchError, NotChordalError, StructureError

logger = logging.getLogger(__name__)

Clique = tuple[int, ...]


@dataclass(frozen=True)
class Variable:
    id: int
    cardinality: int
    name: str | None = None

    @property
    def label(self) -> str:
        return self.name if self.name else str(self.id)


@dataclass(frozen=True)
class VariableTable:
    """Discrete random variables and their domain sizes, ordered by id"""

    variables: tuple[Variable, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.variables, key=lambda v: v.id))
        object.__setattr__(self, 'variables', ordered)
        ids = [v.id for v in ordered]
        if len(set(ids)) != len(ids):
            raise StructureError(f"duplicate variable ids in {ids}")
        for v in ordered:
            if v.cardinality < 2:
                raise StructureError(f"variable {v.id} has cardinality {v.cardinality} < 2")

    @classmethod
    def from_cardinalities(cls, cards: Sequence[int], names: Sequence[str] | None = None) -> 'VariableTable':
        names = names or [None] * len(cards)
        return cls(tuple(Variable(i, int(c), n) for i, (c, n) in enumerate(zip(cards, names))))

    def __len__(self):
        return len(self.variables)

    def __iter__(self):
        return iter(self.variables)

    def __contains__(self, variable_id: int) -> bool:
        return variable_id in self._by_id

    @cached_property
    def _by_id(self) -> dict[int, Variable]:
        return {v.id: v for v in self.variables}

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(v.id for v in self.variables)

    @property
    def is_dense(self) -> bool:
        return self.ids == tuple(range(len(self.variables)))

    def cardinality(self, variable_id: int) -> int:
        return self._by_id[variable_id].cardinality

    def cardinalities(self, ids: Iterable[int]) -> tuple[int, ...]:
        return tuple(self._by_id[v].cardinality for v in ids)

    def label(self, variable_id: int) -> str:
        return self._by_id[variable_id].label

    def id_of(self, label: str) -> int:
        for v in self.variables:
            if v.label == label:
                return v.id
        raise StructureError(f"unknown variable {label!r}")

    def size(self, ids: Iterable[int] | None = None) -> int:
        """Number of joint assignments of ``ids`` (all variables by default)"""
        ids = self.ids if ids is None else ids
        return int(np.prod(self.cardinalities(ids), dtype=np.int64))

    def restrict(self, ids: Iterable[int]) -> 'VariableTable':
        keep = set(ids)
        missing = keep.difference(self._by_id)
        if missing:
            raise StructureError(f"variables {sorted(missing)} are not in the table")
        return VariableTable(tuple(v for v in self.variables if v.id in keep))

    def merge(self, other: 'VariableTable') -> 'VariableTable':
        merged = dict(self._by_id)
        for v in other:
            known = merged.setdefault(v.id, v)
            if known.cardinality != v.cardinality:
                raise CardinalityMismatchError(
                    f"variable {v.id} has cardinality {known.cardinality} and {v.cardinality}"
                )
        return VariableTable(tuple(merged.values()))

    def same_domain(self, other: 'VariableTable') -> bool:
        return [(v.id, v.cardinality) for v in self] == [(v.id, v.cardinality) for v in other]


def graph_from_cliques(vertices: Iterable[int], cliques: Iterable[Iterable[int]]) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(vertices)
    for clique in cliques:
        clique = list(clique)
        graph.add_nodes_from(clique)
        graph.add_edges_from(itertools.combinations(clique, 2))
    return graph


def induced_subgraph(g: nx.Graph, keep: Iterable[int]) -> nx.Graph:
    keep = set(keep)
    missing = keep.difference(g.nodes)
    if missing:
        raise StructureError(f"vertices {sorted(missing)} are not in the graph")
    return nx.Graph(g.subgraph(keep))


def maximum_cardinality_search(g: nx.Graph) -> list[int]:
    """Visit order of maximum cardinality search, ties to the smallest id.

    The reverse of the visit order is a perfect elimination ordering
    whenever ``g`` is chordal.
    """
    weight = {v: 0 for v in g.nodes}
    heap = [(0, v) for v in g.nodes]
    heapq.heapify(heap)
    visited = []
    while heap:
        w, v = heapq.heappop(heap)
        if v not in weight or -w != weight[v]:
            continue
        del weight[v]
        visited.append(v)
        for u in g.neighbors(v):
            if u in weight:
                weight[u] += 1
                heapq.heappush(heap, (-weight[u], u))
    return visited


def _is_perfect_elimination_ordering(g: nx.Graph, order: Sequence[int]) -> bool:
    position = {v: i for i, v in enumerate(order)}
    for v in order:
        later = [u for u in g.neighbors(v) if position[u] > position[v]]
        if not later:
            continue
        # it suffices that v's earliest later neighbour sees all the others
        parent = min(later, key=position.__getitem__)
        if any(u != parent and not g.has_edge(parent, u) for u in later):
            return False
    return True


def is_chordal(g: nx.Graph) -> bool:
    if nx.number_of_selfloops(g):
        raise StructureError("graph has self-loops")
    return _is_perfect_elimination_ordering(g, maximum_cardinality_search(g)[::-1])


@dataclass(frozen=True)
class ChordalGraph:
    graph: nx.Graph = field(compare=False)
    peo: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.peo) != sorted(self.graph.nodes):
            raise StructureError("elimination ordering is not a permutation of the vertices")
        if not _is_perfect_elimination_ordering(self.graph, self.peo):
            raise NotChordalError("ordering is not a perfect elimination ordering")

    @classmethod
    def from_graph(cls, g: nx.Graph) -> 'ChordalGraph':
        if nx.number_of_selfloops(g):
            raise StructureError("graph has self-loops")
        peo = tuple(maximum_cardinality_search(g)[::-1])
        if not _is_perfect_elimination_ordering(g, peo):
            raise NotChordalError(f"graph with {g.number_of_nodes()} vertices is not chordal")
        return cls(nx.Graph(g), peo)

    @classmethod
    def from_cliques(cls, vertices: Iterable[int], cliques: Iterable[Iterable[int]]) -> 'ChordalGraph':
        return cls.from_graph(graph_from_cliques(vertices, cliques))

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted(self.graph.nodes))

    @cached_property
    def cliques(self) -> list[Clique]:
        return maximal_cliques(self)

    @property
    def treewidth(self) -> int:
        return max((len(c) for c in self.cliques), default=0) - 1

    @cached_property
    def clique_tree(self) -> 'CliqueTree':
        return build_clique_tree(self)


def _fill_in(g: nx.Graph, v: int) -> int:
    nbrs = list(g.neighbors(v))
    return sum(1 for a, b in itertools.combinations(nbrs, 2) if not g.has_edge(a, b))


def elimination_fill(g: nx.Graph, order: Sequence[int]) -> nx.Graph:
    """Chordal supergraph of ``g`` obtained by eliminating vertices in ``order``"""
    work = nx.Graph(g)
    filled = nx.Graph(g)
    for v in order:
        fill = [(a, b) for a, b in itertools.combinations(sorted(work.neighbors(v)), 2)
                if not work.has_edge(a, b)]
        work.add_edges_from(fill)
        filled.add_edges_from(fill)
        work.remove_node(v)
    return filled


def min_fill_order(g: nx.Graph) -> list[int]:
    """Greedy min-fill elimination ordering, ties to the smallest id"""
    work = nx.Graph(g)
    fill = {v: _fill_in(work, v) for v in work.nodes}
    heap = [(f, v) for v, f in fill.items()]
    heapq.heapify(heap)
    order = []
    while heap:
        f, v = heapq.heappop(heap)
        if fill.get(v) != f:
            continue
        nbrs = list(work.neighbors(v))
        work.add_edges_from((a, b) for a, b in itertools.combinations(nbrs, 2))
        work.remove_node(v)
        del fill[v]
        stale = set(nbrs)
        for u in nbrs:
            stale.update(work.neighbors(u))
        for u in stale:
            fill[u] = _fill_in(work, u)
            heapq.heappush(heap, (fill[u], u))
        order.append(v)
    return order


def elimination_order(g: nx.Graph, heuristic: str | Sequence[int] = 'min-fill') -> list[int]:
    if heuristic == 'min-fill':
        return min_fill_order(g)
    if heuristic == 'reverse-id':
        return sorted(g.nodes, reverse=True)
    if isinstance(heuristic, str):
        raise ValueError(f"unknown elimination heuristic {heuristic!r}")
    order = list(heuristic)
    if sorted(order) != sorted(g.nodes):
        raise StructureError("explicit elimination ordering must list every vertex once")
    return order


def computation_graph(graphs: Sequence[nx.Graph], heuristic: str | Sequence[int] = 'min-fill') -> ChordalGraph:
    """Chordal graph containing every vertex and edge of every input graph"""
    if not graphs:
        raise ValueError("computation_graph needs at least one graph")
    union = nx.Graph()
    for g in graphs:
        graph = g.graph if isinstance(g, ChordalGraph) else g
        union.add_nodes_from(graph.nodes)
        union.add_edges_from(graph.edges)

    order = elimination_order(union, heuristic)
    filled = elimination_fill(union, order)
    logger.debug(
        "computation graph: %d vertices, %d edges, %d fill-in edges",
        filled.number_of_nodes(), union.number_of_edges(),
        filled.number_of_edges() - union.number_of_edges(),
    )
    return ChordalGraph(filled, tuple(order))


def maximal_cliques(g: ChordalGraph) -> list[Clique]:
    """Maximal cliques read off the elimination ordering, sorted lexicographically"""
    graph = g.graph
    position = {v: i for i, v in enumerate(g.peo)}
    candidates = []
    for v in g.peo:
        later = [u for u in graph.neighbors(v) if position[u] > position[v]]
        candidates.append((v, frozenset([v, *later])))

    # a clique swallowing the candidate of v holds v itself
    candidates.sort(key=lambda t: len(t[1]), reverse=True)
    maximal: list[frozenset] = []
    holding: dict[int, list[int]] = {}
    for v, c in candidates:
        if not any(c <= maximal[k] for k in holding.get(v, ())):
            for u in c:
                holding.setdefault(u, []).append(len(maximal))
            maximal.append(c)
    return sorted(tuple(sorted(c)) for c in maximal)


@dataclass(frozen=True)
class CliqueTree:
    cliques: tuple[Clique, ...]
    edges: tuple[tuple[int, int, Clique], ...]

    @cached_property
    def neighbors(self) -> dict[int, list[tuple[int, Clique]]]:
        adjacent = {i: [] for i in range(len(self.cliques))}
        for i, j, sep in self.edges:
            adjacent[i].append((j, sep))
            adjacent[j].append((i, sep))
        return adjacent

    @cached_property
    def _holding(self) -> dict[int, set[int]]:
        holding: dict[int, set[int]] = {}
        for i, c in enumerate(self.cliques):
            for v in c:
                holding.setdefault(v, set()).add(i)
        return holding

    def containing(self, scope: Iterable[int]) -> int | None:
        """Index of the first clique containing ``scope``"""
        scope = set(scope)
        if not scope:
            return 0 if self.cliques else None
        found = set.intersection(*(self._holding.get(v, set()) for v in scope))
        return min(found, default=None)

    def has_running_intersection(self) -> bool:
        tree = nx.Graph()
        tree.add_nodes_from(range(len(self.cliques)))
        tree.add_edges_from((i, j) for i, j, _ in self.edges)
        for v in set().union(*self.cliques) if self.cliques else ():
            holding = [i for i, c in enumerate(self.cliques) if v in c]
            if not nx.is_connected(tree.subgraph(holding)):
                return False
        return True

    def rooted(self, root: int) -> list[tuple[int, int | None, Clique]]:
        """Cliques in breadth-first order from ``root`` as (clique, parent, separator)"""
        order = [(root, None, ())]
        seen = {root}
        head = 0
        while head < len(order):
            i = order[head][0]
            head += 1
            for j, sep in sorted(self.neighbors[i]):
                if j not in seen:
                    seen.add(j)
                    order.append((j, i, sep))
        return order


def build_clique_tree(g: ChordalGraph) -> CliqueTree:
    """Maximum-weight spanning tree over clique intersections.

    Only cliques sharing a variable are weighed against each other. The
    connected components this leaves apart are chained, in order of their
    first clique, through empty separators.
    """
    cliques = g.cliques
    sets = [set(c) for c in cliques]
    holding: dict[int, list[int]] = {}
    for i, c in enumerate(cliques):
        for v in c:
            holding.setdefault(v, []).append(i)
    shared = set()
    for members in holding.values():
        shared.update(itertools.combinations(members, 2))
    pairs = sorted(((len(sets[i] & sets[j]), i, j) for i, j in shared), key=lambda t: (-t[0], t[1], t[2]))

    forest = UnionFind(range(len(cliques)))
    edges = []
    for _, i, j in pairs:
        if forest[i] != forest[j]:
            forest.union(i, j)
            edges.append((i, j, tuple(sorted(sets[i] & sets[j]))))

    seen = set()
    previous = None
    for i in range(len(cliques)):
        root = forest[i]
        if root in seen:
            continue
        seen.add(root)
        if previous is not None:
            edges.append((previous, i, ()))
        previous = i
    return CliqueTree(tuple(cliques), tuple(edges))
