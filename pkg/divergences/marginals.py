"""Marginal and conditional networks of a decomposable model.

To marginalize a model onto a kept set Z, the maximal cliques that share an
eliminated variable are grouped together (an N-partition). Each group is
summed down to its kept variables independently, and the groups, turned into
cliques and stripped of eliminated variables, form the chordal graph of the
marginal network.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx
from networkx.utils import UnionFind

from .exceptions import NotChordalError, StructureError
from .factors import Factor
from .graphs import ChordalGraph, Clique, graph_from_cliques, induced_subgraph
from .networks import DecomposableModel, MarkovNetwork, mn_quotient

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NPartition:
    model: DecomposableModel
    kept: frozenset[int]
    groups: tuple[Clique, ...]
    # indices into model.cliques, one tuple per group
    members: tuple[tuple[int, ...], ...]

    @property
    def eliminated(self) -> frozenset[int]:
        return frozenset(self.model.variables.ids).difference(self.kept)

    def index(self, group: Iterable[int]) -> int:
        key = tuple(sorted(group))
        try:
            return self.groups.index(key)
        except ValueError:
            raise StructureError(f"{key} is not a group of this partition") from None


def _check_subset(model: DecomposableModel, variables: Iterable[int], what: str) -> frozenset[int]:
    variables = frozenset(variables)
    stray = variables.difference(model.variables.ids)
    if stray:
        raise StructureError(f"{what} variables {sorted(stray)} are not model variables")
    return variables


def n_partition(model: DecomposableModel, kept: Iterable[int]) -> NPartition:
    kept = _check_subset(model, kept, 'kept')
    cliques = model.cliques
    forest = UnionFind(range(len(cliques)))
    holder: dict[int, int] = {}
    for i, clique in enumerate(cliques):
        for v in clique:
            if v in kept:
                continue
            if v in holder:
                forest.union(holder[v], i)
            else:
                holder[v] = i

    merged = sorted(
        (tuple(sorted(set().union(*(cliques[i] for i in block)))), tuple(sorted(block)))
        for block in forest.to_sets()
    )
    logger.debug("partitioned %d cliques into %d groups", len(cliques), len(merged))
    return NPartition(
        model, kept,
        tuple(group for group, _ in merged),
        tuple(block for _, block in merged),
    )


def _fill_count(scopes: Sequence[tuple[int, ...]], v: int) -> int:
    graph = graph_from_cliques((), scopes)
    nbrs = list(graph.neighbors(v))
    return sum(1 for a, b in itertools.combinations(nbrs, 2) if not graph.has_edge(a, b))


def eliminate(factors: Sequence[Factor], drop: Iterable[int]) -> Factor:
    """Sum ``drop`` out of the product of ``factors`` by min-fill variable elimination"""
    factors = list(factors)
    remaining = set(drop)
    while remaining:
        scopes = [f.scope for f in factors]
        v = min(remaining, key=lambda u: (_fill_count(scopes, u), u))
        touching = [f for f in factors if v in f.scope]
        factors = [f for f in factors if v not in f.scope]
        factors.append(Factor.product(touching).marginalize([v]))
        remaining.discard(v)
    return Factor.product(factors)


def marginalized_factor(partition: NPartition, group: Iterable[int]) -> Factor:
    i = partition.index(group)
    cpts = [partition.model.cpts[c] for c in partition.members[i]]
    return eliminate(cpts, set(partition.groups[i]) & partition.eliminated)


def kappa(groups: Iterable[Iterable[int]]) -> nx.Graph:
    return graph_from_cliques((), groups)


def gamma(partition: NPartition) -> ChordalGraph:
    graph = induced_subgraph(kappa(partition.groups), partition.kept)
    try:
        return ChordalGraph.from_graph(graph)
    except NotChordalError as exc:
        raise RuntimeError(
            f"marginal graph over {sorted(partition.kept)} is not chordal; the partition is inconsistent"
        ) from exc


def marginal_network(model: DecomposableModel, kept: Iterable[int]) -> MarkovNetwork:
    """Network whose factor product is the exact marginal of ``model`` on ``kept``"""
    partition = n_partition(model, kept)
    tables = []
    mass = None
    for group in partition.groups:
        f = marginalized_factor(partition, group)
        if f.scope:
            tables.append(f)
        else:
            mass = f if mass is None else mass.multiply(f)
    if mass is not None:
        tables.append(mass)
    return MarkovNetwork(model.variables.restrict(partition.kept), gamma(partition), tuple(tables))


def conditional_network(model: DecomposableModel, target: Iterable[int], given: Iterable[int]) -> MarkovNetwork:
    """Quotient network of the (target, given) marginal by the given marginal"""
    target = _check_subset(model, target, 'target')
    given = _check_subset(model, given, 'given')
    if not target:
        raise StructureError("conditional target must not be empty")
    if target & given:
        raise StructureError(f"target and given overlap on {sorted(target & given)}")
    if not given:
        return marginal_network(model, target)
    return mn_quotient(marginal_network(model, target | given), marginal_network(model, given))
