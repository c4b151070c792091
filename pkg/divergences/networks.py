"""Markov networks, decomposable models and their construction.

A :class:`MarkovNetwork` is a chordal graph plus a bag of factors, some of
which may be *divisors*: factors that enter the product as reciprocals. Keeping
divisors as a separate list (instead of inverting them eagerly) lets the 0/0
convention of quotient networks be applied when factors are combined.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import networkx as nx
import numpy as np
from networkx.utils import UnionFind
from scipy.special import xlogy

from .datasets import SampleDataset
from .exceptions import DataError, StructureError, UndefinedQuotientError
from .factors import Factor
from .graphs import ChordalGraph, VariableTable, computation_graph, graph_from_cliques
from .inference import calibrate

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-9


@dataclass(frozen=True)
class MarkovNetwork:
    variables: VariableTable
    graph: ChordalGraph
    factors: tuple[Factor, ...] = ()
    divisors: tuple[Factor, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'factors', tuple(self.factors))
        object.__setattr__(self, 'divisors', tuple(self.divisors))
        stray = set(self.graph.vertices).difference(self.variables.ids)
        if stray:
            raise StructureError(f"graph vertices {sorted(stray)} are not network variables")
        tree = self.graph.clique_tree
        for f in (*self.factors, *self.divisors):
            if f.scope and tree.containing(f.scope) is None:
                raise StructureError(f"factor over {f.scope} is not contained in any maximal clique")
            if f.cards != self.variables.cardinalities(f.scope):
                raise StructureError(f"factor over {f.scope} disagrees with the variable cardinalities")

    @classmethod
    def from_factors(cls, variables: VariableTable, factors: Sequence[Factor],
                     divisors: Sequence[Factor] = ()) -> 'MarkovNetwork':
        """Network whose graph is the chordal completion of the factor scopes"""
        scopes = [f.scope for f in (*factors, *divisors)]
        graph = computation_graph([graph_from_cliques((), scopes)])
        return cls(variables, graph, tuple(factors), tuple(divisors))

    def evaluate(self, assignment: Mapping[int, int]) -> float:
        """Product of all factors at ``assignment``, divisors dividing (0/0 = 0)"""
        num = 1.0
        for f in self.factors:
            num *= f.value_at(assignment)
        den = 1.0
        for f in self.divisors:
            den *= f.value_at(assignment)
        if den == 0:
            if num != 0:
                raise UndefinedQuotientError("nonzero numerator over a vanishing divisor")
            return 0.0
        return num / den

    def power(self, exponent: float) -> 'MarkovNetwork':
        return MarkovNetwork(
            self.variables, self.graph,
            tuple(f.map_power(exponent) for f in self.factors),
            tuple(f.map_power(exponent) for f in self.divisors),
        )

    def signed_logs(self, coefficient: float = 1.0) -> list[Factor]:
        """Log tables whose sum is ``coefficient`` times the log of the product"""
        logs = [f.map_log().scale(coefficient) for f in self.factors]
        logs.extend(f.map_log().scale(-coefficient) for f in self.divisors)
        return logs


@dataclass(frozen=True)
class DecomposableModel:
    """Chordal network with exactly one clique probability table per maximal clique"""

    network: MarkovNetwork

    def __post_init__(self):
        net = self.network
        if not net.variables.is_dense:
            raise StructureError("model variables must have dense ids 0..n-1")
        if set(net.graph.vertices) != set(net.variables.ids):
            raise StructureError("every model variable must be a vertex of the model graph")
        if net.divisors:
            raise StructureError("a decomposable model has no divisors")
        cliques = net.graph.cliques
        if [f.scope for f in net.factors] != list(cliques):
            raise StructureError("model tables must match the maximal cliques one to one")
        for f in net.factors:
            if np.any(f.values < 0) or np.any(f.values > 1 + 1e-12):
                raise StructureError(f"table over {f.scope} has entries outside [0, 1]")
        mass = calibrate(net.variables, [net]).partition_function
        if abs(mass - 1.0) > NORMALIZATION_TOLERANCE:
            raise StructureError(f"model tables multiply to a total mass of {mass!r}, not 1")

    @classmethod
    def from_tables(cls, variables: VariableTable, graph: ChordalGraph,
                    tables: Mapping[tuple[int, ...], Factor]) -> 'DecomposableModel':
        cpts = []
        for clique in graph.cliques:
            if clique not in tables:
                raise StructureError(f"no table for clique {clique}")
            cpts.append(tables[clique])
        return cls(MarkovNetwork(variables, graph, tuple(cpts)))

    @property
    def variables(self) -> VariableTable:
        return self.network.variables

    @property
    def graph(self) -> ChordalGraph:
        return self.network.graph

    @property
    def cliques(self):
        return self.network.graph.cliques

    @property
    def cpts(self) -> tuple[Factor, ...]:
        return self.network.factors


def mn_product(nets: Sequence[MarkovNetwork], heuristic='min-fill') -> MarkovNetwork:
    if not nets:
        raise ValueError("mn_product needs at least one network")
    variables = nets[0].variables
    for net in nets[1:]:
        variables = variables.merge(net.variables)
    graph = computation_graph([net.graph for net in nets], heuristic)
    return MarkovNetwork(
        variables, graph,
        tuple(itertools.chain.from_iterable(net.factors for net in nets)),
        tuple(itertools.chain.from_iterable(net.divisors for net in nets)),
    )


def mn_quotient(num: MarkovNetwork, den: MarkovNetwork, heuristic='min-fill') -> MarkovNetwork:
    """num / den: den's factors become divisors and its divisors factors"""
    return MarkovNetwork(
        num.variables.merge(den.variables),
        computation_graph([num.graph, den.graph], heuristic),
        num.factors + den.divisors,
        num.divisors + den.factors,
    )


def _full_assignment(model: DecomposableModel, assignment) -> dict[int, int]:
    if isinstance(assignment, Mapping):
        values = dict(assignment)
    else:
        values = dict(enumerate(assignment))
    for v in model.variables:
        if v.id not in values:
            raise ValueError(f"assignment misses variable {v.id}")
        if not 0 <= values[v.id] < v.cardinality:
            raise ValueError(f"value {values[v.id]} out of range for variable {v.id}")
    return values


def joint_probability(model: DecomposableModel, assignment) -> float:
    values = _full_assignment(model, assignment)
    p = 1.0
    for cpt in model.cpts:
        p *= cpt.value_at(values)
    return p


def log_likelihood(model: DecomposableModel, data: SampleDataset) -> float:
    if not data.variables.same_domain(model.variables):
        raise DataError("samples and model are over different variables")
    total = 0.0
    with np.errstate(divide='ignore'):
        for cpt in model.cpts:
            if not cpt.scope:
                total += len(data) * float(np.log(cpt.values))
                continue
            index = np.ravel_multi_index(tuple(data.column(v) for v in cpt.scope), cpt.cards)
            total += float(np.log(cpt.flat[index]).sum())
    return total


def _with_all_vertices(structure: ChordalGraph, variables: VariableTable) -> ChordalGraph:
    missing = set(variables.ids).difference(structure.vertices)
    stray = set(structure.vertices).difference(variables.ids)
    if stray:
        raise StructureError(f"structure vertices {sorted(stray)} are not sample variables")
    if not missing:
        return structure
    graph = nx.Graph(structure.graph)
    graph.add_nodes_from(missing)
    return ChordalGraph.from_graph(graph)


def fit_parameters(structure: ChordalGraph, data: SampleDataset, pseudocount: float = 1.0) -> DecomposableModel:
    """Smoothed clique marginals turned into conditional tables along a rooted clique tree.

    The root (lexicographically smallest clique) keeps its marginal; every other
    clique stores its marginal divided by its own separator marginal.
    """
    if pseudocount < 0:
        raise DataError("pseudocount must be nonnegative")
    if len(data) == 0 and pseudocount == 0:
        raise DataError("cannot fit an empty dataset without a pseudocount")
    structure = _with_all_vertices(structure, data.variables)
    tree = structure.clique_tree
    n = len(data)

    tables = {}
    for i, parent, sep in tree.rooted(0):
        clique = tree.cliques[i]
        cards = data.variables.cardinalities(clique)
        size = data.variables.size(clique)
        marginal = Factor(clique, cards, (data.counts(clique) + pseudocount) / (n + pseudocount * size))
        tables[clique] = marginal if parent is None else marginal.divide(marginal.marginalize_to(sep))

    logger.debug("fitted %d clique tables on %d rows (pseudocount %g)", len(tables), n, pseudocount)
    return DecomposableModel.from_tables(data.variables, structure, tables)


def mutual_information(data: SampleDataset, i: int, j: int, pseudocount: float = 0.0) -> float:
    """Empirical mutual information (nats) of two variables, smoothed by ``pseudocount``"""
    ki, kj = data.variables.cardinalities((i, j))
    joint = (data.counts((i, j)) + pseudocount).reshape(ki, kj)
    total = joint.sum()
    if total == 0:
        return 0.0
    p = joint / total
    independent = np.outer(p.sum(axis=1), p.sum(axis=0))
    return float(np.sum(xlogy(p, p) - xlogy(p, independent)))


def chow_liu_structure(data: SampleDataset, pseudocount: float = 0.0) -> ChordalGraph:
    """Maximum spanning tree over pairwise mutual information, ties to the smaller edge"""
    ids = data.variables.ids
    if len(ids) < 2:
        raise StructureError("a Chow-Liu tree needs at least two variables")
    weights = sorted(
        ((mutual_information(data, i, j, pseudocount), i, j) for i, j in itertools.combinations(ids, 2)),
        key=lambda t: (-t[0], t[1], t[2]),
    )
    forest = UnionFind(ids)
    tree = nx.Graph()
    tree.add_nodes_from(ids)
    for _, i, j in weights:
        if forest[i] != forest[j]:
            forest.union(i, j)
            tree.add_edge(i, j)
    return ChordalGraph.from_graph(tree)


def random_chordal_structure(n: int, rng: np.random.Generator, max_clique: int = 4) -> ChordalGraph:
    """Random chordal graph on 0..n-1 whose cliques have at most ``max_clique`` vertices"""
    cliques: list[tuple[int, ...]] = [(0,)]
    for v in range(1, n):
        base = cliques[int(rng.integers(len(cliques)))]
        k = int(rng.integers(0, min(len(base), max_clique - 1) + 1))
        subset = rng.choice(base, size=k, replace=False).tolist() if k else []
        cliques.append(tuple(sorted([*subset, v])))
    return ChordalGraph.from_cliques(range(n), cliques)


def random_decomposable_model(structure: ChordalGraph, variables: VariableTable,
                              rng: np.random.Generator, concentration: float = 1.0) -> DecomposableModel:
    """Decomposable model with Dirichlet-drawn conditional tables (strictly positive a.s.)"""
    tree = structure.clique_tree
    tables = {}
    for i, parent, sep in tree.rooted(0):
        clique = tree.cliques[i]
        rest = tuple(v for v in clique if v not in sep)
        rows = variables.size(sep)
        cols = variables.size(rest)
        values = rng.dirichlet(np.full(cols, concentration), size=rows)
        tables[clique] = Factor(sep + rest, variables.cardinalities(sep + rest), values)
    return DecomposableModel.from_tables(variables, structure, tables)
