"""Clique-tree calibration over arbitrary collections of factors.

``calibrate`` builds one computation graph for all the networks it is given,
assigns their factors to maximal cliques and runs a division-free two-pass
schedule. Each resulting belief is the sum over every other variable of the
product of all factors, divisors dividing; variables of the universe that
appear in no clique contribute the scalar ``free_multiplier``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import networkx as nx
import numpy as np

from .exceptions import NonFiniteResultError, StructureError, UndefinedQuotientError
from .factors import Factor
from .graphs import CliqueTree, VariableTable, computation_graph, graph_from_cliques

if TYPE_CHECKING:
    from .networks import MarkovNetwork

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CalibratedTree:
    clique_tree: CliqueTree
    beliefs: tuple[Factor, ...]
    free_multiplier: float
    # mass of scalar factors when there is no clique to carry them
    constant: float = 1.0
    treewidth: int = -1

    @property
    def partition_function(self) -> float:
        if self.beliefs:
            return self.beliefs[0].total() * self.free_multiplier
        return self.constant * self.free_multiplier

    @property
    def cells(self) -> int:
        return sum(b.size for b in self.beliefs)

    @property
    def max_cells(self) -> int:
        return max((b.size for b in self.beliefs), default=1)


def _reciprocal(f: Factor) -> Factor:
    """1/f with zero entries kept at zero (the 0/0 = 0 convention)"""
    out = np.zeros(f.values.shape)
    np.divide(1.0, f.values, out=out, where=f.values != 0)
    return Factor(f.scope, f.cards, out)


def _root(tree: CliqueTree) -> int:
    return min(range(len(tree.cliques)), key=lambda i: (-len(tree.cliques[i]), tree.cliques[i]))


def _propagate(tree: CliqueTree, potentials: Sequence[Factor]) -> list[Factor]:
    """Collect towards the root, then distribute away from it.

    Outgoing messages are built from prefix and suffix products of the
    incoming ones, so no clique recomputes a product per neighbor.
    """
    if not potentials:
        return []
    order = tree.rooted(_root(tree))
    parent = {i: p for i, p, _ in order}
    messages: dict[tuple[int, int], Factor] = {}

    for i, p, sep in reversed(order):
        if p is None:
            continue
        belief = potentials[i]
        for k, _ in tree.neighbors[i]:
            if k != p:
                belief = belief.multiply(messages[(k, i)])
        messages[(i, p)] = belief.marginalize_to(sep)

    beliefs: list[Factor] = [None] * len(tree.cliques)
    for i, _, _ in order:
        incoming = tree.neighbors[i]
        prefix = [potentials[i]]
        for k, _ in incoming:
            prefix.append(prefix[-1].multiply(messages[(k, i)]))
        suffix = Factor.scalar(1.0)
        for pos in range(len(incoming) - 1, -1, -1):
            j, sep = incoming[pos]
            if parent.get(j) == i:
                messages[(i, j)] = prefix[pos].multiply(suffix).marginalize_to(sep)
            suffix = messages[(j, i)].multiply(suffix)
        beliefs[i] = prefix[-1]
    return beliefs


def _check_quotient_support(tree: CliqueTree, numerators, divisors, assigned) -> None:
    """Every zero of a divisor must sit where the numerator product vanishes"""
    beliefs = _propagate(tree, numerators)
    for f, i in zip(divisors, assigned):
        if f.values.all():
            continue
        mass = beliefs[i].marginalize_to(f.scope) if beliefs else Factor.scalar(1.0)
        if np.any((mass.values > 0) & (f.values == 0)):
            raise UndefinedQuotientError(
                f"divisor over {f.scope} vanishes where the numerator does not", scope=f.scope,
            )


def calibrate(
    universe: VariableTable,
    nets: Sequence['MarkovNetwork'],
    extra_factors: Sequence[Factor] = (),
    extra_scopes: Iterable[Sequence[int]] = (),
    heuristic='min-fill',
) -> CalibratedTree:
    """Calibrate the junction tree of the computation graph of ``nets``.

    ``extra_factors`` join the product without being part of any network (they
    may be negative, e.g. log tables); ``extra_scopes`` are added to the graph
    as cliques so that later sum-products over them are available.
    """
    factors: list[Factor] = []
    divisors: list[Factor] = []
    graphs = [nx.Graph()]
    for net in nets:
        graphs.append(net.graph.graph)
        factors.extend(net.factors)
        divisors.extend(net.divisors)
    scopes = [f.scope for f in (*factors, *divisors, *extra_factors)]
    scopes.extend(tuple(s) for s in extra_scopes)
    graphs.append(graph_from_cliques((), scopes))

    graph = computation_graph(graphs, heuristic)
    stray = set(graph.vertices).difference(universe.ids)
    if stray:
        raise StructureError(f"variables {sorted(stray)} are not in the universe")
    tree = graph.clique_tree
    covered = set(graph.vertices)
    free_multiplier = float(universe.size(v for v in universe.ids if v not in covered))

    def place(f: Factor) -> int:
        i = tree.containing(f.scope)
        if i is None:
            # only scalars can miss, and only when there is no clique at all
            return -1
        return i

    cards = [universe.cardinalities(c) for c in tree.cliques]
    numerators = [Factor.ones(c, k) for c, k in zip(tree.cliques, cards)]
    constant = 1.0
    for f in factors:
        i = place(f)
        if i < 0:
            constant *= float(f.values)
        else:
            numerators[i] = numerators[i].multiply(f)

    potentials = list(numerators)
    for f in extra_factors:
        i = place(f)
        if i < 0:
            constant *= float(f.values)
        else:
            potentials[i] = potentials[i].multiply(f)

    assigned = []
    for f in divisors:
        i = place(f)
        assigned.append(i)
        if i < 0:
            d = float(f.values)
            if d == 0 and constant != 0:
                raise UndefinedQuotientError("division by a zero scalar factor")
            constant = constant / d if d else 0.0
        else:
            potentials[i] = potentials[i].multiply(_reciprocal(f))
    if any(i >= 0 and not f.values.all() for f, i in zip(divisors, assigned)):
        _check_quotient_support(tree, numerators, divisors, assigned)

    beliefs = _propagate(tree, potentials)
    if not all(np.all(np.isfinite(b.values)) for b in beliefs) or not np.isfinite(constant):
        raise NonFiniteResultError(
            f"calibration over {len(tree.cliques)} cliques produced non-finite beliefs"
        )
    logger.debug(
        "calibrated %d cliques, treewidth %d, free multiplier %g",
        len(tree.cliques), graph.treewidth, free_multiplier,
    )
    return CalibratedTree(tree, tuple(beliefs), free_multiplier, constant, graph.treewidth)


def clique_sum_product(tree: CalibratedTree, target_scope: Iterable[int]) -> Factor:
    """Sum-product over ``target_scope``, read off the first clique containing it"""
    target = set(target_scope)
    if not tree.beliefs:
        if target:
            raise StructureError(f"no clique covers {sorted(target)}")
        return Factor.scalar(tree.constant)
    i = tree.clique_tree.containing(target)
    if i is None:
        raise StructureError(f"no clique covers {sorted(target)}")
    return tree.beliefs[i].marginalize_to(target)


def inner_product(tree: CalibratedTree, f: Factor) -> float:
    """Sum over the universe of f times the calibrated product"""
    weights = clique_sum_product(tree, f.scope)
    return float(np.sum(f.values * weights.values)) * tree.free_multiplier


def weighted_log_moment(
    universe: VariableTable,
    weight_nets: Sequence['MarkovNetwork'],
    log_factors: Sequence[Factor],
    heuristic='min-fill',
) -> float:
    """Sum over x of the weight product times the product of one or two log tables"""
    if not 1 <= len(log_factors) <= 2:
        raise ValueError("weighted_log_moment takes one or two log factors")
    scopes = [f.scope for f in log_factors]
    tree = calibrate(universe, weight_nets, extra_factors=log_factors[:-1], extra_scopes=scopes,
                     heuristic=heuristic)
    return inner_product(tree, log_factors[-1])
