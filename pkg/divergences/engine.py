"""Alpha-beta divergences between decomposable models.

Every branch of the divergence family is assembled from three primitives
computed by calibration over products of the two networks:

* ``power_sum``      S(a, b)       = sum_x P(x)^a Q(x)^b
* ``log_moment_sum`` T(a, b; c, d) = sum_x P^a Q^b log(P^c Q^d)
* ``log_square_sum``               = sum_x w(x) (log P - log Q)^2

Marginal divergences swap the models' networks for their marginal networks;
conditional divergences use quotient networks and weight every term by the
first model's marginal on the conditioning set.
"""
from __future__ import annotations

import itertools
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .exceptions import NonFiniteResultError, StructureError
from .factors import Factor
from .graphs import VariableTable
from .inference import CalibratedTree, calibrate, inner_product
from .marginals import conditional_network, marginal_network
from .networks import DecomposableModel, MarkovNetwork

logger = logging.getLogger(__name__)

NEGATIVE_SLACK = 1e-9

PRESETS = {
    'kl': (1.0, 0.0),
    'reverse-kl': (0.0, 1.0),
    'hellinger': (0.5, 0.5),
    'itakura-saito': (1.0, -1.0),
    'log-l2': (0.0, 0.0),
}


def classify(alpha: float, beta: float) -> str:
    if alpha == 0 and beta == 0:
        return 'both-zero'
    if beta == 0:
        return 'alpha-only'
    if alpha == 0:
        return 'beta-only'
    if alpha + beta == 0:
        return 'opposite'
    return 'general'


@dataclass(frozen=True)
class ABParams:
    alpha: float
    beta: float
    branch: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'alpha', float(self.alpha))
        object.__setattr__(self, 'beta', float(self.beta))
        object.__setattr__(self, 'branch', classify(self.alpha, self.beta))

    @classmethod
    def preset(cls, name: str) -> 'ABParams':
        try:
            return cls(*PRESETS[name])
        except KeyError:
            raise ValueError(f"unknown divergence preset {name!r}") from None


@dataclass(frozen=True)
class Scope:
    kind: str = 'joint'
    kept: tuple[int, ...] = ()
    target: tuple[int, ...] = ()
    given: tuple[int, ...] = ()

    @classmethod
    def joint(cls) -> 'Scope':
        return cls()

    @classmethod
    def marginal(cls, kept: Iterable[int]) -> 'Scope':
        return cls('marginal', kept=tuple(sorted(kept)))

    @classmethod
    def conditional(cls, target: Iterable[int], given: Iterable[int] = ()) -> 'Scope':
        return cls('conditional', target=tuple(sorted(target)), given=tuple(sorted(given)))

    def validate(self, variables: VariableTable) -> None:
        ids = set(variables.ids)
        if self.kind == 'joint':
            return
        if self.kind == 'marginal':
            if not self.kept:
                raise StructureError("marginal scope needs at least one variable")
            if not ids.issuperset(self.kept):
                raise StructureError(f"marginal variables {self.kept} are not all model variables")
            return
        if self.kind == 'conditional':
            if not self.target:
                raise StructureError("conditional scope needs a nonempty target")
            if set(self.target) & set(self.given):
                raise StructureError("conditional target and given sets overlap")
            if not ids.issuperset(self.target + self.given):
                raise StructureError("conditional variables are not all model variables")
            return
        raise StructureError(f"unknown scope kind {self.kind!r}")

    def describe(self) -> dict:
        if self.kind == 'marginal':
            return {'kind': 'marginal', 'variables': list(self.kept)}
        if self.kind == 'conditional':
            return {'kind': 'conditional', 'target': list(self.target), 'given': list(self.given)}
        return {'kind': 'joint'}


@dataclass(frozen=True)
class DivergenceRequest:
    params: ABParams
    scope: Scope = Scope()


@dataclass
class Diagnostics:
    treewidths: list[int] = field(default_factory=list)
    cells: int = 0
    max_table_cells: int = 0
    millis: float = 0.0

    def record(self, tree: CalibratedTree) -> None:
        self.treewidths.append(tree.treewidth)
        self.cells += tree.cells
        self.max_table_cells = max(self.max_table_cells, tree.max_cells)


@dataclass(frozen=True)
class DivergenceResult:
    value: float
    params: ABParams
    scope: Scope
    diagnostics: Diagnostics
    preset: str | None = None


def _calibrated(universe, nets, trace, heuristic, **kwargs) -> CalibratedTree:
    tree = calibrate(universe, nets, heuristic=heuristic, **kwargs)
    if trace is not None:
        trace.record(tree)
    return tree


def _measures(Pnet, Qnet, a, b, weight) -> list[MarkovNetwork]:
    nets = []
    if a != 0:
        nets.append(Pnet.power(a))
    if b != 0:
        nets.append(Qnet.power(b))
    if weight is not None:
        nets.append(weight)
    return nets


def _merge_by_scope(tables: Iterable[Factor]) -> list[Factor]:
    merged: dict[tuple[int, ...], Factor] = {}
    for f in tables:
        known = merged.get(f.scope)
        merged[f.scope] = f if known is None else Factor(f.scope, f.cards, known.values + f.values)
    return [merged[s] for s in sorted(merged, key=lambda s: (len(s), s))]


def power_sum(Pnet: MarkovNetwork, Qnet: MarkovNetwork, a: float, b: float, universe: VariableTable,
              weight: MarkovNetwork | None = None, heuristic='min-fill',
              trace: Diagnostics | None = None) -> float:
    """S(a, b): sum over the universe of P^a Q^b (times the weight network, if any)"""
    tree = _calibrated(universe, _measures(Pnet, Qnet, a, b, weight), trace, heuristic)
    return tree.partition_function


def log_moment_sum(Pnet: MarkovNetwork, Qnet: MarkovNetwork, a: float, b: float, c: float, d: float,
                   universe: VariableTable, weight: MarkovNetwork | None = None, heuristic='min-fill',
                   trace: Diagnostics | None = None) -> float:
    """T(a, b; c, d): sum over the universe of P^a Q^b log(P^c Q^d)"""
    logs = []
    if c != 0:
        logs.extend(Pnet.signed_logs(c))
    if d != 0:
        logs.extend(Qnet.signed_logs(d))
    logs = _merge_by_scope(logs)
    if not logs:
        return 0.0
    tree = _calibrated(universe, _measures(Pnet, Qnet, a, b, weight), trace, heuristic,
                       extra_scopes=[f.scope for f in logs])
    return math.fsum(inner_product(tree, f) for f in logs)


def log_square_sum(Pnet: MarkovNetwork, Qnet: MarkovNetwork, weight: MarkovNetwork | None,
                   universe: VariableTable, heuristic='min-fill',
                   trace: Diagnostics | None = None) -> float:
    """Sum over the universe of w (log P - log Q)^2, expanded over pairs of log tables.

    One calibration per log table serves the whole row of pairs it takes part in.
    """
    logs = _merge_by_scope([*Pnet.signed_logs(1.0), *Qnet.signed_logs(-1.0)])
    scopes = [f.scope for f in logs]
    nets = [weight] if weight is not None else []
    total = []
    for f in logs:
        tree = _calibrated(universe, nets, trace, heuristic, extra_factors=[f], extra_scopes=scopes)
        total.extend(inner_product(tree, g) for g in logs)
    return math.fsum(total)


def network_divergence(params: ABParams, Pnet: MarkovNetwork, Qnet: MarkovNetwork, universe: VariableTable,
                       weight: MarkovNetwork | None = None, count: float | None = None,
                       heuristic='min-fill', trace: Diagnostics | None = None) -> float:
    """Divergence between the measures two networks define over ``universe``.

    ``count`` is the number of terms the opposite branch subtracts; it defaults
    to the size of the universe.
    """
    alpha, beta = params.alpha, params.beta
    count = float(universe.size()) if count is None else count

    def S(a, b):
        return power_sum(Pnet, Qnet, a, b, universe, weight, heuristic, trace)

    def T(a, b, c, d):
        return log_moment_sum(Pnet, Qnet, a, b, c, d, universe, weight, heuristic, trace)

    branch = params.branch
    if branch == 'general':
        s = alpha + beta
        return -(S(alpha, beta) - alpha / s * S(s, 0) - beta / s * S(0, s)) / (alpha * beta)
    if branch == 'alpha-only':
        return (T(alpha, 0, alpha, -alpha) - S(alpha, 0) + S(0, alpha)) / alpha ** 2
    if branch == 'opposite':
        return (T(0, 0, -alpha, alpha) + S(alpha, -alpha) - count) / alpha ** 2
    if branch == 'beta-only':
        return (T(0, beta, -beta, beta) - S(0, beta) + S(beta, 0)) / beta ** 2
    return 0.5 * log_square_sum(Pnet, Qnet, weight, universe, heuristic, trace)


def scope_networks(P: DecomposableModel, Q: DecomposableModel, scope: Scope):
    """(Pnet, Qnet, weight, universe, count) for a joint, marginal or conditional scope"""
    if scope.kind == 'joint':
        return P.network, Q.network, None, P.variables, float(P.variables.size())
    if scope.kind == 'marginal':
        universe = P.variables.restrict(scope.kept)
        return (marginal_network(P, scope.kept), marginal_network(Q, scope.kept), None,
                universe, float(universe.size()))
    universe = P.variables.restrict(scope.target + scope.given)
    return (
        conditional_network(P, scope.target, scope.given),
        conditional_network(Q, scope.target, scope.given),
        marginal_network(P, scope.given),
        universe,
        float(P.variables.size(scope.target)),
    )


def ab_divergence(P: DecomposableModel, Q: DecomposableModel, request: DivergenceRequest,
                  heuristic='min-fill') -> DivergenceResult:
    if not P.variables.same_domain(Q.variables):
        raise StructureError("the two models are over different variable tables")
    request.scope.validate(P.variables)
    started = time.perf_counter()
    trace = Diagnostics()

    Pnet, Qnet, weight, universe, count = scope_networks(P, Q, request.scope)
    value = network_divergence(request.params, Pnet, Qnet, universe, weight, count, heuristic, trace)
    if not np.isfinite(value):
        raise NonFiniteResultError(f"divergence evaluated to {value!r}")
    if value < -NEGATIVE_SLACK:
        logger.warning("divergence %r is below the numerical slack of %g", value, NEGATIVE_SLACK)

    trace.millis = (time.perf_counter() - started) * 1000.0
    logger.debug("%s divergence (%g, %g) = %r in %.1f ms", request.scope.kind,
                 request.params.alpha, request.params.beta, value, trace.millis)
    return DivergenceResult(float(value), request.params, request.scope, trace)


def named_divergence(P: DecomposableModel, Q: DecomposableModel, name: str, scope: Scope = Scope(),
                     heuristic='min-fill') -> DivergenceResult:
    """Preset member of the family; ``hellinger`` is the Hellinger distance in [0, 1]"""
    result = ab_divergence(P, Q, DivergenceRequest(ABParams.preset(name), scope), heuristic)
    if name == 'hellinger':
        result = replace(result, value=math.sqrt(max(0.0, result.value / 4.0)))
    return replace(result, preset=name)


def grid_tuples(variables: VariableTable, order: int,
                tuples: Iterable[Sequence[int]] | None = None) -> list[tuple[int, ...]]:
    if tuples is None:
        if not 1 <= order <= len(variables):
            raise StructureError(f"order {order} is outside 1..{len(variables)}")
        return list(itertools.combinations(variables.ids, order))
    chosen = set()
    for t in tuples:
        t = tuple(sorted(set(t)))
        if len(t) != order:
            raise StructureError(f"tuple {t} does not have {order} distinct variables")
        if not set(t).issubset(variables.ids):
            raise StructureError(f"tuple {t} names unknown variables")
        chosen.add(t)
    return sorted(chosen)


def divergence_grid(P: DecomposableModel, Q: DecomposableModel, order: int, name: str,
                    tuples: Iterable[Sequence[int]] | None = None,
                    threads: int = 1) -> list[tuple[tuple[int, ...], float]]:
    """Marginal divergence for every variable tuple of ``order``, in lexicographic order"""
    chosen = grid_tuples(P.variables, order, tuples)

    def evaluate(t):
        return named_divergence(P, Q, name, Scope.marginal(t)).value

    if threads > 1 and len(chosen) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(evaluate, chosen))
    else:
        values = [evaluate(t) for t in chosen]
    return list(zip(chosen, values))


def mean_divergence_grid(pairs: Sequence[tuple[DecomposableModel, DecomposableModel]], order: int,
                         name: str, tuples: Iterable[Sequence[int]] | None = None,
                         threads: int = 1) -> list[tuple[tuple[int, ...], float]]:
    """Tuple-wise mean of the grids of several model pairs"""
    if not pairs:
        raise ValueError("mean_divergence_grid needs at least one model pair")
    tuples = None if tuples is None else list(tuples)
    grids = [divergence_grid(P, Q, order, name, tuples, threads) for P, Q in pairs]
    keys = [t for t, _ in grids[0]]
    means = np.mean([[v for _, v in grid] for grid in grids], axis=0)
    return list(zip(keys, means.tolist()))


def order_inversions(high: Sequence[tuple[tuple[int, ...], float]],
                     pairs: Sequence[tuple[tuple[int, ...], float]]) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Tuple pairs (A, B) where D(A) > D(B) although every pair inside A scores below every pair inside B"""
    pair_value = {t: v for t, v in pairs}
    bounds = {}
    for t, _ in high:
        inner = [pair_value[p] for p in itertools.combinations(t, 2)]
        bounds[t] = (min(inner), max(inner))
    found = []
    for (a, da), (b, db) in itertools.permutations(high, 2):
        if da > db and bounds[a][1] < bounds[b][0]:
            found.append((a, b))
    return found
