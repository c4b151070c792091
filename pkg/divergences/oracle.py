"""Brute-force reference over explicit joint tables.

Everything here enumerates the full domain and evaluates the divergence
formulas term by term. It is slow by construction and only meant for small
models: the ground truth the message-passing engine is checked against.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .engine import DivergenceRequest, Scope
from .exceptions import DomainTooLargeError, PositivityError, StructureError
from .factors import Factor
from .graphs import VariableTable
from .networks import DecomposableModel, MarkovNetwork

logger = logging.getLogger(__name__)

MAX_CELLS = 2 ** 24


@dataclass(frozen=True)
class JointTable:
    variables: VariableTable
    probabilities: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return self.variables.cardinalities(self.variables.ids)

    def array(self) -> np.ndarray:
        return self.probabilities.reshape(self.shape)


def _guard(variables: VariableTable, max_cells: int) -> None:
    cells = variables.size()
    if cells > max_cells:
        raise DomainTooLargeError(f"joint table would need {cells} cells (limit {max_cells})")


def network_table(net: MarkovNetwork, universe: VariableTable | None = None,
                  max_cells: int = MAX_CELLS) -> Factor:
    """Product of a network's factors over the whole universe, divisors dividing (0/0 = 0)"""
    universe = net.variables if universe is None else universe
    _guard(universe, max_cells)
    full = Factor.ones(universe.ids, universe.cardinalities(universe.ids))
    num = full
    for f in net.factors:
        num = num.multiply(f)
    den = full
    for f in net.divisors:
        den = den.multiply(f)
    return num.divide(den)


def joint_table(model: DecomposableModel, max_cells: int = MAX_CELLS) -> JointTable:
    table = network_table(model.network, model.variables, max_cells)
    return JointTable(model.variables, table.flat.copy())


def _require_positive(values: np.ndarray, what: str) -> None:
    if np.any(values <= 0):
        raise PositivityError(f"{what} has zero probabilities; the log branch is undefined")


def ab_terms(p: np.ndarray, q: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    """Elementwise summands of the alpha-beta divergence"""
    if alpha != 0 and beta != 0 and alpha + beta != 0:
        s = alpha + beta
        return -(p ** alpha * q ** beta - alpha / s * p ** s - beta / s * q ** s) / (alpha * beta)
    if alpha != 0 and beta == 0:
        _require_positive(p, 'P')
        _require_positive(q, 'Q')
        return (p ** alpha * np.log(p ** alpha / q ** alpha) - p ** alpha + q ** alpha) / alpha ** 2
    if alpha != 0:
        _require_positive(p, 'P')
        _require_positive(q, 'Q')
        return (np.log(q ** alpha / p ** alpha) + (q ** alpha / p ** alpha) ** -1 - 1) / alpha ** 2
    if beta != 0:
        _require_positive(p, 'P')
        _require_positive(q, 'Q')
        return (q ** beta * np.log(q ** beta / p ** beta) - q ** beta + p ** beta) / beta ** 2
    _require_positive(p, 'P')
    _require_positive(q, 'Q')
    return 0.5 * (np.log(p) - np.log(q)) ** 2


def _sum_out(array: np.ndarray, keep: tuple[int, ...], ids: tuple[int, ...]) -> np.ndarray:
    axes = tuple(i for i, v in enumerate(ids) if v not in keep)
    return array.sum(axis=axes, keepdims=True)


def conditional_slices(table: JointTable, target, given) -> tuple[np.ndarray, np.ndarray]:
    """(P(y|z), P(z)) broadcast over the full domain, P(y|z) = 0 where P(z) = 0"""
    ids = table.variables.ids
    joint = table.array()
    w = _sum_out(joint, tuple(target) + tuple(given), ids)
    z = _sum_out(joint, tuple(given), ids)
    w, z = np.broadcast_arrays(w, z)
    cond = np.zeros(w.shape)
    np.divide(w, z, out=cond, where=z > 0)
    return cond, z


def oracle_divergence(p: JointTable, q: JointTable, request: DivergenceRequest) -> float:
    if not p.variables.same_domain(q.variables):
        raise StructureError("oracle tables are over different variables")
    scope: Scope = request.scope
    scope.validate(p.variables)
    alpha, beta = request.params.alpha, request.params.beta
    ids = p.variables.ids

    if scope.kind == 'joint':
        return float(np.sum(ab_terms(p.probabilities, q.probabilities, alpha, beta)))
    if scope.kind == 'marginal':
        pm = _sum_out(p.array(), scope.kept, ids).ravel()
        qm = _sum_out(q.array(), scope.kept, ids).ravel()
        return float(np.sum(ab_terms(pm, qm, alpha, beta)))

    # conditional: sum_z P(z) sum_y d(P(y|z), Q(y|z)), skipping P(z) = 0
    pc, pz = conditional_slices(p, scope.target, scope.given)
    qc, _ = conditional_slices(q, scope.target, scope.given)
    pc, qc, pz = pc.ravel(), qc.ravel(), pz.ravel()
    live = pz > 0
    return float(np.sum(pz[live] * ab_terms(pc[live], qc[live], alpha, beta)))


def enumerate_assignments(variables: VariableTable):
    """Every full assignment in factor order (last variable fastest)"""
    ids = variables.ids
    for states in itertools.product(*(range(c) for c in variables.cardinalities(ids))):
        yield dict(zip(ids, states))
