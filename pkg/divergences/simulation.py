"""Sampling from decomposable models and the synthetic readout-error experiment."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .datasets import SampleDataset
from .exceptions import DataError
from .factors import Factor
from .graphs import ChordalGraph, Variable, VariableTable
from .inference import calibrate
from .networks import DecomposableModel

logger = logging.getLogger(__name__)


def sample_model(model: DecomposableModel, rows: int, rng: np.random.Generator) -> SampleDataset:
    """Forward sampling along a rooted clique tree of calibrated clique marginals"""
    variables = model.variables
    tree = calibrate(variables, [model.network])
    cliques = tree.clique_tree.cliques
    column = {v: i for i, v in enumerate(variables.ids)}
    out = np.zeros((rows, len(variables)), dtype=np.int64)

    for i, _, sep in tree.clique_tree.rooted(0):
        clique = cliques[i]
        rest = tuple(v for v in clique if v not in sep)
        belief = tree.beliefs[i]
        table = belief.ordered_values(sep + rest).reshape(variables.size(sep), variables.size(rest))
        totals = table.sum(axis=1, keepdims=True)
        cond = np.divide(table, totals, out=np.zeros_like(table), where=totals > 0)
        cumulative = np.cumsum(cond, axis=1)

        if sep:
            row = np.ravel_multi_index(tuple(out[:, column[v]] for v in sep), variables.cardinalities(sep))
        else:
            row = np.zeros(rows, dtype=np.int64)
        draws = (rng.random(rows)[:, None] > cumulative[row]).sum(axis=1)
        draws = np.minimum(draws, table.shape[1] - 1)
        if rest:
            states = np.unravel_index(draws, variables.cardinalities(rest))
            for v, s in zip(rest, states):
                out[:, column[v]] = s
    return SampleDataset(variables, out)


def random_tree_structure(n: int, rng: np.random.Generator) -> ChordalGraph:
    tree = nx.Graph()
    tree.add_nodes_from(range(n))
    tree.add_edges_from((int(rng.integers(v)), v) for v in range(1, n))
    return ChordalGraph.from_graph(tree)


def skewed_tree_model(n: int, rng: np.random.Generator, names=None, excited: float = 0.15) -> DecomposableModel:
    """Binary tree model in which every variable reads 1 with probability ``excited``

    Like qubits prepared in |0>. Children are correlated with their parent,
    but the conditionals are chosen so all marginals are equal, which keeps
    order-1 divergences comparable across variables.
    """
    variables = VariableTable(tuple(
        Variable(i, 2, names[i] if names else f"q{i}") for i in range(n)
    ))
    prior = np.array([1 - excited, excited])
    structure = random_tree_structure(n, rng)
    tree = structure.clique_tree
    tables = {}
    for i, parent, sep in tree.rooted(0):
        clique = tree.cliques[i]
        if len(clique) == 1:
            tables[clique] = Factor(clique, (2,), prior)
            continue
        # P(1 | parent 1) = high, P(1 | parent 0) = low, marginal stays at `excited`
        high = rng.uniform(0.3, 0.6)
        low = excited * (1 - high) / (1 - excited)
        given = np.array([[1 - low, low], [1 - high, high]])
        if parent is None:
            tables[clique] = Factor(clique, (2, 2), prior[:, None] * given)
        else:
            rest = tuple(v for v in clique if v not in sep)
            tables[clique] = Factor(sep + rest, (2, 2), given)
    return DecomposableModel.from_tables(variables, structure, tables)


@dataclass(frozen=True)
class ReadoutExperiment:
    model: DecomposableModel
    ideal: SampleDataset
    observed: SampleDataset
    noise: np.ndarray


def simulate_readout_experiment(n: int = 10, rows: int = 100_000, seed: int = 0,
                                noise_levels=None) -> ReadoutExperiment:
    """Ideal samples of a known tree model, plus samples with per-variable bit flips"""
    rng = np.random.default_rng(seed)
    model = skewed_tree_model(n, rng)
    if noise_levels is None:
        noise = rng.permutation(np.linspace(0.01, 0.2, n))
    else:
        noise = np.asarray(noise_levels, dtype=float)
        if noise.shape != (n,):
            raise DataError(f"need one noise level per variable, got {noise.shape}")
    ideal = sample_model(model, rows, rng)
    clean = sample_model(model, rows, rng)
    flips = rng.random(clean.rows.shape) < noise[None, :]
    observed = SampleDataset(model.variables, np.bitwise_xor(clean.rows, flips.astype(np.int64)))
    logger.debug("simulated %d rows over %d variables", rows, n)
    return ReadoutExperiment(model, ideal, observed, noise)
