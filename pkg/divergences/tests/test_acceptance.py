"""Seeded end-to-end checks of the engine against brute force and known structures."""
import math
import tempfile
import time
from pathlib import Path

import networkx as nx
import numpy as np
from django.test import SimpleTestCase

from divergences.engine import ABParams, DivergenceRequest, Scope, ab_divergence, named_divergence
from divergences.graphs import ChordalGraph, VariableTable, is_chordal
from divergences.marginals import gamma, marginal_network, n_partition
from divergences.networks import random_chordal_structure, random_decomposable_model
from divergences.oracle import conditional_slices, enumerate_assignments, joint_table, oracle_divergence
from divergences.services import ErrorAnalysisService, SimulationService

from . import factories

BRANCHES = [(1.5, 0.5), (1, 0), (1, -1), (0, 1), (0, 0)]

NINE_CLIQUES = [(1, 2, 4), (0, 1), (2, 3), (4, 7), (2, 5), (7, 8), (5, 6)]
HUB_CLIQUES = [(0, 2), (1, 2), (2, 3), (3, 4), (3, 5)]


def random_scopes(rng, ids):
    n = len(ids)
    chosen = factories.random_subset(rng, ids, 1, n)
    split = int(rng.integers(1, len(chosen) + 1))
    shuffled = [int(v) for v in rng.permutation(chosen)]
    return [
        Scope.joint(),
        Scope.marginal(factories.random_subset(rng, ids, 1, n - 1)),
        Scope.conditional(shuffled[:split], shuffled[split:]),
    ]


def assertClose(case, engine, exact, message=None):
    case.assertLessEqual(abs(engine - exact), max(1e-9, 1e-6 * abs(exact)), message)


class OracleSweepTests(SimpleTestCase):
    def test_engine_matches_oracle(self):
        rng = np.random.default_rng(2024)
        for case in range(200):
            n = int(rng.integers(3, 9))
            P, Q = factories.random_pair(rng, n)
            p, q = joint_table(P), joint_table(Q)
            for scope in random_scopes(rng, P.variables.ids):
                for alpha, beta in BRANCHES:
                    request = DivergenceRequest(ABParams(alpha, beta), scope)
                    engine = ab_divergence(P, Q, request).value
                    exact = oracle_divergence(p, q, request)
                    assertClose(self, engine, exact, f"case {case}, {scope}, ({alpha}, {beta})")


class PartitionExampleTests(SimpleTestCase):
    def test_nine_variable_clique_tree(self):
        model = factories.model_from_cliques(NINE_CLIQUES, 9, np.random.default_rng(0))
        partition = n_partition(model, [0, 2, 3, 6, 7])
        self.assertEqual(set(partition.groups), {(7, 8), (0, 1, 2, 4, 7), (2, 5, 6), (2, 3)})
        self.assertEqual(set(gamma(partition).cliques), {(0, 2, 7), (2, 3), (2, 6)})

    def test_marginalizing_the_hub(self):
        model = factories.model_from_cliques(HUB_CLIQUES, 6, np.random.default_rng(1))
        structure = gamma(n_partition(model, [0, 1, 3, 4, 5]))
        self.assertEqual(set(structure.cliques), {(0, 1, 3), (3, 4), (3, 5)})


class ChordalityTests(SimpleTestCase):
    def test_gamma_is_always_chordal(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            n = int(rng.integers(3, 11))
            structure = random_chordal_structure(n, rng, 4)
            model = random_decomposable_model(structure, factories.binary_variables(n), rng)
            kept = factories.random_subset(rng, model.variables.ids, 1, n)
            result = gamma(n_partition(model, kept))
            self.assertTrue(is_chordal(result.graph))
            self.assertTrue(nx.is_chordal(result.graph))
            self.assertEqual(set(result.vertices), set(kept))


class MarginalDecompositionTests(SimpleTestCase):
    def test_marginal_network_is_the_marginal(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(2, 9))
            model = factories.random_model(rng, n)
            kept = factories.random_subset(rng, model.variables.ids, 1, n)
            net = marginal_network(model, kept)
            joint = joint_table(model).array()
            axes = tuple(i for i in model.variables.ids if i not in kept)
            expected = joint.sum(axis=axes)
            for x in enumerate_assignments(net.variables):
                self.assertAlmostEqual(net.evaluate(x), float(expected[tuple(x[v] for v in kept)]), delta=1e-12)


class ConditionalKLTests(SimpleTestCase):
    def test_matches_reweighted_joint_form(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            n = int(rng.integers(3, 8))
            P, Q = factories.random_pair(rng, n)
            chosen = [int(v) for v in rng.permutation(factories.random_subset(rng, P.variables.ids, 2, n))]
            split = int(rng.integers(1, len(chosen)))
            target, given = chosen[:split], chosen[split:]
            engine = named_divergence(P, Q, 'kl', Scope.conditional(target, given)).value

            # KL of P(y|z)P(z) against Q(y|z)P(z)
            pc, pz = conditional_slices(joint_table(P), target, given)
            qc, _ = conditional_slices(joint_table(Q), target, given)
            left, right = (pc * pz).ravel(), (qc * pz).ravel()
            expected = float(np.sum(left * np.log(left / right)))
            self.assertAlmostEqual(engine, expected, delta=max(1e-12, 1e-9 * abs(expected)))


class AxiomTests(SimpleTestCase):
    def test_identity_and_nonnegativity(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            n = int(rng.integers(3, 7))
            P, Q = factories.random_pair(rng, n)
            for scope in random_scopes(rng, P.variables.ids):
                for alpha, beta in BRANCHES:
                    request = DivergenceRequest(ABParams(alpha, beta), scope)
                    self.assertLessEqual(abs(ab_divergence(P, P, request).value), 1e-9)
                    self.assertGreaterEqual(ab_divergence(P, Q, request).value, -1e-9)
            self.assertAlmostEqual(named_divergence(P, Q, 'hellinger').value,
                                   named_divergence(Q, P, 'hellinger').value, delta=1e-9)

    def test_swapping_parameters_swaps_arguments(self):
        rng = np.random.default_rng(19)
        for _ in range(20):
            P, Q = factories.random_pair(rng, 5)
            for alpha, beta in [(1.5, 0.5), (1, 0), (2, -1)]:
                forward = ab_divergence(P, Q, DivergenceRequest(ABParams(alpha, beta))).value
                backward = ab_divergence(Q, P, DivergenceRequest(ABParams(beta, alpha))).value
                self.assertAlmostEqual(forward, backward, delta=max(1e-9, 1e-9 * abs(forward)))

    def test_general_branch_tends_to_alpha_only(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            P, Q = factories.random_pair(rng, 5)
            near = ab_divergence(P, Q, DivergenceRequest(ABParams(1, 1e-7))).value
            limit = ab_divergence(P, Q, DivergenceRequest(ABParams(1, 0))).value
            self.assertAlmostEqual(near, limit, delta=1e-4)


class ScalabilityTests(SimpleTestCase):
    @staticmethod
    def best_runtime(n, seed=29, repeats=5):
        rng = np.random.default_rng(seed)
        structure = random_chordal_structure(n, rng, 4)
        variables = factories.binary_variables(n)
        P = random_decomposable_model(structure, variables, rng)
        Q = random_decomposable_model(structure, variables, rng)
        timings = []
        for _ in range(repeats):
            started = time.perf_counter()
            named_divergence(P, Q, 'hellinger')
            timings.append(time.perf_counter() - started)
        return min(timings)

    def test_two_hundred_variables(self):
        rng = np.random.default_rng(29)
        structure = random_chordal_structure(200, rng, 4)
        variables = factories.binary_variables(200)
        P = random_decomposable_model(structure, variables, rng)
        Q = random_decomposable_model(structure, variables, rng)
        result = named_divergence(P, Q, 'hellinger')
        self.assertTrue(0.0 <= result.value <= 1.0)
        self.assertLessEqual(max(result.diagnostics.treewidths), 3)
        self.assertLessEqual(result.diagnostics.max_table_cells, 2 ** (max(result.diagnostics.treewidths) + 1))

    def test_runtime_grows_linearly_at_fixed_treewidth(self):
        ratios = [self.best_runtime(200, seed) / self.best_runtime(50, seed) for seed in (29, 30, 31)]
        self.assertLess(float(np.median(ratios)), 8.0, ratios)


class TriangulationTests(SimpleTestCase):
    def test_elimination_order_does_not_change_values(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            n = int(rng.integers(3, 9))
            P, Q = factories.random_pair(rng, n)
            for alpha, beta in [(1.5, 0.5), (1, 0), (0, 0)]:
                request = DivergenceRequest(ABParams(alpha, beta))
                a = ab_divergence(P, Q, request, 'min-fill').value
                b = ab_divergence(P, Q, request, 'reverse-id').value
                self.assertAlmostEqual(a, b, delta=max(1e-12, 1e-9 * abs(a)))

    def test_chordal_structure_with_mixed_cardinalities(self):
        rng = np.random.default_rng(37)
        structure = ChordalGraph.from_cliques(range(5), [(0, 1, 2), (2, 3), (3, 4)])
        variables = VariableTable.from_cardinalities([2, 3, 2, 4, 3])
        P = random_decomposable_model(structure, variables, rng)
        Q = random_decomposable_model(structure, variables, rng)
        request = DivergenceRequest(ABParams(1, -1), Scope.conditional([0, 4], [2]))
        assertClose(self, ab_divergence(P, Q, request).value,
                    oracle_divergence(joint_table(P), joint_table(Q), request))


class SyntheticPipelineTests(SimpleTestCase):
    def test_ranking_follows_injected_noise(self):
        with tempfile.TemporaryDirectory() as tmp:
            paths = SimulationService().simulate(Path(tmp) / 'sim', variables=10, rows=100_000, seed=5)
            summary = ErrorAnalysisService(threads=2).report(
                paths['ideal'], paths['observed'], Path(tmp) / 'report',
                learn='chow-liu', orders=(1,), truth_path=paths['truth'],
            )
        self.assertGreaterEqual(summary['noise_spearman'], 0.9)
        self.assertFalse(math.isnan(summary['orders'][0]['max']))
