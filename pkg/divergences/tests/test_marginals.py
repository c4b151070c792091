import numpy as np
from django.test import SimpleTestCase

from divergences.exceptions import StructureError
from divergences.marginals import (
    conditional_network, gamma, kappa, marginal_network, marginalized_factor, n_partition,
)
from divergences.oracle import enumerate_assignments, joint_table

from . import factories

HUB_CLIQUES = [(0, 2), (1, 2), (2, 3), (3, 4), (3, 5)]


def brute_marginal(model, kept):
    table = joint_table(model).array()
    axes = tuple(i for i in model.variables.ids if i not in kept)
    return table.sum(axis=axes)


class NPartitionTests(SimpleTestCase):
    def test_nothing_eliminated(self):
        model = factories.random_model(np.random.default_rng(0), 6)
        partition = n_partition(model, model.variables.ids)
        self.assertEqual(list(partition.groups), model.cliques)

    def test_hub_elimination(self):
        model = factories.model_from_cliques(HUB_CLIQUES, 6, np.random.default_rng(1))
        partition = n_partition(model, [0, 1, 3, 4, 5])
        self.assertEqual(set(partition.groups), {(0, 1, 2, 3), (3, 4), (3, 5)})

    def test_unknown_group(self):
        model = factories.model_from_cliques(HUB_CLIQUES, 6, np.random.default_rng(1))
        partition = n_partition(model, [0, 1, 3, 4, 5])
        with self.assertRaises(StructureError):
            partition.index((0, 1))


class MarginalizedFactorTests(SimpleTestCase):
    def setUp(self):
        self.model = factories.model_from_cliques(HUB_CLIQUES, 6, np.random.default_rng(2))

    def test_group_without_eliminated_variables(self):
        partition = n_partition(self.model, [0, 1, 3, 4, 5])
        f = marginalized_factor(partition, (3, 4))
        cpt = self.model.cpts[self.model.cliques.index((3, 4))]
        np.testing.assert_array_equal(f.values, cpt.values)

    def test_whole_model_to_scalar(self):
        model = factories.chain_model([[0.7, 0.3], [0.4, 0.6]], [0.2, 0.8], 4)
        partition = n_partition(model, [])
        self.assertEqual(len(partition.groups), 1)
        f = marginalized_factor(partition, partition.groups[0])
        self.assertEqual(f.scope, ())
        self.assertAlmostEqual(f.total(), 1.0)

    def test_merged_group_by_enumeration(self):
        partition = n_partition(self.model, [0, 1, 3, 4, 5])
        f = marginalized_factor(partition, (0, 1, 2, 3))
        self.assertEqual(f.scope, (0, 1, 3))
        cpts = [self.model.cpts[self.model.cliques.index(c)] for c in [(0, 2), (1, 2), (2, 3)]]
        for a in range(2):
            for b in range(2):
                for d in range(2):
                    expected = sum(
                        np.prod([t.value_at({0: a, 1: b, 2: c, 3: d}) for t in cpts]) for c in range(2)
                    )
                    self.assertAlmostEqual(f.value_at({0: a, 1: b, 3: d}), expected, places=14)


class KappaGammaTests(SimpleTestCase):
    def test_kappa_edges(self):
        g = kappa([(0, 1), (1, 2)])
        self.assertEqual(sorted(map(sorted, g.edges)), [[0, 1], [1, 2]])

    def test_kappa_single_group_is_complete(self):
        g = kappa([(0, 1, 2, 4, 7)])
        self.assertEqual(g.number_of_edges(), 10)

    def test_gamma_with_everything_kept(self):
        model = factories.random_model(np.random.default_rng(4), 7)
        self.assertEqual(gamma(n_partition(model, model.variables.ids)).cliques, model.cliques)

    def test_gamma_after_hub_elimination(self):
        model = factories.model_from_cliques(HUB_CLIQUES, 6, np.random.default_rng(1))
        self.assertEqual(gamma(n_partition(model, [0, 1, 3, 4, 5])).cliques, [(0, 1, 3), (3, 4), (3, 5)])


class MarginalNetworkTests(SimpleTestCase):
    def test_all_variables_kept(self):
        model = factories.random_model(np.random.default_rng(5), 5)
        net = marginal_network(model, model.variables.ids)
        self.assertEqual([f.scope for f in net.factors], [f.scope for f in model.cpts])
        for f, cpt in zip(net.factors, model.cpts):
            np.testing.assert_array_equal(f.values, cpt.values)

    def test_nothing_kept(self):
        model = factories.random_model(np.random.default_rng(6), 5)
        net = marginal_network(model, [])
        self.assertEqual(len(net.factors), 1)
        self.assertEqual(net.factors[0].scope, ())
        self.assertAlmostEqual(net.factors[0].total(), 1.0)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            model = factories.random_model(rng, 6)
            kept = factories.random_subset(rng, model.variables.ids, 3, 3)
            net = marginal_network(model, kept)
            expected = brute_marginal(model, kept)
            for x in enumerate_assignments(net.variables):
                self.assertAlmostEqual(net.evaluate(x), float(expected[tuple(x[v] for v in kept)]), places=12)

    def test_unknown_variable(self):
        model = factories.random_model(np.random.default_rng(8), 3)
        with self.assertRaises(StructureError):
            marginal_network(model, [0, 9])


class ConditionalNetworkTests(SimpleTestCase):
    def test_empty_given_is_marginal(self):
        model = factories.random_model(np.random.default_rng(9), 5)
        a = conditional_network(model, [1, 3], [])
        b = marginal_network(model, [1, 3])
        self.assertEqual(a.graph.cliques, b.graph.cliques)
        for x in enumerate_assignments(a.variables):
            self.assertEqual(a.evaluate(x), b.evaluate(x))

    def test_whole_target_is_joint(self):
        model = factories.random_model(np.random.default_rng(10), 4)
        net = conditional_network(model, model.variables.ids, [])
        table = joint_table(model)
        for index, x in enumerate(enumerate_assignments(model.variables)):
            self.assertAlmostEqual(net.evaluate(x), float(table.probabilities[index]), places=14)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            model = factories.random_model(rng, 5)
            chosen = factories.random_subset(rng, model.variables.ids, 4, 4)
            target, given = chosen[:2], chosen[2:]
            net = conditional_network(model, target, given)
            w = brute_marginal(model, chosen)
            z = brute_marginal(model, given)
            for x in enumerate_assignments(net.variables):
                pz = float(z[tuple(x[v] for v in given)])
                if pz == 0:
                    continue
                expected = float(w[tuple(x[v] for v in chosen)]) / pz
                self.assertAlmostEqual(net.evaluate(x), expected, places=12)

    def test_overlap_rejected(self):
        model = factories.random_model(np.random.default_rng(12), 4)
        with self.assertRaises(StructureError):
            conditional_network(model, [0, 1], [1])

    def test_chain_conditional(self):
        model = factories.chain_model([[0.9, 0.1], [0.3, 0.7]], [0.6, 0.4], 4)
        net = conditional_network(model, [3], [2])
        self.assertAlmostEqual(net.evaluate({2: 1, 3: 1}), 0.7)
        self.assertAlmostEqual(net.evaluate({2: 0, 3: 1}), 0.1)
