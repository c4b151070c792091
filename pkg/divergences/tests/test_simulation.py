import numpy as np
from django.test import SimpleTestCase

from divergences.exceptions import DataError
from divergences.oracle import joint_table
from divergences.simulation import random_tree_structure, simulate_readout_experiment, skewed_tree_model


class TreeModelTests(SimpleTestCase):
    def test_tree_structure(self):
        structure = random_tree_structure(8, np.random.default_rng(0))
        self.assertEqual(structure.graph.number_of_edges(), 7)
        self.assertEqual(structure.treewidth, 1)

    def test_every_marginal_is_excited(self):
        model = skewed_tree_model(6, np.random.default_rng(1), excited=0.2)
        joint = joint_table(model).array()
        for v in model.variables.ids:
            axes = tuple(i for i in model.variables.ids if i != v)
            np.testing.assert_allclose(joint.sum(axis=axes), [0.8, 0.2], atol=1e-12)
        self.assertEqual(model.variables.label(3), 'q3')


class ReadoutExperimentTests(SimpleTestCase):
    def test_noise_free_variables_are_untouched_in_distribution(self):
        experiment = simulate_readout_experiment(4, 50_000, seed=2, noise_levels=[0.0, 0.0, 0.5, 0.0])
        observed = experiment.observed.rows.mean(axis=0)
        ideal = experiment.ideal.rows.mean(axis=0)
        np.testing.assert_allclose(ideal, 0.15, atol=0.01)
        np.testing.assert_allclose(observed[[0, 1, 3]], 0.15, atol=0.01)
        self.assertAlmostEqual(observed[2], 0.5, delta=0.01)

    def test_default_noise_levels(self):
        experiment = simulate_readout_experiment(10, 10, seed=3)
        np.testing.assert_allclose(np.sort(experiment.noise), np.linspace(0.01, 0.2, 10))

    def test_seeded(self):
        a = simulate_readout_experiment(5, 100, seed=4)
        b = simulate_readout_experiment(5, 100, seed=4)
        np.testing.assert_array_equal(a.observed.rows, b.observed.rows)

    def test_noise_shape(self):
        with self.assertRaises(DataError):
            simulate_readout_experiment(4, 10, noise_levels=[0.1, 0.2])
