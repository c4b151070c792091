import networkx as nx
import numpy as np
from django.test import SimpleTestCase

from divergences.exceptions import NotChordalError, StructureError
from divergences.graphs import (
    ChordalGraph, VariableTable, build_clique_tree, computation_graph, graph_from_cliques, induced_subgraph,
    is_chordal, maximal_cliques,
)

# Clique structure of a 9-variable chordal graph (ids 0..8)
NINE_CLIQUES = [(1, 2, 4), (0, 1), (2, 3), (4, 7), (2, 5), (7, 8), (5, 6)]


class ChordalityTests(SimpleTestCase):
    def test_triangle(self):
        self.assertTrue(is_chordal(nx.complete_graph(3)))

    def test_four_cycle(self):
        self.assertFalse(is_chordal(nx.cycle_graph(4)))
        with self.assertRaises(NotChordalError):
            ChordalGraph.from_graph(nx.cycle_graph(4))

    def test_clique_tree_graph(self):
        self.assertTrue(is_chordal(graph_from_cliques(range(9), NINE_CLIQUES)))

    def test_self_loop_rejected(self):
        g = nx.Graph([(0, 0), (0, 1)])
        with self.assertRaises(StructureError):
            is_chordal(g)

    def test_agrees_with_networkx(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            g = nx.gnp_random_graph(8, float(rng.uniform(0.2, 0.7)), seed=int(rng.integers(1 << 30)))
            self.assertEqual(is_chordal(g), nx.is_chordal(g))


class ComputationGraphTests(SimpleTestCase):
    def test_identical_triangles(self):
        g = computation_graph([nx.complete_graph(3), nx.complete_graph(3)])
        self.assertEqual(sorted(map(sorted, g.graph.edges)), [[0, 1], [0, 2], [1, 2]])

    def test_four_cycle_gets_one_chord(self):
        g = computation_graph([nx.cycle_graph(4)])
        self.assertTrue(is_chordal(g.graph))
        self.assertEqual(g.graph.number_of_edges(), 5)

    def test_chordal_input_has_no_fill(self):
        tree = nx.Graph([(0, 2), (1, 2), (2, 3), (3, 4), (3, 5)])
        g = computation_graph([tree])
        self.assertEqual(set(map(frozenset, g.graph.edges)), set(map(frozenset, tree.edges)))

    def test_supergraph_of_every_input(self):
        a = nx.Graph([(0, 1), (1, 2)])
        b = nx.Graph([(0, 2), (2, 3)])
        g = computation_graph([a, b])
        for edge in [*a.edges, *b.edges]:
            self.assertTrue(g.graph.has_edge(*edge))
        self.assertTrue(is_chordal(g.graph))

    def test_explicit_order_must_cover_vertices(self):
        with self.assertRaises(StructureError):
            computation_graph([nx.path_graph(3)], heuristic=[0, 1])


class MaximalCliqueTests(SimpleTestCase):
    def test_triangle(self):
        self.assertEqual(maximal_cliques(ChordalGraph.from_graph(nx.complete_graph(3))), [(0, 1, 2)])

    def test_after_marginalizing_a_hub(self):
        g = nx.Graph([(0, 1), (0, 3), (1, 3), (3, 4), (3, 5)])
        self.assertEqual(ChordalGraph.from_graph(g).cliques, [(0, 1, 3), (3, 4), (3, 5)])

    def test_isolated_vertex(self):
        g = nx.Graph()
        g.add_node(4)
        self.assertEqual(ChordalGraph.from_graph(g).cliques, [(4,)])

    def test_matches_networkx_on_chordal_graphs(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            g = nx.gnp_random_graph(9, 0.4, seed=int(rng.integers(1 << 30)))
            chordal = computation_graph([g])
            expected = sorted(tuple(sorted(c)) for c in nx.find_cliques(chordal.graph))
            self.assertEqual(chordal.cliques, expected)


class CliqueTreeTests(SimpleTestCase):
    def test_two_cliques(self):
        tree = ChordalGraph.from_cliques(range(4), [(0, 1, 2), (2, 3)]).clique_tree
        self.assertEqual(tree.edges, ((0, 1, (2,)),))

    def test_nine_variable_tree(self):
        tree = ChordalGraph.from_cliques(range(9), NINE_CLIQUES).clique_tree
        self.assertEqual(sorted(tree.cliques), sorted(NINE_CLIQUES))
        self.assertEqual(sorted(sep for _, _, sep in tree.edges), [(1,), (2,), (2,), (4,), (5,), (7,)])
        self.assertTrue(tree.has_running_intersection())

    def test_single_clique(self):
        tree = build_clique_tree(ChordalGraph.from_graph(nx.complete_graph(3)))
        self.assertEqual(tree.edges, ())

    def test_disconnected_components_are_joined(self):
        tree = ChordalGraph.from_cliques(range(4), [(0, 1), (2, 3)]).clique_tree
        self.assertEqual(tree.edges, ((0, 1, ()),))

    def test_components_are_chained(self):
        tree = ChordalGraph.from_cliques(range(8), [(0, 1), (2, 3), (4, 5), (5, 6), (7,)]).clique_tree
        self.assertEqual(tree.cliques, ((0, 1), (2, 3), (4, 5), (5, 6), (7,)))
        self.assertEqual(tree.edges, ((2, 3, (5,)), (0, 1, ()), (1, 2, ()), (2, 4, ())))
        self.assertLessEqual(max(len(n) for n in tree.neighbors.values()), 3)

    def test_containing_picks_the_first_clique(self):
        tree = ChordalGraph.from_cliques(range(4), [(0, 1, 2), (1, 2, 3)]).clique_tree
        self.assertEqual(tree.containing([1, 2]), 0)
        self.assertEqual(tree.containing([3]), 1)
        self.assertEqual(tree.containing(()), 0)
        self.assertIsNone(tree.containing([0, 3]))

    def test_running_intersection_on_random_graphs(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            g = nx.gnp_random_graph(10, 0.3, seed=int(rng.integers(1 << 30)))
            tree = computation_graph([g]).clique_tree
            self.assertEqual(len(tree.edges), len(tree.cliques) - 1)
            self.assertTrue(tree.has_running_intersection())


class InducedSubgraphTests(SimpleTestCase):
    def test_triangle_to_edge(self):
        g = induced_subgraph(nx.complete_graph(3), [0, 2])
        self.assertEqual(list(g.edges), [(0, 2)])

    def test_empty(self):
        self.assertEqual(induced_subgraph(nx.complete_graph(3), []).number_of_nodes(), 0)

    def test_restriction_of_nine_variable_groups(self):
        groups = [(7, 8), (0, 1, 2, 4, 7), (2, 5, 6), (2, 3)]
        g = induced_subgraph(graph_from_cliques((), groups), [0, 2, 3, 6, 7])
        self.assertEqual(ChordalGraph.from_graph(g).cliques, [(0, 2, 7), (2, 3), (2, 6)])


class VariableTableTests(SimpleTestCase):
    def test_rejects_small_cardinality(self):
        with self.assertRaises(StructureError):
            VariableTable.from_cardinalities([2, 1])

    def test_labels(self):
        table = VariableTable.from_cardinalities([2, 3], ['a', None])
        self.assertEqual(table.label(0), 'a')
        self.assertEqual(table.label(1), '1')
        self.assertEqual(table.id_of('a'), 0)
        self.assertEqual(table.size(), 6)
        with self.assertRaises(StructureError):
            table.id_of('b')
