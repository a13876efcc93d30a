"""
Tests for degree sequences, configuration-model sampling and expansion audits.
"""

import math
import os
import tempfile
import unittest

import networkx as nx
import numpy as np

from polymerdyn.config_model import (
    expansion_audit,
    pairing_probability,
    read_degree_sequence,
    regular_degree_sequence,
    sample_configuration_multigraph,
    sample_simple_graph,
    validate_degree_sequence,
)
from polymerdyn.errors import (
    DegreeSequenceError,
    DisconnectedSetError,
    RejectionSamplingFailed,
)
from polymerdyn.graph_core import SimpleGraph
from polymerdyn.models import DegreeSequence


class TestValidateDegreeSequence(unittest.TestCase):
    """Test case for validate_degree_sequence."""

    def test_k4_sequence(self):
        """Test (3,3,3,3) with d=9: only the max-degree condition fails."""
        report = validate_degree_sequence([3, 3, 3, 3], d=9)
        self.assertTrue(report.min_degree_ok)
        self.assertFalse(report.max_degree_ok)
        self.assertTrue(report.sparsity_ok)
        self.assertTrue(report.even_sum_ok)
        self.assertFalse(report.in_family)
        self.assertEqual(report.failures, ["max_degree"])

    def test_odd_sum_flagged(self):
        """Test that an odd sum is flagged, not raised."""
        report = validate_degree_sequence([3, 3, 3])
        self.assertFalse(report.even_sum_ok)
        self.assertIn("even_sum", report.failures)

    def test_min_degree_flagged(self):
        """Test that degree 2 fails the minimum-degree condition."""
        self.assertFalse(validate_degree_sequence([2, 2, 2, 2]).min_degree_ok)

    def test_sparsity(self):
        """Test the sum-of-squares condition and the model's own d."""
        self.assertFalse(validate_degree_sequence(DegreeSequence(degrees=[3, 3, 3, 3], d=8)).sparsity_ok)
        self.assertTrue(validate_degree_sequence([3] * 4).sparsity_ok)

    def test_regular_sequence(self):
        """Test regular sequence construction."""
        self.assertEqual(regular_degree_sequence(4, 3), [3, 3, 3, 3])
        with self.assertRaises(DegreeSequenceError):
            regular_degree_sequence(5, 3)

    def test_read_degree_sequence(self):
        """Test reading a whitespace-separated file."""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "x.txt")
            with open(path, "w") as f:
                f.write("3 3\n3 3\n")
            self.assertEqual(read_degree_sequence(path), [3, 3, 3, 3])
            with open(path, "w") as f:
                f.write("3 three\n")
            with self.assertRaises(DegreeSequenceError):
                read_degree_sequence(path)
            with self.assertRaises(DegreeSequenceError):
                read_degree_sequence(os.path.join(tmp, "missing.txt"))


class TestConfigurationModel(unittest.TestCase):
    """Test case for the configuration-model samplers."""

    def test_degrees_preserved(self):
        """Test that every sample realises the degree sequence exactly."""
        x = [3, 1, 4, 2, 2, 4]
        for seed in range(20):
            graph = sample_configuration_multigraph(x, seed=seed)
            self.assertEqual(list(graph.degrees), x)
            self.assertEqual(graph.m, sum(x) // 2)

    def test_single_edge(self):
        """Test that (1,1) always gives one edge."""
        self.assertEqual(sample_configuration_multigraph([1, 1], seed=0).edges, ((0, 1),))

    def test_single_loop(self):
        """Test that (2) gives one loop."""
        graph = sample_configuration_multigraph([2], seed=0)
        self.assertEqual(graph.edges, ((0, 0),))
        self.assertEqual(graph.degrees, (2,))

    def test_odd_sum_raises(self):
        """Test that an odd degree sum raises."""
        with self.assertRaises(DegreeSequenceError):
            sample_configuration_multigraph([3, 3, 3], seed=0)

    def test_reproducible(self):
        """Test that the same seed gives the same multigraph."""
        x = regular_degree_sequence(20, 3)
        self.assertEqual(sample_configuration_multigraph(x, seed=7), sample_configuration_multigraph(x, seed=7))

    def test_pair_multiplicity_mean(self):
        """Test that the mean multiplicity of {i, j} in K4's sequence is 9/11."""
        x = [3, 3, 3, 3]
        self.assertAlmostEqual(pairing_probability(x, 0, 1), 9 / 11)
        self.assertAlmostEqual(pairing_probability(x, 0, 0), 3 / 11)
        rng = np.random.default_rng(2024)
        draws = 20000
        counts = np.zeros((draws, 6))
        pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        for t in range(draws):
            graph = sample_configuration_multigraph(x, rng)
            for k, (i, j) in enumerate(pairs):
                counts[t, k] = graph.multiplicity(i, j)
        for k in range(len(pairs)):
            mean = counts[:, k].mean()
            stderr = counts[:, k].std() / math.sqrt(draws)
            self.assertLess(abs(mean - 9 / 11), 4 * stderr)

    def test_simple_k4(self):
        """Test that a simple sample of (3,3,3,3) is K4."""
        k4 = SimpleGraph(4, nx.complete_graph(4).edges())
        for seed in range(5):
            self.assertEqual(sample_simple_graph([3, 3, 3, 3], seed=seed), k4)

    def test_rejection_failure(self):
        """Test that (2) never yields a simple graph."""
        with self.assertRaises(RejectionSamplingFailed):
            sample_simple_graph([2], seed=0, max_attempts=100)


class TestExpansionAudit(unittest.TestCase):
    """Test case for expansion_audit."""

    def test_k4_passes(self):
        """Test that K4 passes every check with alpha 1/2."""
        k4 = SimpleGraph(4, nx.complete_graph(4).edges())
        report = expansion_audit(k4, 0.5, 2, 8)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.checks["total_degree"].worst.ratio, 2 / 3)
        self.assertEqual(report.checks["tree_excess"].applicable, 0)
        self.assertEqual(report.sets_checked, 10)

    def test_path_fails_total_degree(self):
        """Test that P10 fails total-degree expansion at its first half."""
        path = SimpleGraph(10, nx.path_graph(10).edges())
        report = expansion_audit(path, 0.3, 5, 12)
        check = report.checks["total_degree"]
        self.assertFalse(check.passed)
        self.assertFalse(report.passed)
        self.assertEqual(check.worst.vertices, [0, 1, 2, 3, 4])
        self.assertEqual(check.worst.boundary_edges, 1)
        self.assertEqual(check.worst.total_degree, 9)
        self.assertAlmostEqual(check.worst.ratio, 1 / 9)
        self.assertFalse(report.checks["small_set"].passed)

    def test_disconnected_raises(self):
        """Test that a disconnected host is refused."""
        with self.assertRaises(DisconnectedSetError):
            expansion_audit(SimpleGraph(4, [(0, 1), (2, 3)]), 0.5)

    def test_random_cubic_graphs_pass_small_set_check(self):
        """Test the small-set property on random cubic graphs."""
        passed = 0
        for seed in range(5):
            graph = sample_simple_graph(regular_degree_sequence(50, 3), seed=seed)
            if not nx.is_connected(nx.Graph(list(graph.edges))):
                continue
            report = expansion_audit(graph, 0.1, 6, 18)
            passed += report.checks["small_set"].passed
        self.assertGreaterEqual(passed, 4)


if __name__ == "__main__":
    unittest.main()
