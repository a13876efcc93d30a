"""
Tests for the edge-based polymer dynamics and the Potts sampler.
"""

import math
import unittest
from collections import Counter
from typing import Optional

import numpy as np

from polymerdyn.dynamics import (
    ChainState,
    EdgePolymerSampler,
    PolymerDynamics,
    dynamics_step,
    mixing_time,
    sample_nu_e,
    sample_polymer_gibbs,
    sample_potts,
    sample_truncation_level,
)
from polymerdyn.errors import ConsistencyError, ParameterError, SamplingConditionViolation
from polymerdyn.graph_core import SimpleGraph
from polymerdyn.models import DynamicsConfig, PottsParams
from polymerdyn.oracle import (
    empirical_distribution,
    exact_gibbs,
    exact_mono_edge_distribution,
    exact_nu_e,
    exact_potts_distribution,
    tv_distance,
)
from polymerdyn.polymer import Polymer, PolymerConfiguration, PolymerModel
from polymerdyn.potts import PottsPolymerModel

P3 = SimpleGraph(3, [(0, 1), (1, 2)])
K2 = SimpleGraph(2, [(0, 1)])
C5 = SimpleGraph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])


def path_model(beta: float = 3.0, q: int = 2) -> PottsPolymerModel:
    return PottsPolymerModel(P3, PottsParams(q=q, beta=beta))


class FixedSampler:
    """Stands in for EdgePolymerSampler, always proposing one polymer."""

    def __init__(self, host: SimpleGraph, polymer: Optional[Polymer]):
        self.host = host
        self.polymer = polymer

    def sample(self, edge, rng):
        return self.polymer, 0


class TestTruncationLevel(unittest.TestCase):
    """Test case for sample_truncation_level."""

    def test_tail_law(self):
        """Test Pr(ℓ >= k) = exp(-r k) empirically."""
        rng = np.random.default_rng(11)
        draws = 100000
        levels = np.asarray([sample_truncation_level(1.0, rng) for _ in range(draws)])
        for k in (1, 2, 3):
            expected = math.exp(-k)
            stderr = math.sqrt(expected * (1 - expected) / draws)
            self.assertLess(abs(np.mean(levels >= k) - expected), 4 * stderr)

    def test_huge_rate(self):
        """Test that a huge rate almost always gives level 0."""
        rng = np.random.default_rng(0)
        self.assertEqual({sample_truncation_level(1e9, rng) for _ in range(1000)}, {0})

    def test_rate_must_be_positive(self):
        """Test the rate check."""
        with self.assertRaises(ParameterError):
            sample_truncation_level(0.0, np.random.default_rng(0))


class TestEdgePolymerSampler(unittest.TestCase):
    """Test case for the ν_e sampler."""

    def test_matches_exact_nu_e(self):
        """Test the empirical law of ν_e on P3 against the oracle."""
        model = path_model()
        sampler = EdgePolymerSampler(model)
        rng = np.random.default_rng(5)
        for edge in P3.edges:
            exact = exact_nu_e(model, edge)
            draws = [sampler.sample(edge, rng)[0] for _ in range(50000)]
            empirical = empirical_distribution(draws, exact.outcomes)
            self.assertLess(tv_distance(exact, empirical), 0.02)

    def test_family_mass_and_weights(self):
        """Test that family increments are w(γ) exp(r deg)."""
        model = path_model()
        sampler = EdgePolymerSampler(model)
        family = sampler.family((0, 1), 4)
        self.assertEqual(len(family.polymers), 2)
        increments = np.diff(np.concatenate([[0.0], family.cumulative]))
        expected = np.exp(family.log_weights + sampler.rate * family.degrees)
        np.testing.assert_allclose(increments, expected)
        self.assertLess(family.mass, 1.0)

    def test_heavy_weights_violate_condition(self):
        """Test that a family with mass above one raises."""
        model = PolymerModel(P3, 2, [(0,)] * 3, allowed=lambda g: len(g) == 1, log_weight=lambda g: 0.0)
        sampler = EdgePolymerSampler(model, 1.0)
        with self.assertRaises(SamplingConditionViolation):
            sampler.family((0, 1), 1)

    def test_no_allowed_polymers(self):
        """Test that ν_e is ∅ when no polymer is allowed."""
        model = PottsPolymerModel(K2, PottsParams(q=3, beta=1.0))
        for seed in range(20):
            self.assertIsNone(sample_nu_e(model, (0, 1), seed=seed))

    def test_rate_required(self):
        """Test that a model without a rate needs one passed in."""
        model = PolymerModel(P3, 2, [(0,)] * 3, log_weight=lambda g: -10.0)
        with self.assertRaises(ParameterError):
            EdgePolymerSampler(model)


class TestDynamicsStep(unittest.TestCase):
    """Test case for dynamics_step and ChainState."""

    def setUp(self):
        """Build the P3 model."""
        self.model = path_model()
        self.rng = np.random.default_rng(0)

    def test_removal(self):
        """Test that a removal update drops the polymer touching the edge."""
        state = ChainState(PolymerConfiguration.of([Polymer((1,), (1,))]))
        dynamics_step(EdgePolymerSampler(self.model), state, self.rng, edge=(0, 1), remove=True)
        self.assertEqual(state.configuration(), PolymerConfiguration())
        self.assertEqual(state.updates, 1)

    def test_removal_without_polymer(self):
        """Test that removal on an empty edge is a no-op."""
        state = ChainState(PolymerConfiguration.of([Polymer((0,), (1,))]))
        dynamics_step(EdgePolymerSampler(self.model), state, self.rng, edge=(1, 2), remove=True)
        self.assertEqual(len(state.configuration()), 1)

    def test_incompatible_insertion_rejected(self):
        """Test that an adjacent proposal leaves the state unchanged."""
        state = ChainState(PolymerConfiguration.of([Polymer((0,), (1,))]))
        sampler = FixedSampler(P3, Polymer((1,), (1,)))
        dynamics_step(sampler, state, self.rng, edge=(1, 2), remove=False)
        self.assertEqual(state.configuration(), PolymerConfiguration.of([Polymer((0,), (1,))]))

    def test_compatible_insertion_accepted(self):
        """Test that a distance-2 proposal is added."""
        state = ChainState(PolymerConfiguration.of([Polymer((0,), (1,))]))
        sampler = FixedSampler(P3, Polymer((2,), (1,)))
        dynamics_step(sampler, state, self.rng, edge=(1, 2), remove=False)
        self.assertEqual(len(state.configuration()), 2)
        state.check_index(P3)

    def test_index_stays_consistent(self):
        """Test the occupancy index over a long run on C5."""
        model = PottsPolymerModel(C5, PottsParams(q=3, beta=4.0, alpha=0.5))
        state = PolymerDynamics(model).run(2000, np.random.default_rng(9))
        state.check_index(C5)
        self.assertEqual(state.updates, 2000)

    def test_broken_index_detected(self):
        """Test that check_index reports adjacent polymers."""
        state = ChainState()
        state.add(Polymer((0,), (1,)))
        state.add(Polymer((1,), (1,)))
        with self.assertRaises(ConsistencyError):
            state.check_index(P3)


class TestMixingTime(unittest.TestCase):
    """Test case for mixing_time."""

    def test_value(self):
        """Test T for m=10, n=8, ε=0.01."""
        self.assertEqual(mixing_time(10, 8, 0.01), 234)

    def test_monotone_in_eps(self):
        """Test that halving ε never shortens the run."""
        for eps in (0.5, 0.1, 0.01):
            self.assertGreaterEqual(mixing_time(10, 8, eps / 2), mixing_time(10, 8, eps))

    def test_edge_cases(self):
        """Test m=0 and invalid inputs."""
        self.assertEqual(mixing_time(0, 5, 0.1), 0)
        with self.assertRaises(ParameterError):
            mixing_time(3, 3, 0.0)
        with self.assertRaises(ParameterError):
            mixing_time(3, 3, 0.1, theta=1.0)


class TestPolymerDynamics(unittest.TestCase):
    """Test case for PolymerDynamics sampling modes."""

    def test_las_vegas_distribution(self):
        """Test the output law on P3 against the Gibbs measure."""
        model = path_model()
        dynamics = PolymerDynamics(model)
        rng = np.random.default_rng(2)
        samples = [dynamics.sample(0.05, rng).configuration for _ in range(4000)]
        exact = exact_gibbs(model)
        self.assertEqual(len(exact), 5)
        self.assertLess(tv_distance(exact, empirical_distribution(samples, exact.outcomes)), 0.05)

    def test_strict_budget_exhaustion(self):
        """Test that a tiny work budget returns ∅ after every attempt."""
        model = PottsPolymerModel(C5, PottsParams(q=3, beta=4.0, alpha=0.5))
        config = DynamicsConfig(mode="strict_budget", c1=1, c2=4)
        result = PolymerDynamics(model, config).sample(0.1, 4)
        self.assertFalse(result.completed)
        self.assertEqual(result.configuration, PolymerConfiguration())
        self.assertEqual(result.attempts, math.ceil(math.log(2 / 0.1)))

    def test_strict_budget_completes(self):
        """Test that the default constants let strict runs finish."""
        config = DynamicsConfig(mode="strict_budget")
        result = PolymerDynamics(path_model(), config).sample(0.1, 4)
        self.assertTrue(result.completed)
        self.assertEqual(result.attempts, 1)
        self.assertEqual(result.updates, config.c2 * 2 * math.ceil(math.log(2 / 0.1)))

    def test_gibbs_without_polymers(self):
        """Test that a model with no allowed polymers yields ∅."""
        model = PottsPolymerModel(K2, PottsParams(q=3, beta=1.0))
        self.assertEqual(sample_polymer_gibbs(model, 0.1, seed=0), PolymerConfiguration())

    def test_reproducible(self):
        """Test that a seed fixes the output."""
        model = PottsPolymerModel(C5, PottsParams(q=3, beta=4.0, alpha=0.5))
        first = sample_polymer_gibbs(model, 0.1, seed=123)
        second = sample_polymer_gibbs(model, 0.1, seed=123)
        self.assertEqual(first, second)


class TestSamplePotts(unittest.TestCase):
    """Test case for sample_potts."""

    def test_k2_colours_uniform(self):
        """Test that K2 samples are constant with a uniform colour."""
        params = PottsParams(q=3, beta=3.0)
        rng = np.random.default_rng(8)
        colours = Counter()
        for _ in range(3000):
            sample = sample_potts(K2, params, 0.2, rng)
            self.assertFalse(sample.exact)
            self.assertEqual(sample.colouring[0], sample.colouring[1])
            colours[sample.colouring[0]] += 1
        for colour in range(3):
            self.assertLess(abs(colours[colour] - 1000), 100)

    def test_path_mono_edge_law(self):
        """Test the law of m(σ) on P3 against the exact Potts law."""
        params = PottsParams(q=3, beta=3.0)
        rng = np.random.default_rng(21)
        mono = [sample_potts(P3, params, 0.1, rng).mono_edges for _ in range(3000)]
        exact = exact_mono_edge_distribution(P3, 3, 3.0)
        self.assertLess(tv_distance(exact, empirical_distribution(mono, exact.outcomes)), 0.1)

    def test_colouring_law_on_small_hosts(self):
        """Test the full colouring law on K3, C4 and K4 within ε = 0.1 in total variation."""
        hosts = [
            SimpleGraph(3, [(0, 1), (0, 2), (1, 2)]),
            SimpleGraph(4, [(0, 1), (1, 2), (2, 3), (0, 3)]),
            SimpleGraph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
        ]
        params = PottsParams(q=3, beta=3.0)
        rng = np.random.default_rng(34)
        for host in hosts:
            exact = exact_potts_distribution(host, 3, 3.0)
            # 2000 draws leave sampling noise near 0.03
            draws = [tuple(sample_potts(host, params, 0.1, rng).colouring) for _ in range(2000)]
            self.assertLessEqual(tv_distance(exact, empirical_distribution(draws, exact.outcomes)), 0.1)

    def test_exact_branch(self):
        """Test that ε below e^{-n} samples exactly."""
        sample = sample_potts(P3, PottsParams(q=3, beta=1.0), math.exp(-3) / 2, seed=1)
        self.assertTrue(sample.exact)
        self.assertEqual(sample.updates, 0)
        self.assertEqual(len(sample.colouring), 3)

    def test_disconnected_host(self):
        """Test component-wise sampling."""
        host = SimpleGraph(5, [(0, 1), (2, 3)])
        sample = sample_potts(host, PottsParams(q=3, beta=3.0), 0.9, seed=3)
        self.assertEqual(len(sample.colouring), 5)
        self.assertEqual(sample.colouring[0], sample.colouring[1])
        self.assertEqual(sample.colouring[2], sample.colouring[3])
        self.assertFalse(sample.exact)
        self.assertEqual(sample.seed, 3)

    def test_reproducible(self):
        """Test that the same seed gives the same colouring."""
        params = PottsParams(q=3, beta=4.0, alpha=0.5)
        self.assertEqual(
            sample_potts(C5, params, 0.1, seed=77).colouring,
            sample_potts(C5, params, 0.1, seed=77).colouring,
        )

    def test_eps_checked(self):
        """Test the ε range."""
        with self.assertRaises(ParameterError):
            sample_potts(P3, PottsParams(q=3, beta=3.0), 1.0)


if __name__ == "__main__":
    unittest.main()
