import math

import numpy as np
from django.test import SimpleTestCase, tag

from blockmcmc.example_models import (
    EXAMPLES,
    build_example,
    compound_symmetric_mvn,
    exponential_decay_mvn,
    fixed_correlation_blocks,
    independent_gammas,
    independent_normals,
    random_effects_model,
    spatial_model,
    state_space_model,
    varying_correlation_blocks,
)
from blockmcmc.exceptions import InvalidParameter
from blockmcmc.samplers import SamplerPlan, run_mcmc

SMALL = {
    'fixed-rho': {'sizes': [4, 2]},
    'varying-rho': {'n': 2},
    'exp-decay': {'d': 4},
    'normals': {'d': 3},
    'gammas': {'d': 3},
    'mvn': {'d': 3},
    'random-effects': {'per_group': 3},
    'state-space-independent': {'length': 10},
    'state-space-correlated': {'length': 10},
    'spatial': {'sites': 8},
}


def covariance_of(graph, node='x'):
    return np.array(next(n for n in graph.description['nodes'] if n['name'] == node)['params']['cov'])


class ToyModelTests(SimpleTestCase):
    def test_fixed_correlation_blocks(self):
        graph = fixed_correlation_blocks()
        self.assertEqual(graph.d, 64)
        self.assertEqual(graph.name, 'fixed-rho-0.8')
        cov = covariance_of(graph, 'group1')
        self.assertEqual(cov.shape, (32, 32))
        self.assertEqual(cov[0, 1], 0.8)
        self.assertEqual(graph.slot_names[-2:], ['free1', 'free2'])

    def test_varying_correlation_blocks(self):
        self.assertEqual(varying_correlation_blocks(2).d, 20)
        graph = varying_correlation_blocks(5)
        self.assertEqual(graph.d, 50)
        self.assertAlmostEqual(covariance_of(graph, 'rho7')[0, 4], 0.7)

    def test_exponential_decay(self):
        cov = covariance_of(exponential_decay_mvn(0.5, 4))
        self.assertEqual(cov[0, 3], 0.125)
        self.assertEqual(cov[2, 1], 0.5)
        self.assertEqual(exponential_decay_mvn(0.5, 1).d, 1)

    def test_timing_generators(self):
        self.assertEqual(independent_normals(25).d, 25)
        self.assertEqual(independent_gammas(10).slot_names[0], 'x1')
        self.assertEqual(compound_symmetric_mvn(10, 0.5).d, 10)
        self.assertEqual(covariance_of(compound_symmetric_mvn(4, 0.5))[3, 0], 0.5)

    def test_correlation_out_of_range(self):
        for build in (
            lambda: fixed_correlation_blocks(1.0),
            lambda: exponential_decay_mvn(-1.0, 3),
            lambda: compound_symmetric_mvn(3, 1.5),
            lambda: varying_correlation_blocks(1),
        ):
            with self.assertRaises(InvalidParameter):
                build()


class AppliedModelTests(SimpleTestCase):
    def test_random_effects(self):
        graph, informed = random_effects_model()
        self.assertEqual(graph.d, 36)
        self.assertEqual(graph.slot_names[:4], ['alpha_1', 'beta_1', 'alpha_2', 'beta_2'])
        self.assertEqual(informed.block_sizes, [2, 2])
        self.assertEqual(informed.groups[0], (0, 1))
        self.assertTrue(math.isfinite(graph.total_log_density()))

    def test_state_space_dimensions(self):
        graph, informed = state_space_model('correlated', length=100)
        self.assertEqual(graph.d, 104)
        self.assertEqual(informed.groups[0], (0, 1))
        graph, informed = state_space_model('independent', length=100)
        self.assertEqual(graph.d, 104)
        self.assertIsNone(informed)

    def test_parameterizations_agree_without_autocorrelation(self):
        correlated, _ = state_space_model('correlated', length=20, seed=3)
        independent, _ = state_space_model('independent', length=20, seed=3)
        theta = correlated.get_theta()
        theta[1] = 0.0
        correlated.set_theta(theta)
        independent.set_theta(theta)
        self.assertAlmostEqual(correlated.total_log_density(), independent.total_log_density())

    def test_unknown_parameterization(self):
        with self.assertRaises(InvalidParameter):
            state_space_model('centred')

    def test_spatial(self):
        graph = spatial_model(sites=20)
        self.assertEqual(graph.d, 23)
        self.assertEqual(graph.slot_names[:4], ['mu', 'sigma', 'rho', 'g[0]'])
        self.assertTrue(math.isfinite(graph.total_log_density()))

    def test_spatial_with_a_huge_range_stays_finite(self):
        graph = spatial_model(sites=10, initial_range=1e6)
        self.assertTrue(math.isfinite(graph.total_log_density()))

    def test_reproducible_from_seed(self):
        first, _ = build_example('spatial', sites=12, seed=4)
        second, _ = build_example('spatial', sites=12, seed=4)
        other, _ = build_example('spatial', sites=12, seed=5)
        self.assertEqual(first.digest, second.digest)
        self.assertNotEqual(first.digest, other.digest)


class RegistryTests(SimpleTestCase):
    def test_every_example_builds_and_samples(self):
        self.assertEqual(set(SMALL), set(EXAMPLES))
        for name, params in SMALL.items():
            with self.subTest(name):
                graph, informed = build_example(name, **params)
                plans = [SamplerPlan.all_scalar(graph.d), SamplerPlan.all_blocked(graph.d)]
                if informed is not None:
                    plans.append(informed)
                for plan in plans:
                    chain = run_mcmc(graph, plan, 50, seed=0)
                    self.assertTrue(np.all(np.isfinite(chain.samples)))

    def test_unknown_example(self):
        with self.assertRaises(InvalidParameter):
            build_example('nope')

    def test_unknown_parameter(self):
        with self.assertRaisesMessage(InvalidParameter, 'takes'):
            build_example('normals', rho=0.5)

    def test_defaults(self):
        graph, informed = build_example('varying-rho')
        self.assertEqual(graph.d, 20)
        self.assertIsNone(informed)


@tag('slow')
class PosteriorRecoveryTests(SimpleTestCase):
    def test_blocked_sampling_recovers_the_covariance(self):
        graph = exponential_decay_mvn(0.5, 3)
        chain = run_mcmc(graph, SamplerPlan.all_blocked(3), 60_000, seed=1)
        covariance = np.cov(chain.samples[10_000:].T)
        np.testing.assert_allclose(covariance, covariance_of(graph), atol=0.08)
