"""Generators for the benchmark model suite.

Toy models put compound-symmetric or exponentially decaying multivariate
normal priors on the parameters and have no likelihood, so their posterior is
known exactly. The applied models (random effects, linear Gaussian state
space, spatial Poisson) draw synthetic data from fixed generating values at
the given seed. Positive parameters get Gamma(2, 0.5) priors, unconstrained
ones Normal(0, 10).
"""
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial.distance import pdist, squareform

from blockmcmc.exceptions import InvalidParameter
from blockmcmc.graph import build_graph
from blockmcmc.samplers import SamplerPlan

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZES = (32, 16, 8, 4, 2)
POSITIVE_PRIOR = {'shape': 2.0, 'rate': 0.5}
FLAT_NORMAL_SD = 10.0


def _normal(name, mean=0.0, sd=1.0, kind='parameter', **extra):
    return {'name': name, 'kind': kind, 'family': 'normal', 'params': {'mean': mean, 'sd': sd}, **extra}


def _gamma(name, shape=POSITIVE_PRIOR['shape'], rate=POSITIVE_PRIOR['rate'], **extra):
    return {'name': name, 'kind': 'parameter', 'family': 'gamma', 'params': {'shape': shape, 'rate': rate}, **extra}


def _mvnorm(name, mean, cov, **extra):
    return {'name': name, 'kind': 'parameter', 'family': 'mvnorm', 'params': {'mean': mean, 'cov': cov}, **extra}


def _affine(name, inputs, coefficients, offset=0.0):
    return {
        'name': name, 'kind': 'deterministic', 'op': 'affine', 'inputs': inputs,
        'params': {'coefficients': coefficients, 'offset': offset},
    }


def _check_rho(rho):
    if not -1.0 < rho < 1.0:
        raise InvalidParameter(f'Correlation must lie in (-1, 1), got {rho}')


def compound_symmetric(size, rho):
    cov = np.full((size, size), float(rho))
    np.fill_diagonal(cov, 1.0)
    return cov.tolist()


def _correlated_group(name, size, rho):
    if size == 1:
        return _normal(name)
    return _mvnorm(name, [0.0] * size, compound_symmetric(size, rho))


# Toy correlation structures

def fixed_correlation_blocks(rho=0.8, sizes=DEFAULT_BLOCK_SIZES, singletons=2):
    """Groups of the given sizes at a common correlation, plus independent scalars."""
    _check_rho(rho)
    nodes = [_correlated_group(f'group{k}', size, rho) for k, size in enumerate(sizes, start=1)]
    nodes += [_normal(f'free{k}') for k in range(1, singletons + 1)]
    return build_graph({'name': f'fixed-rho-{rho:g}', 'nodes': nodes})


def varying_correlation_blocks(n=2):
    """Nine groups of size ``n`` at correlations 0.1 ... 0.9 plus ``n`` independent scalars."""
    if n < 2:
        raise InvalidParameter(f'Group size must be at least 2, got {n}')
    nodes = [_correlated_group(f'rho{k}', n, k / 10) for k in range(1, 10)]
    nodes += [_normal(f'free{k}') for k in range(1, n + 1)]
    return build_graph({'name': f'varying-rho-{n}', 'nodes': nodes})


def exponential_decay_mvn(rho=0.5, d=10):
    """One multivariate normal with correlations ``rho ** |i - j|``."""
    _check_rho(rho)
    if d == 1:
        nodes = [_normal('x')]
    else:
        lags = np.abs(np.subtract.outer(np.arange(d), np.arange(d)))
        nodes = [_mvnorm('x', [0.0] * d, np.power(float(rho), lags).tolist())]
    return build_graph({'name': f'exp-decay-{rho:g}-{d}', 'nodes': nodes})


# Timing study generators

def independent_normals(d=10):
    return build_graph({'name': f'normals-{d}', 'nodes': [_normal(f'x{k}') for k in range(1, d + 1)]})


def independent_gammas(d=10):
    nodes = [_gamma(f'x{k}', shape=2.0, rate=1.0) for k in range(1, d + 1)]
    return build_graph({'name': f'gammas-{d}', 'nodes': nodes})


def compound_symmetric_mvn(d=10, rho=0.5):
    _check_rho(rho)
    nodes = [_normal('x')] if d == 1 else [_mvnorm('x', [0.0] * d, compound_symmetric(d, rho))]
    return build_graph({'name': f'mvn-{d}', 'nodes': nodes})


# Applied models with synthetic data

# Generating (alpha, beta) per group, cycled when there are more groups.
RANDOM_EFFECTS_TRUTH = ((8.0, 2.0), (2.0, 2.0))


def random_effects_model(groups=2, per_group=16, seed=0):
    """Beta-binomial random effects; the informed plan blocks each (alpha_i, beta_i) pair."""
    if groups < 1 or per_group < 1:
        raise InvalidParameter('groups and per_group must be at least 1')
    rng = np.random.default_rng(seed)
    hyper, effects, data = [], [], []
    for i in range(1, groups + 1):
        a, b = RANDOM_EFFECTS_TRUTH[(i - 1) % len(RANDOM_EFFECTS_TRUTH)]
        hyper += [_gamma(f'alpha_{i}'), _gamma(f'beta_{i}')]
        for j in range(1, per_group + 1):
            size = int(rng.integers(5, 15))
            y = int(rng.binomial(size, rng.beta(a, b)))
            effects.append({
                'name': f'p_{i}_{j}', 'kind': 'parameter', 'family': 'beta',
                'params': {'a': f'alpha_{i}', 'b': f'beta_{i}'},
                'value': (y + 0.5) / (size + 1.0),
            })
            data.append({
                'name': f'y_{i}_{j}', 'kind': 'data', 'family': 'binomial',
                'params': {'size': size, 'prob': f'p_{i}_{j}'}, 'value': y,
            })
    graph = build_graph({'name': 'random-effects', 'nodes': hyper + effects + data})
    informed = SamplerPlan.from_names(
        [[f'alpha_{i}', f'beta_{i}'] for i in range(1, groups + 1)]
        + [[name] for name in graph.slot_names if name.startswith('p_')],
        graph.slot_names,
    )
    return graph, informed


STATE_SPACE_TRUTH = {'mean': 2.0, 'autocorrelation': 0.8, 'process_sd': 1.0, 'observation_sd': 0.5}
PARAMETERIZATIONS = ('independent', 'correlated')


def state_space_observations(length, seed, truth=STATE_SPACE_TRUTH):
    rng = np.random.default_rng(seed)
    m, b = truth['mean'], truth['autocorrelation']
    x = np.empty(length)
    x[0] = m + truth['process_sd'] * rng.standard_normal()
    for t in range(1, length):
        x[t] = m + b * (x[t - 1] - m) + truth['process_sd'] * rng.standard_normal()
    return x + truth['observation_sd'] * rng.standard_normal(length)


def state_space_model(parameterization='correlated', length=100, seed=0):
    """Latent AR(1) states observed with Gaussian noise.

    The correlated parameterization has latent means ``a + b * x[t-1]``; the
    independent one ``m + b * (x[t-1] - m)``. Only the correlated one comes
    with an informed plan, blocking ``a`` and ``b``.
    """
    if parameterization not in PARAMETERIZATIONS:
        raise InvalidParameter(f'parameterization must be one of {", ".join(PARAMETERIZATIONS)}')
    if length < 2:
        raise InvalidParameter(f'length must be at least 2, got {length}')
    y = state_space_observations(length, seed)
    level = 'a' if parameterization == 'correlated' else 'm'
    nodes = [
        _normal(level, 0.0, FLAT_NORMAL_SD),
        _normal('b', 0.0, FLAT_NORMAL_SD),
        _gamma('sigma_p', value=1.0),
        _gamma('sigma_o', value=1.0),
    ]
    if parameterization == 'independent':
        nodes.append(_affine('one_minus_b', ['b'], [-1.0], 1.0))
    nodes.append(_normal('x_1', level, 'sigma_p', value=float(y[0])))
    for t in range(2, length + 1):
        if parameterization == 'correlated':
            nodes.append(_affine(f'mu_{t}', [f'x_{t - 1}'], ['b'], 'a'))
        else:
            nodes.append(_affine(f'mu_{t}', ['m', f'x_{t - 1}'], ['one_minus_b', 'b']))
        nodes.append(_normal(f'x_{t}', f'mu_{t}', 'sigma_p', value=float(y[t - 1])))
    for t in range(1, length + 1):
        nodes.append(_normal(f'y_{t}', f'x_{t}', 'sigma_o', kind='data', value=float(y[t - 1])))
    graph = build_graph({'name': f'state-space-{parameterization}', 'nodes': nodes})
    informed = None
    if parameterization == 'correlated':
        informed = SamplerPlan.from_names(
            [['a', 'b']] + [[name] for name in graph.slot_names if name not in ('a', 'b')],
            graph.slot_names,
        )
    return graph, informed


SPATIAL_TRUTH = {'mu': 1.0, 'sigma': 1.0, 'range': 2.0}


def spatial_model(sites=148, seed=0, initial_range=1.0):
    """Poisson counts with a latent Gaussian field of exponentially decaying covariance."""
    if sites < 2:
        raise InvalidParameter(f'sites must be at least 2, got {sites}')
    rng = np.random.default_rng(seed)
    coordinates = rng.uniform(0.0, 10.0, size=(sites, 2))
    distances = np.round(squareform(pdist(coordinates)), 6)
    cov = SPATIAL_TRUTH['sigma'] ** 2 * np.exp(-distances / SPATIAL_TRUTH['range'])
    field_values = SPATIAL_TRUTH['mu'] + np.linalg.cholesky(cov) @ rng.standard_normal(sites)
    counts = rng.poisson(np.exp(field_values))
    nodes = [
        _normal('mu', 0.0, FLAT_NORMAL_SD),
        _gamma('sigma', value=1.0),
        _gamma('rho', value=float(initial_range)),
        {
            'name': 'gcov', 'kind': 'deterministic', 'op': 'expcov',
            'params': {'sd': 'sigma', 'range': 'rho', 'distances': distances.tolist()},
        },
        _mvnorm('g', ['mu'] * sites, 'gcov', value=np.log(counts + 0.5).tolist()),
    ]
    for i in range(sites):
        nodes.append({'name': f'lam_{i + 1}', 'kind': 'deterministic', 'op': 'exp', 'inputs': [f'g[{i}]']})
        nodes.append({
            'name': f'y_{i + 1}', 'kind': 'data', 'family': 'poisson',
            'params': {'rate': f'lam_{i + 1}'}, 'value': int(counts[i]),
        })
    return build_graph({'name': 'spatial', 'nodes': nodes})


# Registry used by the commands and the benchmark harness

@dataclass(frozen=True)
class ExampleSpec:
    name: str
    builder: Callable
    defaults: dict = field(default_factory=dict)
    help: str = ''

    def build(self, **params):
        """Return ``(graph, informed_plan)``; the plan is None when the example has none."""
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise InvalidParameter(f'{self.name} takes {", ".join(sorted(self.defaults)) or "no parameters"}')
        built = self.builder(**{**self.defaults, **params})
        if isinstance(built, tuple):
            return built
        return built, None


EXAMPLES = {
    spec.name: spec
    for spec in (
        ExampleSpec('fixed-rho', fixed_correlation_blocks, {'rho': 0.8, 'sizes': list(DEFAULT_BLOCK_SIZES), 'singletons': 2},
                    'Correlated groups of sizes 32/16/8/4/2 plus two free parameters (d=64)'),
        ExampleSpec('varying-rho', varying_correlation_blocks, {'n': 2},
                    'Nine groups of size n at correlations 0.1..0.9 plus n free parameters'),
        ExampleSpec('exp-decay', exponential_decay_mvn, {'rho': 0.5, 'd': 10},
                    'Multivariate normal with correlations rho^|i-j|'),
        ExampleSpec('normals', independent_normals, {'d': 10}, 'Independent standard normals'),
        ExampleSpec('gammas', independent_gammas, {'d': 10}, 'Independent Gamma(2, 1) parameters'),
        ExampleSpec('mvn', compound_symmetric_mvn, {'d': 10, 'rho': 0.5}, 'One compound-symmetric multivariate normal'),
        ExampleSpec('random-effects', random_effects_model, {'groups': 2, 'per_group': 16, 'seed': 0},
                    'Beta-binomial random effects with Gamma hyperpriors'),
        ExampleSpec('state-space-independent', state_space_model,
                    {'parameterization': 'independent', 'length': 100, 'seed': 0},
                    'Linear Gaussian state space, mean-centred AR(1)'),
        ExampleSpec('state-space-correlated', state_space_model,
                    {'parameterization': 'correlated', 'length': 100, 'seed': 0},
                    'Linear Gaussian state space, intercept and autocorrelation'),
        ExampleSpec('spatial', spatial_model, {'sites': 148, 'seed': 0, 'initial_range': 1.0},
                    'Poisson counts over a Gaussian field with exponential covariance'),
    )
}


def build_example(name, **params):
    try:
        spec = EXAMPLES[name]
    except KeyError:
        raise InvalidParameter(f'Unknown example {name!r}; available: {", ".join(EXAMPLES)}') from None
    graph, informed = spec.build(**params)
    logger.debug('Example %s: d=%d', name, graph.d)
    return graph, informed
