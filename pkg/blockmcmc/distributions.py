"""Log-density kernels for the supported distribution families.

Parameters outside their domain raise ``InvalidParameter`` (a misconfigured
model); values outside the support return ``-inf``.
"""
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import betaln, gammaln

from blockmcmc.exceptions import InvalidParameter

NEG_INF = -math.inf
LOG_2PI = math.log(2.0 * math.pi)


def _positive(family, name, value):
    if not value > 0:
        raise InvalidParameter(f'{family}: {name} must be positive, got {value!r}')


def _is_count(x):
    return x >= 0 and float(x).is_integer()


def normal_logpdf(x, mean, sd):
    _positive('normal', 'sd', sd)
    z = (x - mean) / sd
    return -0.5 * LOG_2PI - math.log(sd) - 0.5 * z * z


def gamma_logpdf(x, shape, rate):
    _positive('gamma', 'shape', shape)
    _positive('gamma', 'rate', rate)
    if not x > 0:
        return NEG_INF
    return shape * math.log(rate) - math.lgamma(shape) + (shape - 1.0) * math.log(x) - rate * x


def beta_logpdf(x, a, b):
    _positive('beta', 'a', a)
    _positive('beta', 'b', b)
    if not 0.0 < x < 1.0:
        return NEG_INF
    return (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - float(betaln(a, b))


def binomial_logpdf(x, size, prob):
    if not _is_count(size):
        raise InvalidParameter(f'binomial: size must be a nonnegative integer, got {size!r}')
    if not 0.0 <= prob <= 1.0:
        raise InvalidParameter(f'binomial: prob must lie in [0, 1], got {prob!r}')
    if not _is_count(x) or x > size:
        return NEG_INF
    if prob == 0.0:
        return 0.0 if x == 0 else NEG_INF
    if prob == 1.0:
        return 0.0 if x == size else NEG_INF
    log_choose = float(gammaln(size + 1.0) - gammaln(x + 1.0) - gammaln(size - x + 1.0))
    return log_choose + x * math.log(prob) + (size - x) * math.log1p(-prob)


def poisson_logpdf(x, rate):
    if not rate >= 0:
        raise InvalidParameter(f'poisson: rate must be nonnegative, got {rate!r}')
    if not _is_count(x):
        return NEG_INF
    if rate == 0.0:
        return 0.0 if x == 0 else NEG_INF
    if math.isinf(rate):
        return NEG_INF
    return x * math.log(rate) - rate - math.lgamma(x + 1.0)


def mvnorm_logpdf_chol(x, mean, chol):
    """Multivariate normal log density given the lower Cholesky factor of the covariance."""
    diff = np.asarray(x, dtype=float) - mean
    if not np.all(np.isfinite(diff)):
        return NEG_INF
    white = solve_triangular(chol, diff, lower=True, check_finite=False)
    half_logdet = np.log(np.diagonal(chol)).sum()
    return float(-0.5 * diff.shape[0] * LOG_2PI - half_logdet - 0.5 * white.dot(white))


@dataclass(frozen=True)
class Family:
    name: str
    params: tuple
    discrete: bool = False
    multivariate: bool = False
    logpdf: Callable = None
    # Deterministic default initial value from the (resolved) parameters.
    initial: Callable = None


FAMILIES = {
    'normal': Family(
        'normal', ('mean', 'sd'),
        logpdf=normal_logpdf,
        initial=lambda p: p['mean'],
    ),
    'gamma': Family(
        'gamma', ('shape', 'rate'),
        logpdf=gamma_logpdf,
        initial=lambda p: p['shape'] / p['rate'],
    ),
    'beta': Family(
        'beta', ('a', 'b'),
        logpdf=beta_logpdf,
        initial=lambda p: p['a'] / (p['a'] + p['b']),
    ),
    'binomial': Family('binomial', ('size', 'prob'), discrete=True, logpdf=binomial_logpdf),
    'poisson': Family('poisson', ('rate',), discrete=True, logpdf=poisson_logpdf),
    'mvnorm': Family(
        'mvnorm', ('mean', 'cov'),
        multivariate=True,
        initial=lambda p: np.array(p['mean'], dtype=float),
    ),
}
