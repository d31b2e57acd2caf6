"""Integrated autocorrelation time, effective sample size and sampling efficiency.

The autocorrelation time is estimated from the spectral density at frequency
zero of an autoregressive model fitted to the chain: least squares for every
order up to ``min(10 * log10(N), N - 1)``, order chosen by AIC, the chosen
order refit with statsmodels.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from statsmodels.tsa.ar_model import AutoReg

from blockmcmc.exceptions import TooFewSamples

MIN_SAMPLES = 10
# Benchmark reports present ESS and runtime per this many iterations.
PRESENTATION_ITERATIONS = 10_000


@dataclass(frozen=True)
class ARFit:
    order: int
    coefficients: np.ndarray
    innovation_variance: float

    @property
    def spectral_density_at_zero(self):
        denominator = (1.0 - self.coefficients.sum()) ** 2
        if denominator == 0.0:
            return math.inf
        return self.innovation_variance / denominator


def max_ar_order(n):
    return min(int(math.floor(10 * math.log10(n))), n - 1)


def fit_ar(chain, max_order=None):
    """AR fit over a common sample, order selected by AIC.

    The AIC scan solves the normal equations of every order from one Gram
    matrix; the chosen order is then estimated with ``AutoReg``.
    """
    x = np.asarray(chain, dtype=float)
    n = x.size
    if max_order is None:
        max_order = max_ar_order(n)
    centered = x - x.mean()
    windows = sliding_window_view(centered, max_order + 1)
    target = np.ascontiguousarray(windows[:, -1])
    # Column j holds lag j + 1.
    predictors = np.ascontiguousarray(windows[:, -2::-1])
    m = target.size
    gram = predictors.T @ predictors
    cross = predictors.T @ target
    total = float(target @ target)

    best = ARFit(0, np.zeros(0), total / m)
    best_aic = m * math.log(best.innovation_variance) if best.innovation_variance > 0 else -math.inf
    for order in range(1, max_order + 1):
        coefficients = np.linalg.lstsq(gram[:order, :order], cross[:order], rcond=None)[0]
        residual = total - float(coefficients @ cross[:order])
        if not residual > 0:
            continue
        aic = m * math.log(residual / m) + 2 * order
        if aic < best_aic:
            best, best_aic = ARFit(order, coefficients, residual / m), aic
    if best.order == 0 or m <= 2 * best.order:
        return best
    result = AutoReg(centered, lags=best.order, trend='n', hold_back=max_order).fit()
    return ARFit(best.order, np.asarray(result.params, dtype=float), float(result.sigma2))


def integrated_autocorrelation_time(chain, clamp=True):
    """Iterations per effectively independent sample; +inf for a constant chain."""
    x = np.asarray(chain, dtype=float)
    if x.ndim != 1 or x.size < MIN_SAMPLES:
        raise TooFewSamples(f'Need at least {MIN_SAMPLES} samples, got {x.size}')
    variance = x.var()
    if variance == 0.0 or np.ptp(x) == 0.0:
        return math.inf
    tau = fit_ar(x).spectral_density_at_zero / variance
    return max(tau, 1.0) if clamp else tau


def effective_sample_size(chain):
    tau = integrated_autocorrelation_time(chain)
    return 0.0 if math.isinf(tau) else len(chain) / tau


@dataclass
class EfficiencyReport:
    """Per-parameter mixing and the algorithmic / computational / overall efficiency triple."""
    slot_names: list
    tau: np.ndarray
    ess: np.ndarray
    iterations: int
    sampling_seconds: float
    algorithmic_efficiency: float
    seconds_per_iteration: float
    efficiency: float
    stuck: list = field(default_factory=list)

    @property
    def ess_per_10k(self):
        return PRESENTATION_ITERATIONS * self.algorithmic_efficiency

    @property
    def runtime_per_10k(self):
        return PRESENTATION_ITERATIONS * self.seconds_per_iteration

    @property
    def slowest(self):
        return self.slot_names[int(np.argmax(self.tau))]

    def to_dict(self, per_parameter=True):
        data = {
            'iterations': self.iterations,
            'sampling_seconds': self.sampling_seconds,
            'algorithmic_efficiency': self.algorithmic_efficiency,
            'seconds_per_iteration': self.seconds_per_iteration,
            'efficiency': self.efficiency,
            'ess_per_10k': self.ess_per_10k,
            'runtime_per_10k': self.runtime_per_10k,
            'efficiency_per_second': self.efficiency,
            'slowest': self.slowest,
            'stuck': list(self.stuck),
        }
        if per_parameter:
            data['parameters'] = [
                {'slot': name, 'tau': None if math.isinf(t) else float(t), 'ess': float(e)}
                for name, t, e in zip(self.slot_names, self.tau, self.ess)
            ]
        return data


def efficiency_report(chain):
    """Estimate tau for every column of a ChainMatrix and combine with its runtime."""
    samples = chain.samples
    iterations = samples.shape[0]
    if iterations < MIN_SAMPLES:
        raise TooFewSamples(f'Need at least {MIN_SAMPLES} iterations, got {iterations}')
    tau = np.array([integrated_autocorrelation_time(samples[:, k]) for k in range(samples.shape[1])])
    ess = np.where(np.isinf(tau), 0.0, iterations / tau)
    algorithmic = float(np.min(1.0 / tau))
    seconds_per_iteration = chain.sampling_seconds / iterations
    if seconds_per_iteration > 0:
        efficiency = algorithmic / seconds_per_iteration
    else:
        efficiency = math.inf if algorithmic > 0 else 0.0
    return EfficiencyReport(
        slot_names=list(chain.slot_names),
        tau=tau,
        ess=ess,
        iterations=iterations,
        sampling_seconds=chain.sampling_seconds,
        algorithmic_efficiency=algorithmic,
        seconds_per_iteration=seconds_per_iteration,
        efficiency=efficiency,
        stuck=[name for name, t in zip(chain.slot_names, tau) if math.isinf(t)],
    )
