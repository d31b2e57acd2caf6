"""Adaptive random-walk Metropolis samplers and the MCMC driver.

A sampler plan partitions the theta slots into scalar samplers (one slot) and
block samplers (two or more slots). Scalar samplers tune their proposal scale;
block samplers also tune the proposal covariance. Both adapt every
``ADAPTATION_INTERVAL`` iterations with a diminishing step.
"""
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from blockmcmc.distributions import NEG_INF
from blockmcmc.exceptions import InvalidModel, PlanError
from blockmcmc.linalg import jitter

logger = logging.getLogger(__name__)

ADAPTATION_INTERVAL = 200
SCALE_BOUNDS = (1e-8, 10.0)
SCALAR_TARGET = 0.44
# Optimal-scaling acceptance targets for small blocks; 0.234 from five slots up.
BLOCK_TARGETS = {2: 0.44, 3: 0.35, 4: 0.25}
ASYMPTOTIC_TARGET = 0.234
# Iterations of proposal noise drawn at once.
DRAW_CHUNK = 512


def block_target(size):
    return BLOCK_TARGETS.get(size, ASYMPTOTIC_TARGET)


@dataclass(frozen=True)
class Scalar:
    slot: int

    @property
    def slots(self):
        return (self.slot,)


@dataclass(frozen=True)
class Block:
    slots: tuple


class SamplerPlan:
    """A partition of the theta slots into scalar and block samplers.

    Samplers are kept in order of their least slot, so plans built from the
    same partition in any order are equal and run identically.
    """

    def __init__(self, samplers, d):
        normalized = []
        for sampler in samplers:
            if isinstance(sampler, Scalar):
                normalized.append(Scalar(int(sampler.slot)))
            elif isinstance(sampler, Block):
                slots = tuple(sorted(int(s) for s in sampler.slots))
                if len(slots) < 2:
                    raise PlanError(f'A block sampler needs at least two slots, got {list(slots)}')
                normalized.append(Block(slots))
            else:
                raise PlanError(f'Unknown sampler {sampler!r}')
        covered = [slot for sampler in normalized for slot in sampler.slots]
        if len(covered) != len(set(covered)):
            seen, overlap = set(), set()
            for slot in covered:
                (overlap if slot in seen else seen).add(slot)
            raise PlanError(f'Samplers overlap on slots {sorted(overlap)}')
        if set(covered) != set(range(d)):
            missing = sorted(set(range(d)) - set(covered))
            extra = sorted(set(covered) - set(range(d)))
            raise PlanError(f'Samplers must cover slots 0..{d - 1} exactly (missing {missing}, unknown {extra})')
        self.d = d
        self.samplers = tuple(sorted(normalized, key=lambda s: s.slots[0]))

    @classmethod
    def from_groups(cls, groups, d):
        samplers = []
        for group in groups:
            group = sorted(int(s) for s in group)
            samplers.append(Scalar(group[0]) if len(group) == 1 else Block(tuple(group)))
        return cls(samplers, d)

    @classmethod
    def from_names(cls, groups, slot_names):
        index = {name: k for k, name in enumerate(slot_names)}
        resolved = []
        for group in groups:
            try:
                resolved.append([index[name] if isinstance(name, str) else int(name) for name in group])
            except KeyError as exc:
                raise PlanError(f'Unknown theta slot {exc.args[0]!r}') from None
        return cls.from_groups(resolved, len(slot_names))

    @classmethod
    def all_scalar(cls, d):
        return cls([Scalar(k) for k in range(d)], d)

    @classmethod
    def all_blocked(cls, d):
        if d == 1:
            return cls.all_scalar(1)
        return cls([Block(tuple(range(d)))], d)

    @property
    def groups(self):
        return tuple(sampler.slots for sampler in self.samplers)

    @property
    def block_sizes(self):
        return [len(s.slots) for s in self.samplers if isinstance(s, Block)]

    def __eq__(self, other):
        return isinstance(other, SamplerPlan) and self.d == other.d and self.groups == other.groups

    def __hash__(self):
        return hash((self.d, self.groups))

    def __repr__(self):
        return f'<SamplerPlan {self.describe()}>'

    def describe(self):
        sizes = self.block_sizes
        scalars = len(self.samplers) - len(sizes)
        if not sizes:
            return f'{scalars} scalar'
        return f'{scalars} scalar, {len(sizes)} block (sizes {", ".join(map(str, sorted(sizes, reverse=True)))})'

    def to_json(self, slot_names=None):
        def label(slot):
            return slot_names[slot] if slot_names is not None else slot

        return [
            {'type': 'scalar' if isinstance(s, Scalar) else 'block', 'slots': [label(k) for k in s.slots]}
            for s in self.samplers
        ]


@dataclass
class ScalarSamplerState:
    scale: float = 1.0
    target: float = SCALAR_TARGET
    interval: int = ADAPTATION_INTERVAL
    window_accepted: int = 0
    window_iterations: int = 0
    times_adapted: int = 0
    total_accepted: int = 0
    total_iterations: int = 0
    window_rates: list = field(default_factory=list)

    def record(self, accepted):
        self.window_iterations += 1
        self.total_iterations += 1
        if accepted:
            self.window_accepted += 1
            self.total_accepted += 1
        if self.window_iterations == self.interval:
            adapt(self, self.window_accepted / self.window_iterations)
            self.window_accepted = 0
            self.window_iterations = 0

    @property
    def acceptance_rate(self):
        return self.total_accepted / self.total_iterations if self.total_iterations else 0.0


@dataclass
class BlockSamplerState(ScalarSamplerState):
    size: int = 2
    covariance: np.ndarray = None
    cholesky: np.ndarray = None
    # Moments of the block's states over the whole history. Recent states
    # wait in ``buffer`` and are merged a window at a time.
    sample_count: int = 0
    sample_mean: np.ndarray = None
    sample_m2: np.ndarray = None
    buffer: np.ndarray = None
    buffered: int = 0

    @classmethod
    def initial(cls, size, interval=ADAPTATION_INTERVAL):
        state = cls(
            scale=2.38 ** 2 / size,
            target=block_target(size),
            interval=interval,
            size=size,
            covariance=np.eye(size),
            sample_mean=np.zeros(size),
            sample_m2=np.zeros((size, size)),
            buffer=np.empty((interval, size)),
        )
        state.refactor()
        return state

    def observe(self, x):
        if self.buffered == len(self.buffer):
            self.merge()
        self.buffer[self.buffered] = x
        self.buffered += 1

    def merge(self):
        """Fold the buffered states into the running moments (pairwise update)."""
        n_batch = self.buffered
        if not n_batch:
            return
        batch = self.buffer[:n_batch]
        batch_mean = batch.mean(axis=0)
        centered = batch - batch_mean
        n_seen = self.sample_count
        n_total = n_seen + n_batch
        delta = batch_mean - self.sample_mean
        self.sample_mean = self.sample_mean + delta * (n_batch / n_total)
        self.sample_m2 = self.sample_m2 + centered.T @ centered + np.outer(delta, delta) * (n_seen * n_batch / n_total)
        self.sample_count = n_total
        self.buffered = 0

    def empirical_covariance(self):
        self.merge()
        if self.sample_count < 2:
            return None
        covariance = self.sample_m2 / (self.sample_count - 1)
        return 0.5 * (covariance + covariance.T)

    def fold_covariance(self):
        # Until the block has moved more times than it has dimensions the
        # empirical covariance is rank deficient; keep the current one.
        empirical = self.empirical_covariance()
        if empirical is None or self.total_accepted <= self.size:
            return
        epsilon = 1e-10 * abs(np.trace(empirical)) / self.size + 1e-12
        self.covariance = empirical + epsilon * np.eye(self.size)

    def refactor(self):
        """Factor scale * covariance, regularizing once and falling back to identity."""
        identity = np.eye(self.size)
        try:
            self.cholesky = np.linalg.cholesky(self.scale * self.covariance)
            return
        except np.linalg.LinAlgError:
            pass
        self.covariance = self.covariance + jitter(self.covariance) * identity
        try:
            self.cholesky = np.linalg.cholesky(self.scale * self.covariance)
            logger.debug('Block covariance regularized (k=%d)', self.size)
        except np.linalg.LinAlgError:
            logger.warning('Block covariance reset to identity after failed regularization (k=%d)', self.size)
            self.covariance = identity
            self.cholesky = math.sqrt(self.scale) * identity


def adapt(state, rate):
    """Diminishing adaptation of the proposal from one window's acceptance rate."""
    gamma = 1.0 / math.sqrt(state.times_adapted + 1)
    scale = state.scale * math.exp(gamma * (rate - state.target))
    state.scale = min(max(scale, SCALE_BOUNDS[0]), SCALE_BOUNDS[1])
    if isinstance(state, BlockSamplerState):
        state.fold_covariance()
        state.refactor()
    state.times_adapted += 1
    state.window_rates.append(rate)


def log_uniform(u):
    return math.log(u) if u > 0.0 else NEG_INF


def _metropolis(theta, scope, current, proposal, log_u):
    """Move ``scope.key`` from ``current`` to ``proposal``; keep it or restore.

    Every node of the scope must hold a cached log density.
    """
    key = scope.key
    nodes = scope.nodes
    deterministic = scope.deterministic
    saved_logprobs = [node.logprob for node in nodes]
    saved_factors = [node.save_factor() for node in scope.factor_nodes]
    saved_values = [node.save() for node in deterministic]
    theta[key] = proposal
    for node in deterministic:
        node.stale = True
    proposed = 0.0
    for node in nodes:
        logprob = node.calculate()
        if logprob == NEG_INF:
            proposed = NEG_INF
            break
        proposed += logprob
    log_ratio = proposed - sum(saved_logprobs)
    if log_ratio >= 0.0 or log_u < log_ratio:
        return True
    theta[key] = current
    for node, logprob in zip(nodes, saved_logprobs):
        node.logprob = logprob
    for node, state in zip(scope.factor_nodes, saved_factors):
        node.restore_factor(state)
    for node, state in zip(deterministic, saved_values):
        node.restore(state)
    return False


class ScalarKernel:
    """A scalar sampler bound to its update scope."""
    __slots__ = ('theta', 'slot', 'scope', 'state')

    def __init__(self, graph, slot, state):
        self.theta = graph.theta
        self.slot = slot
        self.scope = graph.update_scope((slot,))
        self.state = state

    def step(self, z, log_u):
        """``z`` is one standard normal per theta slot; this sampler reads its own."""
        current = self.theta[self.slot]
        state = self.state
        accepted = _metropolis(self.theta, self.scope, current, current + state.scale * z[self.slot], log_u)
        state.record(accepted)
        return accepted


class BlockKernel:
    """A block sampler bound to its update scope."""
    __slots__ = ('theta', 'key', 'scope', 'state')

    def __init__(self, graph, slots, state):
        self.theta = graph.theta
        self.scope = graph.update_scope(slots)
        self.key = self.scope.key
        self.state = state

    def step(self, z, log_u):
        key = self.key
        theta = self.theta
        state = self.state
        current = theta[key].copy()
        accepted = _metropolis(theta, self.scope, current, current + state.cholesky @ z[key], log_u)
        state.observe(theta[key])
        state.record(accepted)
        return accepted


def _prime(scope):
    for node in scope.nodes:
        node.current_logprob()


def scalar_step(graph, slot, state, rng):
    """One adaptive random-walk update of a single theta slot."""
    kernel = ScalarKernel(graph, slot, state)
    _prime(kernel.scope)
    z = np.zeros(graph.d)
    z[slot] = rng.standard_normal()
    return kernel.step(z, log_uniform(rng.random()))


def block_step(graph, slots, state, rng):
    """One joint adaptive random-walk update of a block of theta slots."""
    kernel = BlockKernel(graph, slots, state)
    _prime(kernel.scope)
    z = np.zeros(graph.d)
    z[kernel.scope.index] = rng.standard_normal(state.size)
    return kernel.step(z, log_uniform(rng.random()))


@dataclass
class ChainMatrix:
    """Posterior samples in theta order plus the time spent inside sampler steps."""
    samples: np.ndarray
    slot_names: list
    sampling_seconds: float
    seed: int = None
    plan: SamplerPlan = None
    acceptance: list = field(default_factory=list)

    @property
    def iterations(self):
        return self.samples.shape[0]

    @property
    def d(self):
        return self.samples.shape[1]

    @property
    def seconds_per_iteration(self):
        return self.sampling_seconds / self.iterations

    def column(self, name):
        return self.samples[:, self.slot_names.index(name)]


def initial_states(plan, interval=ADAPTATION_INTERVAL):
    states = []
    for sampler in plan.samplers:
        if isinstance(sampler, Scalar):
            states.append(ScalarSamplerState(interval=interval))
        else:
            states.append(BlockSamplerState.initial(len(sampler.slots), interval=interval))
    return states


def run_mcmc(graph, plan, iterations, seed, interval=ADAPTATION_INTERVAL):
    """Run ``plan`` on ``graph`` for ``iterations`` sweeps from the model's initial values.

    Each iteration draws one standard normal per slot and one uniform per
    sampler. Draws are made in chunks inside the timed region.
    """
    if plan.d != graph.d:
        raise PlanError(f'Plan covers {plan.d} slots but the model has {graph.d}')
    if iterations < 1:
        raise PlanError('At least one iteration is required')
    graph.reset()
    if graph.total_log_density() == NEG_INF:
        raise InvalidModel(f'{graph.name}: the initial values have zero density')
    rng = np.random.default_rng(seed)
    states = initial_states(plan, interval)
    kernels = [
        ScalarKernel(graph, sampler.slot, state) if isinstance(sampler, Scalar)
        else BlockKernel(graph, sampler.slots, state)
        for sampler, state in zip(plan.samplers, states)
    ]
    steps = [kernel.step for kernel in kernels]

    d = graph.d
    samples = np.empty((iterations, d))
    theta = graph.theta
    clock = time.perf_counter
    elapsed = 0.0
    normals = log_uniforms = None
    for i in range(iterations):
        started = clock()
        row = i % DRAW_CHUNK
        if row == 0:
            size = min(DRAW_CHUNK, iterations - i)
            normals = rng.standard_normal((size, d))
            with np.errstate(divide='ignore'):
                log_uniforms = np.log(rng.random((size, len(steps)))).tolist()
        z = normals[row]
        for step, log_u in zip(steps, log_uniforms[row]):
            step(z, log_u)
        elapsed += clock() - started
        samples[i] = theta
    logger.debug('%s: %d iterations of %s in %.3fs', graph.name, iterations, plan.describe(), elapsed)
    acceptance = [
        {
            'slots': [graph.slot_names[k] for k in sampler.slots],
            'rate': state.acceptance_rate,
            'scale': state.scale,
            'window_rates': list(state.window_rates),
        }
        for sampler, state in zip(plan.samplers, states)
    ]
    return ChainMatrix(
        samples=samples,
        slot_names=list(graph.slot_names),
        sampling_seconds=elapsed,
        seed=seed,
        plan=plan,
        acceptance=acceptance,
    )
