"""Greedy search for the sampler plan with the most effective samples per second.

Iteration 0 runs every slot with a scalar sampler. Each later iteration
clusters the posterior correlations of the previously selected plan's chain,
cuts the dendrogram at every grid height, scores the distinct candidate plans
and selects the most efficient one. The search stops when the same plan is
selected twice in a row, when the selection is less efficient than the
previous one, or after ``max_outer_iterations`` sweeps.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from blockmcmc.clustering import complete_linkage, correlation_matrix, cut, distance_matrix, plan_from_partition
from blockmcmc.conf import autoblock_setting
from blockmcmc.diagnostics import efficiency_report
from blockmcmc.exceptions import ConfigError, DegenerateChain
from blockmcmc.graph import build_graph
from blockmcmc.samplers import ADAPTATION_INTERVAL, SamplerPlan, run_mcmc

logger = logging.getLogger(__name__)

DEFAULT_GRID = tuple(round(0.1 * k, 1) for k in range(11))

REPEATED_PLAN = 'repeated-plan'
EFFICIENCY_DECREASED = 'efficiency-decreased'
MAX_OUTER_ITERATIONS = 'max-outer-iterations'


@dataclass(frozen=True)
class AutoblockConfig:
    iterations: int = 10_000
    grid: tuple = DEFAULT_GRID
    discard_fraction: float = 0.5
    max_outer_iterations: int = 10
    seed: int = 0
    adaptation_interval: int = ADAPTATION_INTERVAL
    parallel: bool = False
    workers: int = None

    def __post_init__(self):
        object.__setattr__(self, 'grid', tuple(float(h) for h in self.grid))
        if self.iterations < 100:
            raise ConfigError(f'iterations must be at least 100, got {self.iterations}')
        grid = self.grid
        if not grid or any(not 0.0 <= h <= 1.0 for h in grid):
            raise ConfigError('Cut heights must lie in [0, 1]')
        if list(grid) != sorted(set(grid)):
            raise ConfigError('Cut heights must be sorted and distinct')
        if grid[0] != 0.0 or grid[-1] != 1.0:
            raise ConfigError('The cut-height grid must contain 0 and 1')
        if not 0.0 <= self.discard_fraction < 1.0:
            raise ConfigError(f'discard_fraction must lie in [0, 1), got {self.discard_fraction}')
        if self.max_outer_iterations < 1:
            raise ConfigError('max_outer_iterations must be at least 1')
        if self.seed < 0:
            raise ConfigError('seed must be nonnegative')
        if self.adaptation_interval < 1:
            raise ConfigError('adaptation_interval must be at least 1')

    @classmethod
    def from_settings(cls, **overrides):
        """Defaults from ``settings.AUTOBLOCK``, then ``overrides`` where not None."""
        values = {
            'iterations': autoblock_setting('DEFAULT_ITERATIONS'),
            'grid': autoblock_setting('CUT_GRID'),
            'discard_fraction': autoblock_setting('DISCARD_FRACTION'),
            'max_outer_iterations': autoblock_setting('MAX_OUTER_ITERATIONS'),
            'adaptation_interval': autoblock_setting('ADAPTATION_INTERVAL'),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    def to_json(self):
        return {
            'iterations': self.iterations,
            'grid': list(self.grid),
            'discard_fraction': self.discard_fraction,
            'max_outer_iterations': self.max_outer_iterations,
            'seed': self.seed,
            'adaptation_interval': self.adaptation_interval,
            'parallel': self.parallel,
        }


def sub_seed(seed, outer, height_index):
    """Seed of one candidate run, derived from the search seed and its position."""
    return int(np.random.SeedSequence([seed, outer, height_index]).generate_state(1)[0])


@dataclass
class ScoredRun:
    chain: object
    report: object


def run_candidate(graph, plan, iterations, seed, interval=ADAPTATION_INTERVAL):
    """Run a plan with fresh sampler states and measure its efficiency."""
    chain = run_mcmc(graph, plan, iterations, seed, interval)
    return ScoredRun(chain, efficiency_report(chain))


def score_candidate(graph, plan, iterations, seed, interval=ADAPTATION_INTERVAL):
    return run_candidate(graph, plan, iterations, seed, interval).report


def _run_in_worker(description, groups, iterations, seed, interval):
    graph = build_graph(description)
    plan = SamplerPlan.from_groups(groups, graph.d)
    return run_candidate(graph, plan, iterations, seed, interval)


@dataclass
class Candidate:
    plan: SamplerPlan
    heights: list
    seed: int
    run: ScoredRun = field(repr=False)

    @property
    def report(self):
        return self.run.report

    @property
    def efficiency(self):
        return self.run.report.efficiency

    @property
    def height(self):
        return self.heights[0]

    def to_json(self, slot_names):
        return {
            'heights': list(self.heights),
            'seed': self.seed,
            'plan': self.plan.to_json(slot_names),
            'describe': self.plan.describe(),
            'report': self.report.to_dict(),
        }


@dataclass
class OuterIteration:
    index: int
    candidates: list
    selected: Candidate
    dendrogram: object = None

    @property
    def selected_height(self):
        return self.selected.height

    def to_json(self, slot_names):
        return {
            'index': self.index,
            'selected_height': self.selected_height,
            'selected_efficiency': self.selected.efficiency,
            'selected_plan': self.selected.plan.to_json(slot_names),
            'candidates': [candidate.to_json(slot_names) for candidate in self.candidates],
            'dendrogram': None if self.dendrogram is None else self.dendrogram.to_json(slot_names),
        }


@dataclass
class AutoblockTrace:
    model: str
    slot_names: list
    config: AutoblockConfig
    iterations: list = field(default_factory=list)
    termination: str = None
    anomaly: bool = False

    @property
    def final(self):
        return self.iterations[-1].selected

    @property
    def final_plan(self):
        return self.final.plan

    @property
    def final_partition(self):
        return [[self.slot_names[k] for k in group] for group in self.final_plan.groups]

    def to_json(self):
        final = self.final
        return {
            'model': self.model,
            'config': self.config.to_json(),
            'termination': self.termination,
            'anomaly': self.anomaly,
            'final': {
                'height': final.height,
                'efficiency': final.efficiency,
                'plan': final.plan.to_json(self.slot_names),
                'partition': self.final_partition,
                'report': final.report.to_dict(),
            },
            'iterations': [iteration.to_json(self.slot_names) for iteration in self.iterations],
        }


class CandidateScorer:
    """Scores plans sequentially, or in a process pool when ``parallel`` is set."""

    def __init__(self, graph, config, runner=run_candidate):
        self.graph = graph
        self.config = config
        self.runner = runner

    def __call__(self, jobs):
        """``jobs`` is a list of (plan, seed); returns one ScoredRun per job."""
        config = self.config
        if not config.parallel or len(jobs) < 2:
            return [self.runner(self.graph, plan, config.iterations, seed, config.adaptation_interval)
                    for plan, seed in jobs]
        logger.warning(
            'Scoring %d candidates in parallel; runtimes measured under contention are unreliable', len(jobs)
        )
        description = self.graph.description
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [
                pool.submit(_run_in_worker, description, plan.groups, config.iterations, seed,
                            config.adaptation_interval)
                for plan, seed in jobs
            ]
            return [future.result() for future in futures]


def _check_not_degenerate(graph, candidate):
    if len(candidate.report.stuck) == graph.d:
        raise DegenerateChain(
            f'{graph.name}: every parameter is stuck under {candidate.plan.describe()}; '
            'check the initial values and priors'
        )


def candidate_plans(dendrogram, grid):
    """Distinct plans over the grid, each with every height that produced it, lowest first."""
    plans = {}
    for index, height in enumerate(grid):
        plan = plan_from_partition(cut(dendrogram, height))
        if plan in plans:
            plans[plan][1].append(height)
        else:
            plans[plan] = (index, [height])
    return [(plan, index, heights) for plan, (index, heights) in plans.items()]


def autoblock(graph, config=None, runner=run_candidate):
    """Search for the most efficient blocking of ``graph``'s parameters."""
    config = config or AutoblockConfig()
    score = CandidateScorer(graph, config, runner)
    trace = AutoblockTrace(graph.name, list(graph.slot_names), config)

    seed = sub_seed(config.seed, 0, 0)
    (run,) = score([(SamplerPlan.all_scalar(graph.d), seed)])
    previous = Candidate(SamplerPlan.all_scalar(graph.d), [0.0], seed, run)
    trace.iterations.append(OuterIteration(0, [previous], previous))
    logger.info('%s iteration 0: all scalar, E=%.4g', graph.name, previous.efficiency)

    for outer in range(1, config.max_outer_iterations + 1):
        _check_not_degenerate(graph, previous)
        correlation = correlation_matrix(previous.run.chain, config.discard_fraction)
        dendrogram = complete_linkage(distance_matrix(correlation))
        plans = candidate_plans(dendrogram, config.grid)
        if len(plans) < len(config.grid):
            logger.debug('%d grid heights gave %d distinct plans', len(config.grid), len(plans))
        jobs = [(plan, sub_seed(config.seed, outer, index)) for plan, index, _ in plans]
        runs = score(jobs)
        candidates = [
            Candidate(plan, heights, seed, run)
            for (plan, _, heights), (_, seed), run in zip(plans, jobs, runs)
        ]
        for candidate in candidates:
            logger.debug('  h=%.2f %s: E=%.4g', candidate.height, candidate.plan.describe(), candidate.efficiency)
        # max keeps the first maximum, i.e. the lowest cut height.
        selected = max(candidates, key=lambda c: -math.inf if math.isnan(c.efficiency) else c.efficiency)
        trace.iterations.append(OuterIteration(outer, candidates, selected, dendrogram))
        logger.info(
            '%s iteration %d: h=%.2f %s, E=%.4g',
            graph.name, outer, selected.height, selected.plan.describe(), selected.efficiency,
        )
        if selected.plan == previous.plan:
            trace.termination = REPEATED_PLAN
            break
        if not selected.efficiency > previous.efficiency:
            trace.termination = EFFICIENCY_DECREASED
            trace.anomaly = True
            logger.warning(
                '%s: efficiency dropped from %.4g to %.4g; inspect the posterior samples',
                graph.name, previous.efficiency, selected.efficiency,
            )
            break
        previous = selected
    else:
        trace.termination = MAX_OUTER_ITERATIONS
    logger.info('%s: %s after %d iterations', graph.name, trace.termination, len(trace.iterations) - 1)
    return trace
