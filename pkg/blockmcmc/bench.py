"""Benchmark harness: sampler schemes compared across the example suites.

Every row reports ESS and runtime per 10,000 iterations and their ratio, the
effective samples per second of the slowest-mixing parameter. A failing row
is kept with ``status='error'`` and the rest of the suite still runs.
"""
import logging
import os
import platform
import sys
import sysconfig
import time
from collections import defaultdict
from dataclasses import asdict, dataclass, field

import networkx
import numpy as np
import scipy
import statsmodels
from django.utils import timezone

from blockmcmc.autoblock import AutoblockConfig, autoblock, run_candidate
from blockmcmc.example_models import build_example
from blockmcmc.exceptions import AutoblockError
from blockmcmc.io import write_json, write_rows_csv
from blockmcmc.samplers import ADAPTATION_INTERVAL, SamplerPlan

logger = logging.getLogger(__name__)

ALL_SCALAR = 'AllScalar'
ALL_BLOCKED = 'AllBlocked'
INFORMED = 'Informed'
AUTOBLOCK = 'AutoBlock'
SCHEMES = (ALL_SCALAR, ALL_BLOCKED, INFORMED, AUTOBLOCK)
STATIC_SCHEMES = (ALL_SCALAR, ALL_BLOCKED)


@dataclass(frozen=True)
class BenchmarkCase:
    """One model of a suite; ``family`` groups cases into curves over (d, rho)."""
    family: str
    example: str
    params: dict
    schemes: tuple = SCHEMES

    @property
    def d(self):
        return self.params.get('d')

    @property
    def rho(self):
        return self.params.get('rho')


@dataclass(frozen=True)
class Suite:
    name: str
    help: str
    cases: tuple


def _timing_cases():
    cases = []
    for d in (10, 25, 50, 100):
        cases.append(BenchmarkCase('normals', 'normals', {'d': d}, STATIC_SCHEMES))
        cases.append(BenchmarkCase('gammas', 'gammas', {'d': d}, STATIC_SCHEMES))
        cases.append(BenchmarkCase('mvn', 'mvn', {'d': d, 'rho': 0.5}, STATIC_SCHEMES))
    return tuple(cases)


def _efficiency_cases():
    cases = []
    for d in (2, 4, 16):
        for rho in (0.0, 0.2, 0.5, 0.7, 0.9):
            cases.append(BenchmarkCase('compound-symmetric', 'mvn', {'d': d, 'rho': rho}, STATIC_SCHEMES))
            cases.append(BenchmarkCase('exp-decay', 'exp-decay', {'d': d, 'rho': rho}, STATIC_SCHEMES))
    return tuple(cases)


SUITES = {
    suite.name: suite
    for suite in (
        Suite('timing-sweep', 'Runtime of all-scalar vs all-blocked sampling of normal, gamma and MVN priors across d',
              _timing_cases()),
        Suite('efficiency-sweep', 'Algorithmic efficiency over (d, rho) for compound-symmetric and exponential-decay MVNs',
              _efficiency_cases()),
        Suite('toy-fixed-rho', 'Groups of 32/16/8/4/2 parameters at a fixed correlation',
              tuple(BenchmarkCase('fixed-rho', 'fixed-rho', {'rho': rho}) for rho in (0.2, 0.5, 0.8))),
        Suite('toy-varying-rho', 'Nine groups of size n at correlations 0.1..0.9',
              tuple(BenchmarkCase('varying-rho', 'varying-rho', {'n': n}) for n in (2, 5, 10))),
        Suite('applied', 'Random effects, both state-space parameterizations and the spatial model', (
            BenchmarkCase('random-effects', 'random-effects', {}),
            BenchmarkCase('state-space-independent', 'state-space-independent', {}),
            BenchmarkCase('state-space-correlated', 'state-space-correlated', {}),
            BenchmarkCase('spatial', 'spatial', {}),
        )),
    )
}


@dataclass
class BenchmarkRow:
    suite: str
    family: str
    model: str
    scheme: str
    repetition: int
    d: int = None
    rho: float = None
    status: str = 'ok'
    ess_per_10k: float = None
    runtime_per_10k: float = None
    efficiency: float = None
    algorithmic_efficiency: float = None
    slowest: str = None
    plan: str = None
    message: str = ''
    detail: dict = field(default_factory=dict)

    FIELDS = (
        'suite', 'family', 'model', 'scheme', 'repetition', 'd', 'rho', 'status',
        'ess_per_10k', 'runtime_per_10k', 'efficiency', 'algorithmic_efficiency', 'slowest', 'plan', 'message',
    )

    def fill(self, report, plan):
        self.ess_per_10k = report.ess_per_10k
        self.runtime_per_10k = report.runtime_per_10k
        self.efficiency = report.efficiency
        self.algorithmic_efficiency = report.algorithmic_efficiency
        self.slowest = report.slowest
        self.plan = plan.describe()


def environment():
    """Where the timings were taken; efficiencies are only comparable on the same platform."""
    clock = time.get_clock_info('perf_counter')
    return {
        'host': platform.node(),
        'platform': platform.platform(),
        'machine': platform.machine(),
        'processor': platform.processor(),
        'cpu_count': os.cpu_count(),
        'python': sys.version.split()[0],
        'implementation': platform.python_implementation(),
        'build_flags': sysconfig.get_config_var('CFLAGS') or '',
        'clock': {
            'name': 'perf_counter',
            'implementation': clock.implementation,
            'resolution': clock.resolution,
            'monotonic': clock.monotonic,
        },
        'packages': {
            'numpy': np.__version__,
            'scipy': scipy.__version__,
            'networkx': networkx.__version__,
            'statsmodels': statsmodels.__version__,
        },
    }


@dataclass
class BenchmarkReport:
    suite: str
    iterations: int
    seed: int
    repetitions: int
    environment: dict
    started: str
    rows: list = field(default_factory=list)

    @property
    def failed(self):
        return [row for row in self.rows if row.status != 'ok']

    def curves(self):
        """Mean over repetitions per (family, scheme), ordered by (d, rho)."""
        grouped = defaultdict(list)
        for row in self.rows:
            if row.status == 'ok':
                grouped[(row.family, row.scheme, row.d, row.rho, row.model)].append(row)
        curves = defaultdict(list)
        for (family, scheme, d, rho, model), rows in grouped.items():
            curves[f'{family}/{scheme}'].append({
                'model': model,
                'd': d,
                'rho': rho,
                'runtime_per_10k': float(np.mean([r.runtime_per_10k for r in rows])),
                'ess_per_10k': float(np.mean([r.ess_per_10k for r in rows])),
                'efficiency': float(np.mean([r.efficiency for r in rows])),
                'algorithmic_efficiency': float(np.mean([r.algorithmic_efficiency for r in rows])),
            })
        for points in curves.values():
            points.sort(key=lambda p: (p['d'] is None, p['d'] or 0, p['rho'] is None, p['rho'] or 0.0))
        return dict(curves)

    def to_json(self):
        return {
            'suite': self.suite,
            'iterations': self.iterations,
            'seed': self.seed,
            'repetitions': self.repetitions,
            'started': self.started,
            'environment': self.environment,
            'rows': [asdict(row) for row in self.rows],
            'curves': self.curves(),
        }

    def write(self, path):
        """Write ``<path>.csv`` (table) and ``<path>.json`` (table, curves, environment)."""
        csv_path = write_rows_csv(path.with_suffix('.csv'), [asdict(row) for row in self.rows], BenchmarkRow.FIELDS)
        json_path = write_json(path.with_suffix('.json'), self.to_json())
        return csv_path, json_path


def _scheme_plans(graph, informed):
    plans = {ALL_SCALAR: SamplerPlan.all_scalar(graph.d), ALL_BLOCKED: SamplerPlan.all_blocked(graph.d)}
    if informed is not None:
        plans[INFORMED] = informed
    return plans


def run_case(suite, case, iterations, seed, repetitions=1, interval=ADAPTATION_INTERVAL, autoblock_config=None):
    """All rows of one case: each scheme ``repetitions`` times at the same seed."""
    base = {'suite': suite.name, 'family': case.family, 'model': case.example, 'd': case.d, 'rho': case.rho}
    try:
        graph, informed = build_example(case.example, **case.params)
    except AutoblockError as exc:
        return [BenchmarkRow(scheme=scheme, repetition=0, status='error', message=str(exc), **base)
                for scheme in case.schemes]
    base['model'] = graph.name
    base['d'] = graph.d
    plans = _scheme_plans(graph, informed)
    rows = []
    for scheme in case.schemes:
        if scheme == INFORMED and informed is None:
            continue
        detail = {}
        try:
            if scheme == AUTOBLOCK:
                config = autoblock_config or AutoblockConfig(iterations=iterations, seed=seed,
                                                             adaptation_interval=interval)
                trace = autoblock(graph, config)
                plan = trace.final_plan
                detail = {
                    'cut_height': trace.final.height,
                    'termination': trace.termination,
                    'anomaly': trace.anomaly,
                    'outer_iterations': len(trace.iterations) - 1,
                    'partition': trace.final_partition,
                }
            else:
                plan = plans[scheme]
        except Exception as exc:
            logger.warning('%s %s failed: %s', graph.name, scheme, exc)
            rows.append(BenchmarkRow(scheme=scheme, repetition=0, status='error',
                                     message=f'{type(exc).__name__}: {exc}', **base))
            continue
        for repetition in range(repetitions):
            row = BenchmarkRow(scheme=scheme, repetition=repetition, detail=dict(detail), **base)
            try:
                run = run_candidate(graph, plan, iterations, seed, interval)
            except Exception as exc:
                logger.warning('%s %s repetition %d failed: %s', graph.name, scheme, repetition, exc)
                row.status, row.message = 'error', f'{type(exc).__name__}: {exc}'
            else:
                row.fill(run.report, plan)
                if case.family == 'exp-decay':
                    row.detail['first_parameter_ess_per_10k'] = 10_000 / run.report.tau[0]
            rows.append(row)
        logger.info('%s %s: %s', graph.name, scheme, ', '.join(
            f'E={row.efficiency:.4g}' if row.status == 'ok' else row.status for row in rows[-repetitions:]
        ))
    return rows


def run_benchmark(suite_name, iterations, seed=0, repetitions=1, interval=ADAPTATION_INTERVAL):
    suite = SUITES[suite_name]
    report = BenchmarkReport(
        suite=suite.name,
        iterations=iterations,
        seed=seed,
        repetitions=repetitions,
        environment=environment(),
        started=timezone.now().isoformat(),
    )
    for case in suite.cases:
        report.rows.extend(run_case(suite, case, iterations, seed, repetitions, interval))
    if report.failed:
        logger.warning('%s: %d of %d rows failed', suite.name, len(report.failed), len(report.rows))
    return report
