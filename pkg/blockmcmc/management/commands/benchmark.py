from pathlib import Path

from blockmcmc.bench import SUITES, run_benchmark
from blockmcmc.conf import autoblock_setting
from blockmcmc.forms import BenchmarkForm
from blockmcmc.io import jsonable
from blockmcmc.management.commands._base import RUNTIME_FAILURE, EngineCommand
from blockmcmc.models import BenchmarkResult


class Command(EngineCommand):
    help = 'Compare AllScalar, AllBlocked, Informed and AutoBlock sampling over a suite of models.'

    def add_arguments(self, parser):
        parser.add_argument('suite', nargs='?', help='Suite name; omit to list the suites')
        parser.add_argument('--iterations', type=int, help='MCMC iterations per run')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--repetitions', type=int, help='Timed runs per scheme and model')
        parser.add_argument('--out', help='Output basename for .csv and .json (default benchmark-<suite>)')
        parser.add_argument('--record', action='store_true', help='Archive the rows in the database')

    def run(self, **options):
        if not options['suite']:
            self.stdout.write('Available suites:')
            for suite in SUITES.values():
                self.stdout.write(f'  {suite.name:<18} {suite.help} ({len(suite.cases)} models)')
            return
        data = self.validate(BenchmarkForm({
            'suite': options['suite'],
            'iterations': options['iterations'],
            'seed': options['seed'],
            'repetitions': options['repetitions'],
        }))
        report = run_benchmark(
            data['suite'], data['iterations'], data['seed'], data['repetitions'],
            autoblock_setting('ADAPTATION_INTERVAL'),
        )
        csv_path, json_path = report.write(self.output_path(Path(options['out'] or f'benchmark-{data["suite"]}')))
        if options['record']:
            self.record(report)

        for row in report.rows:
            if row.status == 'ok':
                self.stdout.write(
                    f'{row.model:<28} {row.scheme:<10} ESS={row.ess_per_10k:9.1f} '
                    f'Runtime={row.runtime_per_10k:9.3f} Efficiency={row.efficiency:9.2f}'
                )
            else:
                self.stdout.write(f'{row.model:<28} {row.scheme:<10} {row.status}: {row.message}')
        self.stdout.write(f'Wrote {csv_path} and {json_path}')
        if report.rows and len(report.failed) == len(report.rows):
            self.fail('BenchmarkFailed', f'Every row of {report.suite} failed', RUNTIME_FAILURE)

    def record(self, report):
        BenchmarkResult.objects.bulk_create([
            BenchmarkResult(
                suite=row.suite,
                model_name=row.model,
                scheme=row.scheme,
                repetition=row.repetition,
                status=row.status,
                ess_per_10k=row.ess_per_10k,
                runtime_per_10k=row.runtime_per_10k,
                efficiency=row.efficiency,
                detail=jsonable({**row.detail, 'plan': row.plan, 'message': row.message}),
            )
            for row in report.rows
        ])
