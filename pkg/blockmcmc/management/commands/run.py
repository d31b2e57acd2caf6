from pathlib import Path

from blockmcmc.conf import autoblock_setting
from blockmcmc.diagnostics import MIN_SAMPLES, efficiency_report
from blockmcmc.forms import PLAN_CHOICES, RunForm
from blockmcmc.graph import load_graph
from blockmcmc.io import run_metadata, sidecar_path, write_chain_csv, write_json
from blockmcmc.management.commands._base import EngineCommand
from blockmcmc.models import SamplingRun
from blockmcmc.samplers import SamplerPlan, run_mcmc


class Command(EngineCommand):
    help = 'Run one sampler plan on a model; writes the chain as CSV and a JSON sidecar with the report.'

    def add_arguments(self, parser):
        parser.add_argument('--model', help='Model description (JSON)')
        parser.add_argument('--plan', default='all-scalar',
                            help='all-scalar, all-blocked, a JSON list of slot-name groups, or a file holding one')
        parser.add_argument('--iterations', type=int, help='Number of MCMC iterations')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--out', default='chain.csv', help='Chain CSV; relative paths go to the report directory')
        parser.add_argument('--record', action='store_true', help='Archive the run in the database')

    def run(self, **options):
        self.require(options, 'model')
        data = self.validate(RunForm({
            'plan': self.plan_text(options['plan']),
            'iterations': (options['iterations'] if options['iterations'] is not None
                           else autoblock_setting('DEFAULT_ITERATIONS')),
            'seed': options['seed'],
        }))
        graph = load_graph(options['model'])
        plan = self.build_plan(graph, data['plan'])
        chain = run_mcmc(graph, plan, data['iterations'], data['seed'], autoblock_setting('ADAPTATION_INTERVAL'))
        report = efficiency_report(chain) if chain.iterations >= MIN_SAMPLES else None

        csv_path = write_chain_csv(self.output_path(options['out']), chain)
        json_path = write_json(sidecar_path(csv_path), run_metadata(graph, chain, report))
        if options['record']:
            self.record(graph, chain, report)

        summary = f'{graph.name}: {chain.iterations} iterations of {plan.describe()} in {chain.sampling_seconds:.3f}s'
        if report is not None:
            summary += f', ESS/10k={report.ess_per_10k:.1f}, E={report.efficiency:.4g}/s'
        self.stdout.write(summary)
        self.stdout.write(f'Wrote {csv_path} and {json_path}')

    def plan_text(self, plan):
        """Inline plans pass through; an existing file (such as an exported .plan.json) is read."""
        if plan in PLAN_CHOICES or plan.lstrip().startswith('['):
            return plan
        path = Path(plan)
        return path.read_text(encoding='utf-8') if path.is_file() else plan

    def build_plan(self, graph, spec):
        if spec == 'all-scalar':
            return SamplerPlan.all_scalar(graph.d)
        if spec == 'all-blocked':
            return SamplerPlan.all_blocked(graph.d)
        return SamplerPlan.from_names(spec, graph.slot_names)

    def record(self, graph, chain, report):
        return SamplingRun.objects.create(
            model_name=graph.name,
            model_digest=graph.digest,
            plan=[[chain.slot_names[k] for k in group] for group in chain.plan.groups],
            seed=chain.seed,
            iterations=chain.iterations,
            sampling_seconds=chain.sampling_seconds,
            ess_per_10k=report.ess_per_10k if report else None,
            runtime_per_10k=report.runtime_per_10k if report else None,
            efficiency=report.efficiency if report else None,
        )
