from blockmcmc.autoblock import AutoblockConfig, autoblock
from blockmcmc.forms import AutoblockForm
from blockmcmc.graph import load_graph
from blockmcmc.io import jsonable
from blockmcmc.management.commands._base import EngineCommand
from blockmcmc.models import AutoblockSearch


class Command(EngineCommand):
    help = 'Search for the sampler blocking with the most effective samples per second.'

    def add_arguments(self, parser):
        parser.add_argument('--model', help='Model description (JSON)')
        parser.add_argument('--iterations', type=int, help='MCMC iterations per candidate run')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--grid', help='Comma separated cut heights containing 0 and 1')
        parser.add_argument('--max-outer', type=int, help='Maximum number of outer iterations')
        parser.add_argument('--discard', type=float, help='Fraction of each chain discarded before correlating')
        parser.add_argument('--parallel', action='store_true',
                            help='Score candidates in a process pool (runtimes become unreliable)')
        parser.add_argument('--workers', type=int)
        parser.add_argument('--out', default='autoblock.json', help='Trace report; relative paths go to the report directory')
        parser.add_argument('--record', action='store_true', help='Archive the search in the database')

    def run(self, **options):
        self.require(options, 'model')
        form = AutoblockForm({key: options.get(key) for key in AutoblockForm.base_fields})
        self.validate(form)
        graph = load_graph(options['model'])
        config = AutoblockConfig.from_settings(**form.config_overrides())
        trace = autoblock(graph, config)

        document = trace.to_json()
        document['model_digest'] = graph.digest
        path = self.write_document(options['out'], document)
        if options['record']:
            self.record(graph, trace)

        final = trace.final
        self.stdout.write(
            f'{graph.name}: {trace.termination} after {len(trace.iterations) - 1} iterations; '
            f'h={final.height:g}, {final.plan.describe()}, E={final.efficiency:.4g}/s'
        )
        for group in trace.final_partition:
            if len(group) > 1:
                self.stdout.write(f'  block: {", ".join(group)}')
        self.stdout.write(f'Wrote {path}')

    def record(self, graph, trace):
        return AutoblockSearch.objects.create(
            model_name=graph.name,
            model_digest=graph.digest,
            seed=trace.config.seed,
            iterations=trace.config.iterations,
            grid=list(trace.config.grid),
            final_partition=trace.final_partition,
            final_efficiency=trace.final.efficiency,
            termination=trace.termination,
            anomaly=trace.anomaly,
            outer_iterations=len(trace.iterations) - 1,
            trace=jsonable(trace.to_json()),
        )
