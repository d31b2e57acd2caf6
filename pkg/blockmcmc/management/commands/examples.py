import json

from blockmcmc.example_models import EXAMPLES, build_example
from blockmcmc.io import dumps, write_json
from blockmcmc.management.commands._base import USAGE, EngineCommand


def parse_param(text):
    key, sep, value = text.partition('=')
    if not sep or not key:
        raise ValueError(text)
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


class Command(EngineCommand):
    help = 'List the example models or export one as a JSON model description.'

    def add_arguments(self, parser):
        parser.add_argument('action', nargs='?', default='list', help='list or export')
        parser.add_argument('name', nargs='?', help='Example to export')
        parser.add_argument('--param', action='append', default=[], metavar='KEY=VALUE',
                            help='Generator parameter, e.g. rho=0.5 (repeatable)')
        parser.add_argument('--out', help='Output file; relative paths go to the report directory. Default: stdout')
        parser.add_argument('--with-plan', action='store_true',
                            help='Also write the informed plan next to the model, when the example has one')

    def run(self, **options):
        if options['action'] not in ('list', 'export'):
            self.fail('UsageError', f'Unknown action {options["action"]!r}; use list or export', USAGE)
        if options['action'] == 'list':
            for spec in EXAMPLES.values():
                defaults = ', '.join(f'{key}={value}' for key, value in spec.defaults.items() if key != 'sizes')
                self.stdout.write(f'{spec.name:<26} {spec.help}' + (f' [{defaults}]' if defaults else ''))
            return
        if not options['name']:
            self.fail('UsageError', 'examples export needs an example name', USAGE)
        try:
            params = dict(parse_param(text) for text in options['param'])
        except ValueError as exc:
            self.fail('UsageError', f'Parameters are KEY=VALUE, got {exc.args[0]!r}', USAGE)
        graph, informed = build_example(options['name'], **params)

        if not options['out']:
            self.stdout.write(dumps(graph.description))
            return
        path = write_json(self.output_path(options['out']), graph.description)
        self.stdout.write(f'Wrote {graph.name} (d={graph.d}) to {path}')
        if options['with_plan'] and informed is not None:
            plan_path = write_json(path.with_name(f'{path.stem}.plan.json'), [
                [graph.slot_names[k] for k in group] for group in informed.groups
            ])
            self.stdout.write(f'Wrote informed plan to {plan_path}')
