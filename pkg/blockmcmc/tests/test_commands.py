import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings

from blockmcmc.io import write_json
from blockmcmc.models import AutoblockSearch, SamplingRun

TWO_NORMALS = {'name': 'two', 'nodes': [
    {'name': 'a', 'kind': 'parameter', 'family': 'normal', 'params': {'mean': 0, 'sd': 1}},
    {'name': 'b', 'kind': 'parameter', 'family': 'normal', 'params': {'mean': 'a', 'sd': 1}},
]}


class CommandTestMixin:
    def setUp(self):
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.tmp = Path(directory.name)
        self.model = str(write_json(self.tmp / 'model.json', TWO_NORMALS))

    def call(self, *args):
        stdout, stderr = StringIO(), StringIO()
        call_command(*args, stdout=stdout, stderr=stderr)
        return stdout.getvalue()

    def assertExitCode(self, code, *args):
        stderr = StringIO()
        with self.assertRaises(CommandError) as cm:
            call_command(*args, stdout=StringIO(), stderr=stderr)
        self.assertEqual(cm.exception.returncode, code)
        error = json.loads(stderr.getvalue().strip())
        self.assertEqual(error['exit_code'], code)
        return error


class ExamplesCommandTests(CommandTestMixin, SimpleTestCase):
    def test_list(self):
        output = self.call('examples', 'list')
        for name in ('fixed-rho', 'random-effects', 'spatial'):
            self.assertIn(name, output)

    def test_export_to_stdout(self):
        description = json.loads(self.call('examples', 'export', 'normals', '--param', 'd=3'))
        self.assertEqual([node['name'] for node in description['nodes']], ['x1', 'x2', 'x3'])

    def test_export_with_plan(self):
        out = self.tmp / 're.json'
        self.call('examples', 'export', 'random-effects', '--param', 'per_group=2', '--out', str(out), '--with-plan')
        plan = json.loads((self.tmp / 're.plan.json').read_text())
        self.assertEqual(plan[0], ['alpha_1', 'beta_1'])
        self.assertEqual(json.loads(out.read_text())['name'], 'random-effects')

    def test_unknown_action(self):
        self.assertExitCode(1, 'examples', 'show')

    def test_export_needs_a_name(self):
        self.assertExitCode(1, 'examples', 'export')

    def test_bad_parameter(self):
        self.assertExitCode(2, 'examples', 'export', 'mvn', '--param', 'rho=2')


class RunCommandTests(CommandTestMixin, SimpleTestCase):
    def run_chain(self, name, *extra):
        out = self.tmp / name
        self.call('run', '--model', self.model, '--iterations', '1000', '--seed', '4', '--out', str(out), *extra)
        return out

    def test_chain_and_sidecar(self):
        out = self.run_chain('chain.csv')
        lines = out.read_text().splitlines()
        self.assertEqual(len(lines), 1001)
        self.assertEqual(lines[0], 'a,b')
        sidecar = json.loads(out.with_suffix('.json').read_text())
        self.assertEqual(sidecar['seed'], 4)
        self.assertEqual(sidecar['iterations'], 1000)
        self.assertIn('ess_per_10k', sidecar['report'])

    def test_same_seed_same_bytes(self):
        first = self.run_chain('first.csv').read_bytes()
        second = self.run_chain('second.csv').read_bytes()
        self.assertEqual(first, second)

    def test_explicit_plan(self):
        out = self.run_chain('blocked.csv', '--plan', '[["a", "b"]]')
        sidecar = json.loads(out.with_suffix('.json').read_text())
        self.assertEqual(sidecar['plan'], [{'type': 'block', 'slots': ['a', 'b']}])

    def test_plan_file(self):
        plan = write_json(self.tmp / 'two.plan.json', [['b', 'a']])
        out = self.run_chain('from-file.csv', '--plan', str(plan))
        sidecar = json.loads(out.with_suffix('.json').read_text())
        self.assertEqual(sidecar['plan'], [{'type': 'block', 'slots': ['a', 'b']}])

    def test_exported_plan_file(self):
        model = self.tmp / 're.json'
        self.call('examples', 'export', 'random-effects', '--param', 'per_group=2', '--out', str(model), '--with-plan')
        out = self.tmp / 're.csv'
        self.call('run', '--model', str(model), '--plan', str(self.tmp / 're.plan.json'),
                  '--iterations', '200', '--out', str(out))
        sidecar = json.loads(out.with_suffix('.json').read_text())
        self.assertEqual(sidecar['plan'][0], {'type': 'block', 'slots': ['alpha_1', 'beta_1']})

    def test_missing_plan_file(self):
        error = self.assertExitCode(1, 'run', '--model', self.model, '--plan', str(self.tmp / 'missing.plan.json'))
        self.assertIn('plan', error['fields'])

    def test_overlapping_plan(self):
        error = self.assertExitCode(1, 'run', '--model', self.model, '--iterations', '100',
                                    '--plan', '[["a", "b"], ["b"]]', '--out', str(self.tmp / 'x.csv'))
        self.assertEqual(error['error'], 'PlanError')

    def test_unreadable_plan(self):
        self.assertExitCode(1, 'run', '--model', self.model, '--plan', 'some-blocks')

    def test_missing_model_option(self):
        self.assertExitCode(1, 'run', '--iterations', '100')

    def test_missing_model_file(self):
        error = self.assertExitCode(2, 'run', '--model', str(self.tmp / 'missing.json'), '--iterations', '100')
        self.assertEqual(error['error'], 'InvalidModel')

    def test_invalid_model(self):
        cyclic = write_json(self.tmp / 'cyclic.json', {'nodes': [
            {'name': 'x', 'kind': 'parameter', 'family': 'normal', 'params': {'mean': 'x', 'sd': 1}},
        ]})
        self.assertExitCode(2, 'run', '--model', str(cyclic), '--iterations', '100')

    def test_bad_iterations(self):
        for iterations in ('0', '-5'):
            with self.subTest(iterations):
                error = self.assertExitCode(1, 'run', '--model', self.model, '--iterations', iterations)
                self.assertIn('iterations', error['fields'])

    def test_relative_output_goes_to_report_directory(self):
        with override_settings(AUTOBLOCK={'REPORT_DIR': str(self.tmp / 'reports')}):
            self.call('run', '--model', self.model, '--iterations', '100', '--out', 'relative.csv')
        self.assertTrue((self.tmp / 'reports' / 'relative.csv').exists())
        self.assertTrue((self.tmp / 'reports' / 'relative.json').exists())


class AutoblockCommandTests(CommandTestMixin, SimpleTestCase):
    def test_single_outer_iteration(self):
        out = self.tmp / 'trace.json'
        output = self.call('autoblock', '--model', self.model, '--iterations', '300', '--max-outer', '1',
                           '--out', str(out))
        document = json.loads(out.read_text())
        self.assertEqual(len(document['iterations']), 2)
        self.assertIn(document['termination'], ('repeated-plan', 'efficiency-decreased', 'max-outer-iterations'))
        self.assertEqual(len(document['model_digest']), 64)
        self.assertIn('Wrote', output)

    def test_bad_grid(self):
        error = self.assertExitCode(1, 'autoblock', '--model', self.model, '--grid', '0,0.5')
        self.assertIn('grid', error['fields'])

    def test_too_few_iterations(self):
        self.assertExitCode(1, 'autoblock', '--model', self.model, '--iterations', '50')


class BenchmarkCommandTests(CommandTestMixin, SimpleTestCase):
    def test_lists_suites_without_a_name(self):
        output = self.call('benchmark')
        for name in ('timing-sweep', 'efficiency-sweep', 'toy-fixed-rho', 'toy-varying-rho', 'applied'):
            self.assertIn(name, output)

    def test_unknown_suite(self):
        self.assertExitCode(1, 'benchmark', 'nope')

    def test_repetitions_must_be_positive(self):
        self.assertExitCode(1, 'benchmark', 'applied', '--repetitions', '0')


class RecordTests(CommandTestMixin, TestCase):
    def test_run_is_archived(self):
        self.call('run', '--model', self.model, '--iterations', '200', '--out', str(self.tmp / 'c.csv'), '--record')
        run = SamplingRun.objects.get()
        self.assertEqual(run.model_name, 'two')
        self.assertEqual(run.plan, [['a'], ['b']])
        self.assertEqual(run.iterations, 200)
        self.assertIsNotNone(run.ess_per_10k)

    def test_search_is_archived(self):
        self.call('autoblock', '--model', self.model, '--iterations', '200', '--max-outer', '1',
                  '--out', str(self.tmp / 't.json'), '--record')
        search = AutoblockSearch.objects.get()
        self.assertEqual(search.outer_iterations, 1)
        self.assertEqual(search.grid[0], 0.0)
        self.assertEqual(len(search.trace['iterations']), 2)
