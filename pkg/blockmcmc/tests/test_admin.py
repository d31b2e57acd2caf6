from django.contrib import admin
from django.contrib.auth.models import User
from django.test import TestCase
from django.urls import reverse

from blockmcmc.models import AutoblockSearch, BenchmarkResult, SamplingRun


class AdminTests(TestCase):
    def setUp(self):
        user = User.objects.create_superuser('admin', 'admin@example.com', 'secret')
        self.client.force_login(user)
        SamplingRun.objects.create(model_name='two', model_digest='0' * 64, plan=[['a', 'b']], seed=0,
                                   iterations=100, sampling_seconds=0.1)
        AutoblockSearch.objects.create(
            model_name='two', model_digest='0' * 64, seed=0, iterations=100, grid=[0.0, 1.0],
            final_partition=[['a', 'b'], ['c']], termination='repeated-plan', outer_iterations=1, trace={},
        )
        BenchmarkResult.objects.create(suite='applied', model_name='two', scheme='AllScalar')

    def test_archive_models_are_registered(self):
        for model in (SamplingRun, AutoblockSearch, BenchmarkResult):
            self.assertTrue(admin.site.is_registered(model), model.__name__)

    def test_changelists(self):
        for model in ('samplingrun', 'autoblocksearch', 'benchmarkresult'):
            with self.subTest(model):
                response = self.client.get(reverse(f'admin:blockmcmc_{model}_changelist'))
                self.assertEqual(response.status_code, 200)

    def test_block_sizes_column(self):
        response = self.client.get(reverse('admin:blockmcmc_autoblocksearch_changelist'))
        self.assertContains(response, 'Bloky')
