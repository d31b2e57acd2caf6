from django.contrib import admin
from .models import SamplingRun, AutoblockSearch, BenchmarkResult


@admin.register(SamplingRun)
class SamplingRunAdmin(admin.ModelAdmin):
    list_display = ('id', 'model_name', 'seed', 'iterations', 'ess_per_10k', 'runtime_per_10k', 'efficiency', 'created_at')
    search_fields = ('model_name', 'model_digest')  # Search by model name or digest
    list_filter = ('model_name', 'created_at')
    readonly_fields = ('created_at',)


@admin.register(AutoblockSearch)
class AutoblockSearchAdmin(admin.ModelAdmin):
    list_display = ('id', 'model_name', 'seed', 'termination', 'anomaly', 'outer_iterations', 'get_blocks', 'final_efficiency')
    search_fields = ('model_name', 'model_digest')
    list_filter = ('termination', 'anomaly', 'created_at')
    readonly_fields = ('created_at',)

    def get_blocks(self, obj):
        return ", ".join(str(len(group)) for group in obj.final_partition if len(group) > 1) or "-"
    get_blocks.short_description = 'Bloky'


@admin.register(BenchmarkResult)
class BenchmarkResultAdmin(admin.ModelAdmin):
    list_display = ('id', 'suite', 'model_name', 'scheme', 'repetition', 'status', 'efficiency')
    search_fields = ('model_name', 'suite')
    list_filter = ('suite', 'scheme', 'status')  # Compare schemes within a suite
