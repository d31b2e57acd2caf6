from django.db import models


# Tabulka pro jednotlivé běhy MCMC (příkaz run --record)
class SamplingRun(models.Model):
    model_name = models.CharField(
        max_length=200,
        verbose_name='Model',
        help_text='Název modelu z popisu JSON'
    )
    model_digest = models.CharField(
        max_length=64,
        verbose_name='Otisk modelu',
        help_text='SHA-256 kanonického JSON popisu modelu'
    )
    plan = models.JSONField(
        verbose_name='Plán samplerů',
        help_text='Skupiny parametrů (názvy slotů), jedna skupina na sampler'
    )
    seed = models.PositiveIntegerField(verbose_name='Seed')
    iterations = models.PositiveIntegerField(verbose_name='Počet iterací')
    sampling_seconds = models.FloatField(
        verbose_name='Čas samplování',
        help_text='Sekundy strávené v krocích samplerů'
    )
    ess_per_10k = models.FloatField(null=True, blank=True, verbose_name='ESS / 10 000 iterací')
    runtime_per_10k = models.FloatField(null=True, blank=True, verbose_name='Čas / 10 000 iterací')
    efficiency = models.FloatField(
        null=True,
        blank=True,
        verbose_name='Efektivita',
        help_text='Efektivní vzorky za sekundu pro nejpomaleji míchající parametr'
    )
    created_at = models.DateTimeField(auto_now_add=True, verbose_name='Datum vytvoření')

    class Meta:
        ordering = ['-created_at']
        verbose_name = 'Běh MCMC'
        verbose_name_plural = 'Běhy MCMC'

    def __str__(self):
        return f'{self.model_name} ({self.iterations} iterací, seed {self.seed})'


# Tabulka pro výsledky automatického blokování (příkaz autoblock --record)
class AutoblockSearch(models.Model):
    model_name = models.CharField(max_length=200, verbose_name='Model')
    model_digest = models.CharField(max_length=64, verbose_name='Otisk modelu')
    seed = models.PositiveIntegerField(verbose_name='Seed')
    iterations = models.PositiveIntegerField(verbose_name='Iterace na běh')
    grid = models.JSONField(verbose_name='Výšky řezu')
    final_partition = models.JSONField(
        verbose_name='Výsledné rozdělení',
        help_text='Skupiny parametrů vybraného plánu'
    )
    final_efficiency = models.FloatField(null=True, blank=True, verbose_name='Efektivita výsledného plánu')
    termination = models.CharField(max_length=40, verbose_name='Důvod ukončení')
    anomaly = models.BooleanField(
        default=False,
        verbose_name='Anomálie',
        help_text='Poslední výběr měl nižší efektivitu než předchozí'
    )
    outer_iterations = models.PositiveIntegerField(verbose_name='Počet vnějších iterací')
    trace = models.JSONField(verbose_name='Průběh hledání')
    created_at = models.DateTimeField(auto_now_add=True, verbose_name='Datum vytvoření')

    class Meta:
        ordering = ['-created_at']
        verbose_name = 'Hledání blokování'
        verbose_name_plural = 'Hledání blokování'

    def __str__(self):
        return f'{self.model_name}: {self.termination} po {self.outer_iterations} iteracích'


# Tabulka pro řádky benchmarků (příkaz benchmark --record)
class BenchmarkResult(models.Model):
    suite = models.CharField(max_length=40, verbose_name='Sada')
    model_name = models.CharField(max_length=200, verbose_name='Model')
    scheme = models.CharField(max_length=20, verbose_name='Schéma')
    repetition = models.PositiveIntegerField(default=0, verbose_name='Opakování')
    status = models.CharField(max_length=10, default='ok', verbose_name='Stav')
    ess_per_10k = models.FloatField(null=True, blank=True, verbose_name='ESS / 10 000 iterací')
    runtime_per_10k = models.FloatField(null=True, blank=True, verbose_name='Čas / 10 000 iterací')
    efficiency = models.FloatField(null=True, blank=True, verbose_name='Efektivita')
    detail = models.JSONField(default=dict, blank=True, verbose_name='Podrobnosti')
    created_at = models.DateTimeField(auto_now_add=True, verbose_name='Datum vytvoření')

    class Meta:
        ordering = ['suite', 'model_name', 'scheme', 'repetition']
        verbose_name = 'Výsledek benchmarku'
        verbose_name_plural = 'Výsledky benchmarků'

    def __str__(self):
        return f'{self.suite} / {self.model_name} / {self.scheme}'
