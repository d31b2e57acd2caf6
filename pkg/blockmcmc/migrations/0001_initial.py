# Generated by Django 5.2.3 on 2026-10-12 09:14

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='AutoblockSearch',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('model_name', models.CharField(max_length=200, verbose_name='Model')),
                ('model_digest', models.CharField(max_length=64, verbose_name='Otisk modelu')),
                ('seed', models.PositiveIntegerField(verbose_name='Seed')),
                ('iterations', models.PositiveIntegerField(verbose_name='Iterace na běh')),
                ('grid', models.JSONField(verbose_name='Výšky řezu')),
                ('final_partition', models.JSONField(help_text='Skupiny parametrů vybraného plánu', verbose_name='Výsledné rozdělení')),
                ('final_efficiency', models.FloatField(blank=True, null=True, verbose_name='Efektivita výsledného plánu')),
                ('termination', models.CharField(max_length=40, verbose_name='Důvod ukončení')),
                ('anomaly', models.BooleanField(default=False, help_text='Poslední výběr měl nižší efektivitu než předchozí', verbose_name='Anomálie')),
                ('outer_iterations', models.PositiveIntegerField(verbose_name='Počet vnějších iterací')),
                ('trace', models.JSONField(verbose_name='Průběh hledání')),
                ('created_at', models.DateTimeField(auto_now_add=True, verbose_name='Datum vytvoření')),
            ],
            options={
                'verbose_name': 'Hledání blokování',
                'verbose_name_plural': 'Hledání blokování',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='BenchmarkResult',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('suite', models.CharField(max_length=40, verbose_name='Sada')),
                ('model_name', models.CharField(max_length=200, verbose_name='Model')),
                ('scheme', models.CharField(max_length=20, verbose_name='Schéma')),
                ('repetition', models.PositiveIntegerField(default=0, verbose_name='Opakování')),
                ('status', models.CharField(default='ok', max_length=10, verbose_name='Stav')),
                ('ess_per_10k', models.FloatField(blank=True, null=True, verbose_name='ESS / 10 000 iterací')),
                ('runtime_per_10k', models.FloatField(blank=True, null=True, verbose_name='Čas / 10 000 iterací')),
                ('efficiency', models.FloatField(blank=True, null=True, verbose_name='Efektivita')),
                ('detail', models.JSONField(blank=True, default=dict, verbose_name='Podrobnosti')),
                ('created_at', models.DateTimeField(auto_now_add=True, verbose_name='Datum vytvoření')),
            ],
            options={
                'verbose_name': 'Výsledek benchmarku',
                'verbose_name_plural': 'Výsledky benchmarků',
                'ordering': ['suite', 'model_name', 'scheme', 'repetition'],
            },
        ),
        migrations.CreateModel(
            name='SamplingRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('model_name', models.CharField(help_text='Název modelu z popisu JSON', max_length=200, verbose_name='Model')),
                ('model_digest', models.CharField(help_text='SHA-256 kanonického JSON popisu modelu', max_length=64, verbose_name='Otisk modelu')),
                ('plan', models.JSONField(help_text='Skupiny parametrů (názvy slotů), jedna skupina na sampler', verbose_name='Plán samplerů')),
                ('seed', models.PositiveIntegerField(verbose_name='Seed')),
                ('iterations', models.PositiveIntegerField(verbose_name='Počet iterací')),
                ('sampling_seconds', models.FloatField(help_text='Sekundy strávené v krocích samplerů', verbose_name='Čas samplování')),
                ('ess_per_10k', models.FloatField(blank=True, null=True, verbose_name='ESS / 10 000 iterací')),
                ('runtime_per_10k', models.FloatField(blank=True, null=True, verbose_name='Čas / 10 000 iterací')),
                ('efficiency', models.FloatField(blank=True, null=True, help_text='Efektivní vzorky za sekundu pro nejpomaleji míchající parametr', verbose_name='Efektivita')),
                ('created_at', models.DateTimeField(auto_now_add=True, verbose_name='Datum vytvoření')),
            ],
            options={
                'verbose_name': 'Běh MCMC',
                'verbose_name_plural': 'Běhy MCMC',
                'ordering': ['-created_at'],
            },
        ),
    ]
