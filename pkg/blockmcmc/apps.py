from django.apps import AppConfig


class BlockMcmcConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'blockmcmc'
    verbose_name = 'Automated blocking MCMC'
