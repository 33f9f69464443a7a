"""
Django app configuration for the genealogy pipeline.
"""

from django.apps import AppConfig


class GenealogyConfig(AppConfig):
    """
    Configuration class for the genealogy app.

    The app has no models; it contributes management commands and tests.
    """
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'genealogy'
    verbose_name = 'VaCoAl Genealogy'
