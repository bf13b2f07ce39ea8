from django.apps import AppConfig


class TruncationConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'truncation'
    verbose_name = 'Energy-truncated coherent states'
