from django.apps import AppConfig


class PlaserConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'plaser'
    verbose_name = 'Pion-laser wave-packet model'
