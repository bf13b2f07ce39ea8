from django.apps import AppConfig


class WavepacketsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'wavepackets'
    verbose_name = 'Gaussian wave packets and permanents'
