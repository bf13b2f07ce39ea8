from django.apps import AppConfig


class HolesConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'holes'
    verbose_name = 'Hole ladder over a condensate'
