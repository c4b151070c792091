from django.apps import AppConfig


class DivergencesConfig(AppConfig):
    name = 'divergences'
    verbose_name = 'Decomposable model divergences'
