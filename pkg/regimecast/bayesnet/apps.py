from django.apps import AppConfig


class BayesnetConfig(AppConfig):
    name = 'bayesnet'
    verbose_name = 'Байесовские сети'
