from django.apps import AppConfig


class HmmConfig(AppConfig):
    name = 'hmm'
    verbose_name = 'Скрытые марковские модели'
