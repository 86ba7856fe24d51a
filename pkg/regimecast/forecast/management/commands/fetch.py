from forecast.management.base import PipelineCommand
from forecast.pipeline import fetch_stage


class Command(PipelineCommand):
    help = 'Download every configured series into the cache'

    def run_stage(self, config, layout, options):
        count = fetch_stage(config, layout, options['offline'])
        return f'{count} series available'
