from forecast.management.base import PipelineCommand
from forecast.management.commands.backtest import describe
from forecast.pipeline import run_pipeline


class Command(PipelineCommand):
    help = 'Run every stage from fetch to backtest'

    def run_stage(self, config, layout, options):
        summary = run_pipeline(config, layout, options['offline'])
        return f'{layout.root}: {describe(summary)}'
