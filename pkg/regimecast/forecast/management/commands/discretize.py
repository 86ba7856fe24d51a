from forecast.management.base import PipelineCommand
from forecast.pipeline import discretize_stage


class Command(PipelineCommand):
    help = 'Train per-series HMMs and decode regime panels'

    def run_stage(self, config, layout, options):
        rows = discretize_stage(config, layout)
        return 'regimes: ' + ', '.join(
            f'{name} {count}' for name, count in rows.items()
        )
