from forecast.management.base import PipelineCommand
from forecast.pipeline import ingest_stage


class Command(PipelineCommand):
    help = 'Clean, align and split the series into panels'

    def run_stage(self, config, layout, options):
        panel = ingest_stage(config, layout, options['offline'])
        return (f'panel of {len(panel)} months and {panel.shape[1]} columns '
                f'written to {layout.panels}')
