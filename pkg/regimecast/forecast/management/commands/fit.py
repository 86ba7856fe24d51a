from forecast.management.base import PipelineCommand
from forecast.pipeline import fit_stage


class Command(PipelineCommand):
    help = 'Estimate the conditional probability tables'

    def run_stage(self, config, layout, options):
        net = fit_stage(config, layout)
        return f'{net!r} written to {layout.network}'
