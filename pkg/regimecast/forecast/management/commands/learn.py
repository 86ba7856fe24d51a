from dataclasses import replace

from forecast.management.base import PipelineCommand
from forecast.pipeline import learn_stage


class Command(PipelineCommand):
    help = 'Learn the network structure from the training regimes'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            '--select-score', action='store_true',
            help='pick BIC, K2 or BDeu by validation error',
        )

    def run_stage(self, config, layout, options):
        if options['select_score']:
            config = replace(config, select_score=True)
        dag = learn_stage(config, layout)
        return f'{len(dag.edges)} edges written to {layout.structure}'
