from pathlib import Path

from bayesnet.storage import dag_to_dot
from forecast.artifacts import load_structure
from forecast.management.base import PipelineCommand
from regimecast.errors import InvalidArgumentError
from structure.independence import ic_learn
from timeseries.series import read_panel


class Command(PipelineCommand):
    help = 'Print the learned graph or an IC graph as DOT'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--output', default=None,
                            help='write to this file instead of stdout')
        parser.add_argument('--ic', action='store_true',
                            help='learn a CPDAG from the training regimes')
        parser.add_argument('--alpha', type=float, default=None)

    def run_stage(self, config, layout, options):
        if options['ic']:
            regimes = read_panel(
                layout.require(layout.regimes('train'), 'discretize'),
            )
            dot = ic_learn(regimes, options['alpha']).to_dot(config.name)
        else:
            dag = load_structure(layout.require(layout.structure, 'learn'))
            dot = dag_to_dot(dag, name=config.name)
        if options['output'] is None:
            self.stdout.write(dot, ending='')
            return ''
        try:
            Path(options['output']).write_text(dot, encoding='utf-8')
        except OSError as exc:
            raise InvalidArgumentError(
                f'cannot write {options["output"]}: {exc}'
            ) from exc
        return f'DOT written to {options["output"]}'
