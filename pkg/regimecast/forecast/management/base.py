from django.core.management.base import BaseCommand, CommandError

from backtest.ledger import MODES
from forecast.artifacts import RunLayout
from forecast.config import RunConfig, load_config
from regimecast.errors import DataError, InvalidArgumentError


class PipelineCommand(BaseCommand):
    """Общие флаги этапов и перевод ошибок в коды выхода"""

    stage_help = ''

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True,
                            help='JSON run configuration')
        parser.add_argument('--out', default=None,
                            help='artifacts root (default: settings)')
        parser.add_argument('--offline', action='store_true',
                            help='serve series from cache or fixtures only')
        parser.add_argument('--seed', type=int, default=None,
                            help='override the configured seed')
        parser.add_argument('--raw-labels', action='store_true',
                            help='keep raw Viterbi state indices')
        parser.add_argument('--chunk', type=int, default=None,
                            help='train HMMs on chunks of this length')
        parser.add_argument('--backtest-mode', choices=MODES, default=None)

    def run_stage(self, config: RunConfig, layout: RunLayout,
                  options) -> str:
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            config = load_config(options['config']).with_overrides(
                seed=options['seed'],
                raw_labels=options['raw_labels'],
                chunk=options['chunk'],
                backtest_mode=options['backtest_mode'],
            )
            layout = RunLayout.for_run(config.name, options['out'])
            message = self.run_stage(config, layout, options)
        except InvalidArgumentError as exc:
            raise CommandError(str(exc), returncode=1) from exc
        except DataError as exc:
            raise CommandError(str(exc), returncode=2) from exc
        if message:
            self.stdout.write(self.style.SUCCESS(message))
