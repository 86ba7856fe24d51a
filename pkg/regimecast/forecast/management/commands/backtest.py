from forecast.management.base import PipelineCommand
from forecast.pipeline import backtest_stage


def describe(summary: dict) -> str:
    strategy = summary['ledgers']['strategy']
    baseline = summary['ledgers']['buy_and_hold']
    return (
        f"{summary['mode']} ledger: final {strategy['final_equity']:.2f}, "
        f"buy-and-hold {baseline['final_equity']:.2f}, "
        f"test direct error {summary['test_error']['direct_error']:.3f}"
    )


class Command(PipelineCommand):
    help = 'Trade the test predictions against buy-and-hold'

    def run_stage(self, config, layout, options):
        return describe(backtest_stage(config, layout))
