from forecast.management.base import PipelineCommand
from forecast.pipeline import predict_stage


class Command(PipelineCommand):
    help = 'Forecast the target regime on validation and test'

    def run_stage(self, config, layout, options):
        predictions = predict_stage(config, layout)
        fallbacks = sum(int(frame['fallback'].sum())
                        for frame in predictions.values())
        return (f'predictions written to {layout.predictions} '
                f'({fallbacks} prior fallbacks)')
