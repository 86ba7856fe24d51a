from forecast.management.base import PipelineCommand
from forecast.pipeline import load_models, plot_data_stage
from hmm.model import stationary_distribution


class Command(PipelineCommand):
    help = 'Write per-series value/regime tables for plotting'

    def run_stage(self, config, layout, options):
        series = plot_data_stage(config, layout)
        models = load_models(layout)
        for series_id, model in models.hmms.items():
            remap = models.remaps[series_id]
            stationary = stationary_distribution(model)
            by_label = [0.0] * len(stationary)
            for raw, label in enumerate(remap.permutation):
                by_label[label] = stationary[raw]
            self.stdout.write('{}: stationary {}'.format(
                series_id, ' '.join(f'{p:.3f}' for p in by_label),
            ))
        return f'{len(series)} tables written to {layout.plots}'
