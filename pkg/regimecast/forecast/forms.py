from django import forms

from acquisition.client import SOURCES
from backtest.ledger import MODES
from bayesnet.estimators import PRIORS
from structure.scores import PENALTIES, SCORES


def _choices(values):
    return [(value, value) for value in values]


def nested(form_class, value, section: str) -> dict:
    """Validate a JSON object with `form_class`; only given keys survive."""
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise forms.ValidationError(f'{section} must be an object')
    unknown = sorted(set(value) - set(form_class.base_fields))
    if unknown:
        raise forms.ValidationError(f'{section}: unknown keys {unknown}')
    form = form_class(data=value)
    if not form.is_valid():
        problems = '; '.join(
            f'{field}: {" ".join(errors)}'
            for field, errors in form.errors.items()
        )
        raise forms.ValidationError(f'{section}: {problems}')
    return {key: form.cleaned_data[key] for key in value}


def edge_list(value, section: str):
    if value is None:
        return []
    if not isinstance(value, list) or not all(
            isinstance(edge, list) and len(edge) == 2
            and all(isinstance(name, str) for name in edge)
            for edge in value):
        raise forms.ValidationError(
            f'{section} must be a list of [parent, child] pairs'
        )
    return [tuple(edge) for edge in value]


class DatasetForm(forms.Form):
    source = forms.ChoiceField(choices=_choices(SOURCES))
    series_id = forms.CharField(max_length=64)
    path = forms.CharField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        if cleaned_data.get('source') == 'CSV' and \
                not cleaned_data.get('path'):
            raise forms.ValidationError('CSV datasets need a path')
        return cleaned_data


class HmmSettingsForm(forms.Form):
    n_states = forms.IntegerField(min_value=2, required=False)
    bw_iters = forms.IntegerField(min_value=1, required=False)
    tol = forms.FloatField(min_value=0, required=False)
    chunk = forms.IntegerField(min_value=1, required=False)
    raw_labels = forms.BooleanField(required=False)


class SearchSettingsForm(forms.Form):
    score = forms.ChoiceField(choices=_choices(SCORES), required=False)
    ess = forms.FloatField(required=False)
    penalty = forms.ChoiceField(choices=_choices(PENALTIES), required=False)
    tabu_size = forms.IntegerField(min_value=0, required=False)
    max_iters = forms.IntegerField(min_value=0, required=False)
    n_random_ops = forms.IntegerField(min_value=0, required=False)
    n_restarts = forms.IntegerField(min_value=0, required=False)
    max_parents = forms.IntegerField(min_value=0, required=False)
    expert_edges = forms.JSONField(required=False)
    forbidden_edges = forms.JSONField(required=False)
    required_edges = forms.JSONField(required=False)
    select_score = forms.BooleanField(required=False)

    def clean_ess(self):
        ess = self.cleaned_data['ess']
        if ess is not None and ess <= 0:
            raise forms.ValidationError('must be positive')
        return ess

    def clean_expert_edges(self):
        return edge_list(self.cleaned_data['expert_edges'], 'expert_edges')

    def clean_forbidden_edges(self):
        return edge_list(self.cleaned_data['forbidden_edges'],
                         'forbidden_edges')

    def clean_required_edges(self):
        return edge_list(self.cleaned_data['required_edges'],
                         'required_edges')


class FitSettingsForm(forms.Form):
    prior = forms.ChoiceField(choices=_choices(('mle',) + PRIORS),
                              required=False)
    ess = forms.FloatField(required=False)

    def clean_ess(self):
        ess = self.cleaned_data['ess']
        if ess is not None and ess <= 0:
            raise forms.ValidationError('must be positive')
        return ess


class BacktestSettingsForm(forms.Form):
    mode = forms.ChoiceField(choices=_choices(MODES), required=False)
    reference_forecast = forms.CharField(required=False)


class RunConfigForm(forms.Form):
    """Конфигурация запуска конвейера"""

    name = forms.SlugField(max_length=64)
    seed = forms.IntegerField(min_value=0)
    price_id = forms.CharField(max_length=64, required=False)
    datasets = forms.JSONField(required=False)
    split = forms.JSONField(required=False)
    hmm = forms.JSONField(required=False)
    search = forms.JSONField(required=False)
    fit = forms.JSONField(required=False)
    backtest = forms.JSONField(required=False)

    def clean_datasets(self):
        value = self.cleaned_data['datasets']
        if value is None:
            return None
        if not isinstance(value, list) or not value:
            raise forms.ValidationError('datasets must be a non-empty list')
        datasets = [
            nested(DatasetForm, item, f'datasets[{index}]')
            for index, item in enumerate(value)
        ]
        ids = [item['series_id'] for item in datasets]
        if len(set(ids)) != len(ids):
            raise forms.ValidationError('duplicate series ids')
        return datasets

    def clean_split(self):
        value = self.cleaned_data['split']
        if value is None:
            return None
        if not isinstance(value, list) or len(value) != 3 or not all(
                isinstance(item, (int, float)) for item in value):
            raise forms.ValidationError(
                'split must be [train, validation, test] fractions'
            )
        return tuple(float(item) for item in value)

    def clean_hmm(self):
        return nested(HmmSettingsForm, self.cleaned_data['hmm'], 'hmm')

    def clean_search(self):
        return nested(SearchSettingsForm, self.cleaned_data['search'],
                      'search')

    def clean_fit(self):
        return nested(FitSettingsForm, self.cleaned_data['fit'], 'fit')

    def clean_backtest(self):
        return nested(BacktestSettingsForm, self.cleaned_data['backtest'],
                      'backtest')
