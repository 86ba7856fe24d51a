"""Run configuration: JSON file, form validation, settings defaults."""
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple, Union

from django.conf import settings

from acquisition.client import SourceSpec
from bayesnet.network import Dag, Edge
from regimecast.errors import InvalidArgumentError
from structure.scores import ScoreSpec
from structure.search import SearchConfig
from timeseries.series import SplitSpec

from .forms import RunConfigForm


@dataclass(frozen=True)
class HmmSettings:
    n_states: int
    bw_iters: int
    tol: Optional[float] = None
    chunk: Optional[int] = None
    raw_labels: bool = False


@dataclass(frozen=True)
class RunConfig:
    """Проверенная конфигурация запуска"""

    name: str
    seed: int
    price_id: str
    datasets: Tuple[SourceSpec, ...]
    split: SplitSpec
    hmm: HmmSettings
    search: SearchConfig
    expert_edges: Tuple[Edge, ...]
    select_score: bool = False
    fit_prior: str = 'k2'
    fit_ess: Optional[float] = None
    backtest_mode: str = 'paper'
    reference_forecast: Optional[Path] = None
    target_id: str = field(default_factory=lambda: settings.TARGET_ID)

    @property
    def series_ids(self) -> Tuple[str, ...]:
        return tuple(spec.series_id for spec in self.datasets)

    def seed_dag(self, columns) -> Dag:
        """Expert graph over the panel columns."""
        return Dag(columns, self.expert_edges)

    def with_overrides(self, seed: Optional[int] = None,
                       raw_labels: bool = False,
                       chunk: Optional[int] = None,
                       backtest_mode: Optional[str] = None) -> 'RunConfig':
        config = self
        if seed is not None:
            if seed < 0:
                raise InvalidArgumentError('seed must be >= 0')
            config = replace(config, seed=seed,
                             search=replace(config.search, seed=seed))
        if raw_labels or chunk is not None:
            if chunk is not None and chunk < 1:
                raise InvalidArgumentError('chunk must be positive')
            config = replace(config, hmm=replace(
                config.hmm,
                raw_labels=config.hmm.raw_labels or raw_labels,
                chunk=config.hmm.chunk if chunk is None else chunk,
            ))
        if backtest_mode is not None:
            config = replace(config, backtest_mode=backtest_mode)
        return config


def default_datasets():
    return (
        [{'source': 'EIA', 'series_id': series_id}
         for series_id in settings.EIA_DATASETS]
        + [{'source': 'FRED', 'series_id': series_id}
           for series_id in settings.FRED_DATASETS]
        + [{'source': 'FRED', 'series_id': settings.PRICE_ID}]
    )


def _form_errors(form) -> str:
    return '; '.join(
        f'{name}: {" ".join(errors)}' for name, errors in form.errors.items()
    )


def build_config(payload: dict,
                 base_dir: Union[str, Path, None] = None) -> RunConfig:
    """Validate a decoded config object and fill in the defaults."""
    if not isinstance(payload, dict):
        raise InvalidArgumentError('run config must be a JSON object')
    unknown = sorted(set(payload) - set(RunConfigForm.base_fields))
    if unknown:
        raise InvalidArgumentError(f'unknown config keys {unknown}')
    form = RunConfigForm(data=payload)
    if not form.is_valid():
        raise InvalidArgumentError(f'invalid run config: {_form_errors(form)}')
    data = form.cleaned_data
    base_dir = Path(base_dir or '.')

    price_id = data['price_id'] or settings.PRICE_ID
    datasets = tuple(
        SourceSpec(
            source=item['source'],
            series_id=item['series_id'],
            path=str(base_dir / item['path']) if item.get('path') else None,
        )
        for item in (data['datasets'] or default_datasets())
    )
    ids = [spec.series_id for spec in datasets]
    if price_id not in ids:
        raise InvalidArgumentError(
            f'price series {price_id!r} is not among the datasets'
        )
    if settings.TARGET_ID in ids:
        raise InvalidArgumentError(
            f'{settings.TARGET_ID!r} is reserved for the target column'
        )

    hmm = data['hmm']
    search = data['search']
    fit = data['fit']
    backtest = data['backtest']
    columns = set(ids) | {settings.TARGET_ID}
    expert_edges = tuple(search.get('expert_edges',
                                    settings.EXPERT_EDGES) or ())
    for parent, child in expert_edges:
        if parent not in columns or child not in columns:
            raise InvalidArgumentError(
                f'expert edge {parent} -> {child} names an unconfigured '
                f'series'
            )
    required = frozenset(search.get('required_edges') or ())
    search_config = SearchConfig.from_settings(
        score=ScoreSpec(
            search.get('score') or settings.SEARCH_SCORE,
            ess=search.get('ess'),
            penalty=search.get('penalty') or 'bic',
        ),
        forbidden_edges=frozenset(search.get('forbidden_edges') or ()),
        required_edges=required,
        seed=data['seed'],
        **{
            key: search[option]
            for key, option in (
                ('tabu_size', 'tabu_size'),
                ('max_iters', 'max_iters'),
                ('n_random_ops_at_local_max', 'n_random_ops'),
                ('n_restarts', 'n_restarts'),
                ('max_parents', 'max_parents'),
            )
            if search.get(option) is not None
        },
    )
    missing_required = required - set(expert_edges)
    if missing_required:
        raise InvalidArgumentError(
            f'required edges must be part of expert_edges: '
            f'{sorted(missing_required)}'
        )
    reference = backtest.get('reference_forecast')
    return RunConfig(
        name=data['name'],
        seed=data['seed'],
        price_id=price_id,
        datasets=datasets,
        split=SplitSpec(*(data['split'] or settings.SPLIT_FRACTIONS)),
        hmm=HmmSettings(
            n_states=hmm.get('n_states') or settings.HMM_N_STATES,
            bw_iters=hmm.get('bw_iters') or settings.HMM_BW_ITERS,
            tol=hmm.get('tol'),
            chunk=hmm.get('chunk'),
            raw_labels=hmm.get('raw_labels', False),
        ),
        search=search_config,
        expert_edges=expert_edges,
        select_score=search.get('select_score', False),
        fit_prior=fit.get('prior') or settings.FIT_PRIOR,
        fit_ess=fit.get('ess'),
        backtest_mode=backtest.get('mode') or settings.BACKTEST_MODE,
        reference_forecast=base_dir / reference if reference else None,
    )


def load_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise InvalidArgumentError(f'cannot read config {path}: {exc}') \
            from exc
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f'{path} is not valid JSON: {exc}') \
            from exc
    return build_config(payload, base_dir=path.parent)
