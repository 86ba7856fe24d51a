"""Pipeline stages over a run layout.

Each stage reads the artifacts of the stages before it and writes its own
through `RunLayout.staged`, so a failing stage leaves no files behind.
"""
import logging
from dataclasses import replace
from typing import Dict, List, Optional, Tuple

import pandas as pd

from acquisition.client import Fetcher
from backtest.ledger import buy_and_hold, simulate
from backtest.metrics import compare, regime_error
from backtest.reports import join_reference, read_reference, write_ledger
from bayesnet.estimators import fit_bayesian, fit_mle
from bayesnet.inference import map_predict
from bayesnet.network import BayesianNetwork, Dag, regime_variables
from bayesnet.storage import dag_to_dot, load_network, save_network
from structure.search import HillClimber, write_trace
from timeseries.regimes import (
    RegimeModels, discretize_apply, discretize_train, regime_frame,
)
from timeseries.series import (
    add_targets, align, clean_series, read_panel, split, write_panel,
)

from .artifacts import (
    SPLITS, RunLayout, load_structure, save_structure, write_json,
)
from .config import RunConfig
from .exceptions import EmptyPanelError

logger = logging.getLogger(__name__)


def fetch_stage(config: RunConfig, layout: RunLayout,
                offline: bool = False) -> int:
    """Fill the download cache for every configured series."""
    fetcher = Fetcher(offline=offline)
    total = 0
    for spec in config.datasets:
        total += len(fetcher.fetch(spec))
    logger.info('fetch: %d series, %d records', len(config.datasets), total)
    return len(config.datasets)


def ingest_stage(config: RunConfig, layout: RunLayout,
                 offline: bool = False) -> pd.DataFrame:
    """Clean, align, add the target and split into the three panels."""
    fetcher = Fetcher(offline=offline)
    series = [
        clean_series(fetcher.fetch(spec), spec.source, spec.series_id)
        for spec in config.datasets
    ]
    panel = add_targets(align(series), config.price_id, config.target_id)
    if panel.empty:
        raise EmptyPanelError('aligned panel has no rows with a target')
    parts = split(panel, config.split)
    with layout.staged() as staging:
        write_panel(panel, staging.panels / 'panel.csv')
        for name, part in zip(SPLITS, parts):
            write_panel(part, staging.panel(name))
    logger.info('ingest: %s rows', '/'.join(str(len(p)) for p in parts))
    return panel


def _read(layout: RunLayout, path, stage: str) -> pd.DataFrame:
    return read_panel(layout.require(path, stage))


def discretize_stage(config: RunConfig, layout: RunLayout) -> Dict[str, int]:
    """Train per-column HMMs on train, decode every split."""
    panels = {name: _read(layout, layout.panel(name), 'ingest')
              for name in SPLITS}
    regimes, models = discretize_train(
        panels['train'],
        n_states=config.hmm.n_states,
        bw_iters=config.hmm.bw_iters,
        seed=config.seed,
        price_id=config.price_id,
        target_id=config.target_id,
        raw_labels=config.hmm.raw_labels,
        chunk=config.hmm.chunk,
        tol=config.hmm.tol,
    )
    decoded = {
        'train': regimes,
        'validation': discretize_apply(panels['validation'], models),
        'test': discretize_apply(panels['test'], models),
    }
    with layout.staged() as staging:
        models.save(staging.hmms)
        for name, frame in decoded.items():
            write_panel(frame, staging.regimes(name))
    return {name: len(frame) for name, frame in decoded.items()}


def _learn(config: RunConfig, train: pd.DataFrame, score=None):
    search = config.search
    if score is not None:
        search = replace(search, score=score)
    climber = HillClimber(train, search, regime_variables(train.columns))
    dag = climber.run(config.seed_dag(train.columns))
    return dag, climber.trace


def _fit(config: RunConfig, dag: Dag,
         train: pd.DataFrame) -> BayesianNetwork:
    variables = regime_variables(dag.variables)
    if config.fit_prior == 'mle':
        return fit_mle(dag, train, variables)
    return fit_bayesian(dag, train, config.fit_prior, config.fit_ess,
                        variables)


def _predict(config: RunConfig, net: BayesianNetwork,
             regimes: pd.DataFrame) -> pd.DataFrame:
    prediction = map_predict(
        net, regimes.drop(columns=[config.target_id]), config.target_id,
    )
    labels = net.variables[config.target_id].labels
    return prediction.to_frame(regimes.index, labels)


def select_score(config: RunConfig, train: pd.DataFrame,
                 validation: pd.DataFrame
                 ) -> Tuple[str, Dict[str, float], Dag, list]:
    """Learn with every score and keep the lowest validation error.

    Ties keep the earlier of BIC, K2, BDeu.
    """
    results: Dict[str, float] = {}
    best: Optional[Tuple[float, str, Dag, list]] = None
    for name in ('bic', 'k2', 'bdeu'):
        dag, trace = _learn(
            config, train, replace(config.search.score, name=name),
        )
        predicted = _predict(config, _fit(config, dag, train), validation)
        report = regime_error(validation[config.price_id],
                              predicted['prediction'])
        results[name] = report.direct_error
        logger.info('score %s: validation direct error %.4f', name,
                    report.direct_error)
        if best is None or report.direct_error < best[0]:
            best = (report.direct_error, name, dag, trace)
    _, name, dag, trace = best
    return name, results, dag, trace


def learn_stage(config: RunConfig, layout: RunLayout) -> Dag:
    """Hill-climb from the expert graph on the training regimes."""
    train = _read(layout, layout.regimes('train'), 'discretize')
    if train.empty:
        raise EmptyPanelError('training regime panel has no rows')
    selection = None
    if config.select_score:
        validation = _read(layout, layout.regimes('validation'),
                           'discretize')
        name, errors, dag, trace = select_score(config, train, validation)
        selection = {'selected': name, 'validation_direct_error': errors}
    else:
        dag, trace = _learn(config, train)
    with layout.staged() as staging:
        save_structure(dag, staging.structure)
        with open(staging.model / 'structure.dot', 'w',
                  encoding='utf-8') as fh:
            fh.write(dag_to_dot(dag, name=config.name))
        write_trace(trace, staging.model / 'search_trace.csv')
        if selection is not None:
            write_json(selection, staging.model / 'selection.json')
    logger.info('learn: %d edges', len(dag.edges))
    return dag


def fit_stage(config: RunConfig, layout: RunLayout) -> BayesianNetwork:
    dag = load_structure(layout.require(layout.structure, 'learn'))
    train = _read(layout, layout.regimes('train'), 'discretize')
    if train.empty:
        raise EmptyPanelError('training regime panel has no rows')
    net = _fit(config, dag, train)
    with layout.staged() as staging:
        save_network(net, staging.network)
        with open(staging.model / 'network.dot', 'w',
                  encoding='utf-8') as fh:
            fh.write(dag_to_dot(dag, name=config.name))
    return net


def predict_stage(config: RunConfig,
                  layout: RunLayout) -> Dict[str, pd.DataFrame]:
    """MAP forecasts of the target for validation and test."""
    net = load_network(layout.require(layout.network, 'fit'))
    predictions = {}
    for name in ('validation', 'test'):
        regimes = _read(layout, layout.regimes(name), 'discretize')
        predictions[name] = _predict(config, net, regimes)
        report = regime_error(regimes[config.price_id],
                              predictions[name]['prediction'])
        logger.info('%s: direct error %.4f, lag-1 error %.4f', name,
                    report.direct_error, report.lag1_error)
    with layout.staged() as staging:
        for name, frame in predictions.items():
            frame.to_csv(staging.prediction(name), index_label='date',
                         date_format='%Y-%m-%d')
    return predictions


def backtest_stage(config: RunConfig, layout: RunLayout) -> dict:
    """Trade the test predictions and compare against buy-and-hold."""
    predictions = _read(layout, layout.prediction('test'), 'predict')
    regimes = _read(layout, layout.regimes('test'), 'discretize')
    prices = _read(layout, layout.panel('test'), 'ingest')[config.price_id]
    sheet = pd.concat([prices, predictions['prediction']], axis=1,
                      join='inner')
    ledger = simulate(sheet[config.price_id], sheet['prediction'],
                      mode=config.backtest_mode, dates=sheet.index)
    baseline = buy_and_hold(sheet[config.price_id], dates=sheet.index)
    report = regime_error(regimes[config.price_id], predictions['prediction'])
    summary = {
        'mode': config.backtest_mode,
        'ledgers': compare(ledger, baseline),
        'test_error': report.to_dict(),
    }
    with layout.staged() as staging:
        write_ledger(ledger, staging.backtest / 'ledger.csv')
        write_ledger(baseline, staging.backtest / 'buy_and_hold.csv')
        write_json(summary, staging.backtest / 'summary.json')
        if config.reference_forecast is not None:
            joined = join_reference(ledger,
                                    read_reference(config.reference_forecast))
            joined.to_csv(staging.backtest / 'reference.csv',
                          index_label='date', date_format='%Y-%m-%d',
                          float_format='%.10g')
    return summary


def run_pipeline(config: RunConfig, layout: RunLayout,
                 offline: bool = False) -> dict:
    fetch_stage(config, layout, offline)
    ingest_stage(config, layout, offline)
    discretize_stage(config, layout)
    learn_stage(config, layout)
    fit_stage(config, layout)
    predict_stage(config, layout)
    return backtest_stage(config, layout)


def plot_data_stage(config: RunConfig, layout: RunLayout) -> List[str]:
    """Per-series (value, diff, regime) tables of the training split."""
    train = _read(layout, layout.panel('train'), 'ingest')
    regimes = _read(layout, layout.regimes('train'), 'discretize')
    with layout.staged() as staging:
        for series_id in train.columns:
            frame = regime_frame(train, regimes, series_id)
            frame.to_csv(staging.plots / f'{series_id}.csv',
                         index_label='date', date_format='%Y-%m-%d',
                         float_format='%.10g')
    return list(train.columns)


def load_models(layout: RunLayout) -> RegimeModels:
    return RegimeModels.load(layout.require(layout.hmms, 'discretize'))
