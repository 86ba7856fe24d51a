"""HMM discretization of panel columns into canonical market regimes."""
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from django.conf import settings

from hmm.algorithms import baum_welch, chunk_sequence, viterbi
from hmm.model import DtHmm, hmm_random
from hmm.storage import HMM_SUFFIX, load_hmm, save_hmm
from regimecast.errors import InvalidArgumentError

from .exceptions import MissingModelError
from .series import Panel

logger = logging.getLogger(__name__)

REMAP_SUFFIX = '.remap.json'


def to_emissions(values: Sequence[float]) -> np.ndarray:
    """1 where the value rose since the previous month, else 0."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise InvalidArgumentError('at least two values are needed')
    return (np.diff(values) > 0).astype(np.intp)


def column_seed(series_id: str, seed: int) -> int:
    digest = hashlib.sha256(f'{seed}:{series_id}'.encode('utf-8')).digest()
    return int.from_bytes(digest[:4], 'big')


@dataclass(frozen=True)
class RegimeMap:
    """Перестановка сырых состояний Витерби в канонические режимы

    `permutation[raw]` is the canonical label; `mean_diffs[label]` is the
    mean month-on-month change of the months carrying that label (NaN for
    states Viterbi never visited).
    """

    permutation: Tuple[int, ...]
    mean_diffs: Tuple[float, ...]

    @classmethod
    def from_decoding(cls, states: np.ndarray, diffs: np.ndarray,
                      n_states: int) -> 'RegimeMap':
        means = np.array([
            diffs[states == state].mean() if np.any(states == state)
            else np.nan
            for state in range(n_states)
        ])
        order = np.argsort(means, kind='stable')
        permutation = np.empty(n_states, dtype=int)
        permutation[order] = np.arange(n_states)
        return cls(tuple(int(label) for label in permutation),
                   tuple(float(mean) for mean in means[order]))

    @classmethod
    def identity(cls, states: np.ndarray, diffs: np.ndarray,
                 n_states: int) -> 'RegimeMap':
        means = tuple(
            float(diffs[states == state].mean()) if np.any(states == state)
            else float('nan')
            for state in range(n_states)
        )
        return cls(tuple(range(n_states)), means)

    def apply(self, states: np.ndarray) -> np.ndarray:
        return np.asarray(self.permutation, dtype=np.intp)[states]

    def to_dict(self) -> dict:
        return {
            'permutation': list(self.permutation),
            'mean_diffs': [None if np.isnan(mean) else mean
                           for mean in self.mean_diffs],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> 'RegimeMap':
        return cls(
            tuple(int(label) for label in payload['permutation']),
            tuple(float('nan') if mean is None else float(mean)
                  for mean in payload['mean_diffs']),
        )


def model_filename(series_id: str) -> str:
    return series_id.replace('.', '_')


@dataclass
class RegimeModels:
    """Обученные HMM и перестановки режимов по столбцам"""

    hmms: Dict[str, DtHmm] = field(default_factory=dict)
    remaps: Dict[str, RegimeMap] = field(default_factory=dict)
    price_id: str = ''
    target_id: str = ''

    def lookup(self, column: str) -> Tuple[DtHmm, RegimeMap]:
        source = self.price_id if column == self.target_id else column
        if source not in self.hmms or source not in self.remaps:
            raise MissingModelError(f'no trained HMM for column {column!r}')
        return self.hmms[source], self.remaps[source]

    def save(self, directory: Union[str, Path]) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for series_id, model in self.hmms.items():
            stem = model_filename(series_id)
            save_hmm(model, directory / f'{stem}{HMM_SUFFIX}')
            payload = {
                'series_id': series_id,
                'price_id': self.price_id,
                'target_id': self.target_id,
                **self.remaps[series_id].to_dict(),
            }
            tmp_path = directory / f'{stem}{REMAP_SUFFIX}.tmp'
            with open(tmp_path, 'w', encoding='utf-8') as fh:
                json.dump(payload, fh, indent=2)
            os.replace(tmp_path, directory / f'{stem}{REMAP_SUFFIX}')
        return directory

    @classmethod
    def load(cls, directory: Union[str, Path]) -> 'RegimeModels':
        directory = Path(directory)
        models = cls()
        for remap_path in sorted(directory.glob(f'*{REMAP_SUFFIX}')):
            with open(remap_path, 'r', encoding='utf-8') as fh:
                payload = json.load(fh)
            series_id = payload['series_id']
            stem = model_filename(series_id)
            models.hmms[series_id] = load_hmm(
                directory / f'{stem}{HMM_SUFFIX}',
            )
            models.remaps[series_id] = RegimeMap.from_dict(payload)
            models.price_id = payload['price_id']
            models.target_id = payload['target_id']
        if not models.hmms:
            raise MissingModelError(f'no HMMs stored under {directory}')
        return models


def _decode(model: DtHmm, values: pd.Series) -> Tuple[np.ndarray, np.ndarray]:
    emissions = to_emissions(values.to_numpy())
    _, path = viterbi(model, emissions)
    return path, np.diff(values.to_numpy(dtype=float))


def _regime_panel(panel: Panel, columns: Dict[str, np.ndarray]) -> Panel:
    return pd.DataFrame(columns, index=panel.index[1:])[list(panel.columns)]


def discretize_train(train: Panel, n_states: Optional[int] = None,
                     bw_iters: Optional[int] = None, seed: int = 0,
                     price_id: Optional[str] = None,
                     target_id: Optional[str] = None,
                     raw_labels: bool = False,
                     chunk: Optional[int] = None,
                     tol: Optional[float] = None
                     ) -> Tuple[Panel, RegimeModels]:
    """Train one HMM per column and decode the training regimes.

    The target column is decoded with the price column's model and map.
    """
    n_states = n_states or settings.HMM_N_STATES
    bw_iters = bw_iters or settings.HMM_BW_ITERS
    models = RegimeModels(price_id=price_id or settings.PRICE_ID,
                          target_id=target_id or settings.TARGET_ID)
    if models.target_id in train.columns and \
            models.price_id not in train.columns:
        raise InvalidArgumentError(
            f'target column needs the price column {models.price_id!r}'
        )
    if chunk:
        logger.warning('training on chunks of %d emissions', chunk)
    decoded = {}
    for column in train.columns:
        if column == models.target_id:
            continue
        emissions = to_emissions(train[column].to_numpy())
        initial = hmm_random(n_states, settings.HMM_N_SYMBOLS,
                             column_seed(column, seed))
        sequences = chunk_sequence(emissions, chunk) if chunk else [emissions]
        model, report = baum_welch(initial, sequences, bw_iters, tol)
        states, diffs = _decode(model, train[column])
        build = RegimeMap.identity if raw_labels else RegimeMap.from_decoding
        models.hmms[column] = model
        models.remaps[column] = build(states, diffs, n_states)
        decoded[column] = models.remaps[column].apply(states)
        logger.debug('%s: %d updates, final log-likelihood %.4f', column,
                     report.iterations_run,
                     report.log_likelihood_per_iteration[-1])
    if models.target_id in train.columns:
        model, remap = models.lookup(models.target_id)
        states, _ = _decode(model, train[models.target_id])
        decoded[models.target_id] = remap.apply(states)
    logger.info('discretized %d training columns', len(decoded))
    return _regime_panel(train, decoded), models


def discretize_apply(panel: Panel, models: RegimeModels) -> Panel:
    """Viterbi-decode every column with its stored model, no training."""
    decoded = {}
    for column in panel.columns:
        model, remap = models.lookup(column)
        states, _ = _decode(model, panel[column])
        decoded[column] = remap.apply(states)
    return _regime_panel(panel, decoded)


def regime_frame(panel: Panel, regimes: Panel, series_id: str) -> pd.DataFrame:
    """Per-month value, change and regime label of one series."""
    if series_id not in panel.columns or series_id not in regimes.columns:
        raise InvalidArgumentError(f'unknown series {series_id!r}')
    values = panel[series_id]
    return pd.DataFrame({
        'value': values,
        'diff': values.diff(),
        'regime': regimes[series_id].reindex(values.index).astype('Int64'),
    })
