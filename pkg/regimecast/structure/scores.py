"""Decomposable network scores: BIC and the Bayesian-Dirichlet family."""
import threading
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.special import gammaln

from bayesnet.estimators import encode_panel, family_counts, pseudo_count
from bayesnet.network import Dag, DiscreteVariable
from regimecast.errors import InvalidArgumentError

SCORES = ('bic', 'k2', 'bdeu')
PENALTIES = ('bic', 'halfk')
Variables = Optional[Mapping[str, DiscreteVariable]]


@dataclass(frozen=True)
class ScoreSpec:
    """Имя скоринговой функции и её параметры"""

    name: str = 'k2'
    ess: Optional[float] = None
    penalty: str = 'bic'

    def __post_init__(self):
        if self.name not in SCORES:
            raise InvalidArgumentError(
                f'unknown score {self.name!r}, expected one of {SCORES}'
            )
        if self.penalty not in PENALTIES:
            raise InvalidArgumentError(
                f'unknown penalty {self.penalty!r}, '
                f'expected one of {PENALTIES}'
            )
        if self.ess is not None and self.ess <= 0:
            raise InvalidArgumentError('equivalent sample size must be > 0')


@dataclass(frozen=True)
class ScoredFamily:
    child: str
    parents: Tuple[str, ...]
    score: float
    k: int


def infer_variables(data: pd.DataFrame) -> Dict[str, DiscreteVariable]:
    """One variable per column, states being the sorted observed values."""
    return {
        name: DiscreteVariable(name, tuple(sorted(data[name].unique())))
        for name in data.columns
    }


def _parameter_dimension(counts: np.ndarray) -> int:
    return (counts.shape[0] - 1) * counts.shape[1]


def _bic(counts: np.ndarray, penalty: str) -> float:
    n_rows = counts.sum()
    totals = counts.sum(axis=0, keepdims=True)
    with np.errstate(divide='ignore', invalid='ignore'):
        terms = np.where(counts > 0, counts * np.log(counts / totals), 0.0)
    k = _parameter_dimension(counts)
    if penalty == 'bic':
        return float(terms.sum() - np.log(n_rows) / 2 * k)
    return float(terms.sum() - k / 2)


def _bd(counts: np.ndarray, alpha: float) -> float:
    card = counts.shape[0]
    config_totals = counts.sum(axis=0)
    score = (
        gammaln(card * alpha) - gammaln(card * alpha + config_totals)
    ).sum()
    score += (gammaln(alpha + counts) - gammaln(alpha)).sum()
    return float(score)


def _family_score(counts: np.ndarray, child: DiscreteVariable,
                  spec: ScoreSpec) -> float:
    if spec.name == 'bic':
        return _bic(counts, spec.penalty)
    return _bd(counts, pseudo_count(spec.name, child, counts.shape[1],
                                    spec.ess))


def _resolve(data: pd.DataFrame,
             variables: Variables,
             names: Iterable[str]) -> Dict[str, DiscreteVariable]:
    names = list(names)
    missing = [name for name in names if name not in data.columns]
    if missing:
        raise InvalidArgumentError(f'data has no columns {missing}')
    variables = variables or infer_variables(data[names])
    return {name: variables[name] for name in names}


def bic_family_score(data: pd.DataFrame, child: str,
                     parents: Iterable[str] = (),
                     variables: Variables = None,
                     penalty: str = 'bic') -> ScoredFamily:
    """Maximised log-likelihood of the family minus the BIC penalty."""
    if len(data) < 1:
        raise InvalidArgumentError('BIC needs at least one row')
    return ScoreCache(
        data, ScoreSpec('bic', penalty=penalty),
        _resolve(data, variables, [child, *parents]),
    ).family(child, parents)


def bd_family_score(data: pd.DataFrame, child: str,
                    parents: Iterable[str] = (), prior: str = 'k2',
                    ess: Optional[float] = None,
                    variables: Variables = None) -> ScoredFamily:
    """Log marginal likelihood of the family under a Dirichlet prior."""
    if prior not in ('k2', 'bdeu'):
        raise InvalidArgumentError(f'unknown Dirichlet prior {prior!r}')
    return ScoreCache(
        data, ScoreSpec(prior, ess=ess),
        _resolve(data, variables, [child, *parents]),
    ).family(child, parents)


class ScoreCache:
    """Кэш оценок семейств (child, parents)

    Entries are computed once per parent set; concurrent readers see either
    a missing entry or the final value.
    """

    def __init__(self, data: pd.DataFrame, spec: ScoreSpec,
                 variables: Variables = None):
        if spec.name == 'bic' and len(data) < 1:
            raise InvalidArgumentError('BIC needs at least one row')
        self.spec = spec
        self.variables = dict(
            _resolve(data, variables, variables or data.columns)
        )
        self._encoded = encode_panel(data, self.variables)
        self._entries: Dict[Tuple[str, frozenset], ScoredFamily] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def family(self, child: str, parents: Iterable[str] = ()) -> ScoredFamily:
        parents = tuple(sorted(parents))
        key = (child, frozenset(parents))
        entry = self._entries.get(key)
        if entry is not None:
            self.hits += 1
            return entry
        unknown = [name for name in (child, *parents)
                   if name not in self.variables]
        if unknown:
            raise InvalidArgumentError(f'unknown variables {unknown}')
        counts = family_counts(
            self._encoded, self.variables[child],
            [self.variables[name] for name in parents],
        )
        entry = ScoredFamily(
            child=child,
            parents=parents,
            score=_family_score(counts, self.variables[child], self.spec),
            k=_parameter_dimension(counts),
        )
        with self._lock:
            self.misses += 1
            self._entries.setdefault(key, entry)
        return self._entries[key]

    def network(self, dag: Dag) -> float:
        return float(sum(
            self.family(name, dag.parents(name)).score
            for name in dag.variables
        ))


def network_score(data: pd.DataFrame, dag: Dag,
                  spec: Optional[ScoreSpec] = None,
                  variables: Variables = None) -> float:
    """Sum of family scores over the graph."""
    spec = spec or ScoreSpec()
    cache = ScoreCache(data, spec, _resolve(data, variables, dag.variables))
    return cache.network(dag)
