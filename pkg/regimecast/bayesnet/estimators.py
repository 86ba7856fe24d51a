"""Parameter learning: relative frequencies and Dirichlet posteriors."""
from typing import Dict, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from django.conf import settings

from regimecast.errors import InvalidArgumentError

from .network import (
    BayesianNetwork, Cpd, Dag, DiscreteVariable, regime_variables,
)

PRIORS = ('k2', 'bdeu')


def encode_panel(data: pd.DataFrame,
                 variables: Mapping[str, DiscreteVariable]
                 ) -> Dict[str, np.ndarray]:
    """State indices per column; unknown labels are rejected."""
    encoded = {}
    for name, variable in variables.items():
        if name not in data.columns:
            raise InvalidArgumentError(f'data has no column {name!r}')
        lookup = {label: index for index, label in enumerate(variable.labels)}
        column = data[name].map(lookup)
        if column.isna().any():
            unknown = sorted(
                {str(v) for v in data[name][column.isna()].unique()}
            )
            raise InvalidArgumentError(
                f'{name}: unknown states {unknown}, '
                f'expected {list(variable.labels)}'
            )
        encoded[name] = column.to_numpy(dtype=np.intp)
    return encoded


def family_counts(encoded: Mapping[str, np.ndarray],
                  child: DiscreteVariable,
                  parents: Sequence[DiscreteVariable]) -> np.ndarray:
    """Counts N[child_state, parent_config], last parent varying fastest."""
    child_index = encoded[child.name]
    n_configs = int(np.prod([parent.cardinality for parent in parents]))
    if parents:
        configs = np.ravel_multi_index(
            tuple(encoded[parent.name] for parent in parents),
            tuple(parent.cardinality for parent in parents),
        )
    else:
        configs = np.zeros(child_index.size, dtype=np.intp)
    counts = np.zeros((child.cardinality, n_configs))
    np.add.at(counts, (child_index, configs), 1.0)
    return counts


def pseudo_count(prior: str, child: DiscreteVariable, n_configs: int,
                 ess: Optional[float] = None) -> float:
    if prior == 'k2':
        return 1.0
    if prior == 'bdeu':
        ess = settings.BDEU_ESS if ess is None else ess
        if ess <= 0:
            raise InvalidArgumentError('equivalent sample size must be > 0')
        return ess / (child.cardinality * n_configs)
    raise InvalidArgumentError(
        f'unknown prior {prior!r}, expected one of {PRIORS}'
    )


def _fit(dag: Dag, data: pd.DataFrame,
         variables: Optional[Mapping[str, DiscreteVariable]],
         prior: Optional[str], ess: Optional[float]) -> BayesianNetwork:
    variables = variables or regime_variables(dag.variables)
    variables = {name: variables[name] for name in dag.variables}
    encoded = encode_panel(data, variables)
    cpds = []
    for name in dag.variables:
        child = variables[name]
        parents = [variables[parent] for parent in dag.parents(name)]
        counts = family_counts(encoded, child, parents)
        if prior is not None:
            counts = counts + pseudo_count(
                prior, child, counts.shape[1], ess,
            )
        totals = counts.sum(axis=0, keepdims=True)
        with np.errstate(invalid='ignore', divide='ignore'):
            table = np.where(totals > 0, counts / totals,
                             1.0 / child.cardinality)
        cpds.append(Cpd(child=child, parents=tuple(parents), table=table))
    return BayesianNetwork(dag, cpds)


def fit_mle(dag: Dag, data: pd.DataFrame,
            variables: Optional[Mapping[str, DiscreteVariable]] = None
            ) -> BayesianNetwork:
    """Relative frequencies; unseen parent configurations become uniform."""
    return _fit(dag, data, variables, prior=None, ess=None)


def fit_bayesian(dag: Dag, data: pd.DataFrame, prior: str = 'k2',
                 ess: Optional[float] = None,
                 variables: Optional[Mapping[str, DiscreteVariable]] = None
                 ) -> BayesianNetwork:
    """Posterior mean under a K2 (unit) or BDeu (ess) Dirichlet prior."""
    if prior not in PRIORS:
        raise InvalidArgumentError(
            f'unknown prior {prior!r}, expected one of {PRIORS}'
        )
    return _fit(dag, data, variables, prior=prior, ess=ess)
