"""Exact inference by variable elimination."""
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd

from regimecast.errors import InvalidArgumentError

from .exceptions import InconsistentEvidenceError
from .network import BayesianNetwork

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Factor:
    variables: Tuple[str, ...]
    values: np.ndarray

    def _aligned(self, scope: Sequence[str]) -> np.ndarray:
        """Values transposed and broadcast-shaped onto `scope`."""
        order = [self.variables.index(name) for name in scope
                 if name in self.variables]
        values = np.transpose(self.values, order)
        shape = []
        position = 0
        for name in scope:
            if name in self.variables:
                shape.append(values.shape[position])
                position += 1
            else:
                shape.append(1)
        return values.reshape(shape)

    def __mul__(self, other: 'Factor') -> 'Factor':
        scope = self.variables + tuple(
            name for name in other.variables if name not in self.variables
        )
        return Factor(scope, self._aligned(scope) * other._aligned(scope))

    def marginalize(self, name: str) -> 'Factor':
        axis = self.variables.index(name)
        return Factor(
            self.variables[:axis] + self.variables[axis + 1:],
            self.values.sum(axis=axis),
        )

    def reduce(self, evidence: Mapping[str, int]) -> 'Factor':
        index = []
        scope = []
        for name in self.variables:
            if name in evidence:
                index.append(evidence[name])
            else:
                index.append(slice(None))
                scope.append(name)
        return Factor(tuple(scope), np.asarray(self.values[tuple(index)]))


@dataclass(frozen=True, eq=False)
class Posterior:
    variable: str
    probabilities: np.ndarray

    def argmax(self) -> int:
        return int(np.argmax(self.probabilities))


def network_factors(net: BayesianNetwork) -> List[Factor]:
    return [
        Factor((name,) + cpd.parent_names, cpd.as_array())
        for name, cpd in net.cpds.items()
    ]


def joint_probability(net: BayesianNetwork,
                      assignment: Mapping[str, int]) -> float:
    """Chain-rule product of CPD entries for a full assignment."""
    indices = net.evidence_indices(assignment)
    missing = [name for name in net.dag.variables if name not in indices]
    if missing:
        raise InvalidArgumentError(f'assignment misses variables {missing}')
    probability = 1.0
    for name, cpd in net.cpds.items():
        probability *= cpd.probability(
            indices[name], [indices[parent] for parent in cpd.parent_names],
        )
    return probability


def min_degree_order(net: BayesianNetwork,
                     eliminate: Sequence[str],
                     evidence: Mapping[str, int]) -> List[str]:
    """Greedy min-degree order over the moral graph without evidence."""
    graph = nx.moral_graph(net.dag.to_networkx())
    graph.remove_nodes_from(evidence)
    rank = {name: index for index, name in enumerate(net.dag.variables)}
    pending = set(eliminate)
    order = []
    while pending:
        node = min(pending, key=lambda name: (graph.degree(name),
                                              rank[name]))
        neighbours = list(graph.neighbors(node))
        graph.add_edges_from(
            (a, b) for i, a in enumerate(neighbours)
            for b in neighbours[i + 1:]
        )
        graph.remove_node(node)
        pending.remove(node)
        order.append(node)
    return order


def query(net: BayesianNetwork, target: str,
          evidence: Optional[Mapping[str, int]] = None,
          elimination_order: Optional[Sequence[str]] = None) -> Posterior:
    """Posterior of `target` given evidence (state indices)."""
    evidence = net.evidence_indices(evidence or {})
    if target not in net.variables:
        raise InvalidArgumentError(f'unknown variable {target!r}')
    if target in evidence:
        raise InvalidArgumentError(f'target {target!r} is also evidence')
    eliminate = [name for name in net.dag.variables
                 if name != target and name not in evidence]
    if elimination_order is None:
        elimination_order = min_degree_order(net, eliminate, evidence)
    elif sorted(elimination_order) != sorted(eliminate):
        raise InvalidArgumentError(
            f'elimination order must cover exactly {sorted(eliminate)}'
        )
    factors = [factor.reduce(evidence) for factor in network_factors(net)]
    for name in elimination_order:
        related = [factor for factor in factors if name in factor.variables]
        if not related:
            continue
        factors = [factor for factor in factors
                   if name not in factor.variables]
        product = related[0]
        for factor in related[1:]:
            product = product * factor
        factors.append(product.marginalize(name))
    result = Factor((target,), np.ones(net.variables[target].cardinality))
    for factor in factors:
        result = result * factor
    values = result._aligned((target,)).reshape(-1)
    total = values.sum()
    if not total > 0:
        raise InconsistentEvidenceError(
            f'evidence {dict(evidence)} has zero probability'
        )
    return Posterior(target, values / total)


@dataclass(frozen=True, eq=False)
class Prediction:
    states: np.ndarray
    fallback: np.ndarray

    def to_frame(self, index, labels: Sequence) -> pd.DataFrame:
        return pd.DataFrame(
            {
                'prediction': [labels[state] for state in self.states],
                'fallback': self.fallback.astype(int),
            },
            index=index,
        )


def map_predict(net: BayesianNetwork, rows: pd.DataFrame,
                target: str) -> Prediction:
    """Per-row posterior argmax of `target` with the other columns as evidence.

    Rows whose evidence has zero probability fall back to the argmax of
    the target's prior and are flagged.
    """
    if target not in net.variables:
        raise InvalidArgumentError(f'unknown target {target!r}')
    evidence_names = [name for name in net.dag.variables if name != target]
    missing = [name for name in evidence_names if name not in rows.columns]
    if missing:
        raise InvalidArgumentError(f'rows miss network variables {missing}')
    prior_state = None
    cache: Dict[tuple, Tuple[int, bool]] = {}
    states = np.empty(len(rows), dtype=np.intp)
    fallback = np.zeros(len(rows), dtype=bool)
    for position, values in enumerate(
            rows[evidence_names].itertuples(index=False, name=None)):
        if values not in cache:
            evidence = net.evidence_indices(
                dict(zip(evidence_names, values)), by_label=True,
            )
            try:
                cache[values] = (query(net, target, evidence).argmax(), False)
            except InconsistentEvidenceError:
                if prior_state is None:
                    prior_state = query(net, target).argmax()
                logger.warning(
                    'row %d: inconsistent evidence, using prior argmax of %s',
                    position, target,
                )
                cache[values] = (prior_state, True)
        states[position], fallback[position] = cache[values]
    return Prediction(states=states, fallback=fallback)

