"""Conditional independence testing and constraint-based (IC) learning."""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd
from django.conf import settings
from scipy.stats import chi2

from bayesnet.network import Edge
from bayesnet.storage import render_dot
from regimecast.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CiTestResult:
    statistic: float
    degrees_of_freedom: int
    p_value: float

    def independent(self, alpha: float) -> bool:
        return self.p_value > alpha


def _encode(data: pd.DataFrame) -> Dict[str, np.ndarray]:
    return {
        name: pd.factorize(data[name], sort=True)[0]
        for name in data.columns
    }


def _stratum_statistic(x: np.ndarray, y: np.ndarray,
                       min_expected: float) -> Tuple[float, int]:
    """Pearson statistic of one stratum, or (0, 0) when it is too sparse."""
    x_levels, x_index = np.unique(x, return_inverse=True)
    y_levels, y_index = np.unique(y, return_inverse=True)
    if x_levels.size < 2 or y_levels.size < 2:
        return 0.0, 0
    table = np.zeros((x_levels.size, y_levels.size))
    np.add.at(table, (x_index, y_index), 1.0)
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / table.sum()
    if expected.mean() < min_expected:
        return 0.0, 0
    statistic = float(((table - expected) ** 2 / expected).sum())
    return statistic, (x_levels.size - 1) * (y_levels.size - 1)


def _ci_test(encoded: Dict[str, np.ndarray], x: str, y: str,
             z: Sequence[str], min_expected: float) -> CiTestResult:
    if z:
        strata = np.unique(
            np.stack([encoded[name] for name in z], axis=1),
            axis=0, return_inverse=True,
        )[1].reshape(-1)
    else:
        strata = np.zeros(encoded[x].size, dtype=np.intp)
    statistic = 0.0
    dof = 0
    for stratum in np.unique(strata):
        mask = strata == stratum
        part, part_dof = _stratum_statistic(
            encoded[x][mask], encoded[y][mask], min_expected,
        )
        statistic += part
        dof += part_dof
    p_value = float(chi2.sf(statistic, dof)) if dof > 0 else 1.0
    return CiTestResult(statistic, dof, p_value)


def _check_columns(data: pd.DataFrame, names: Iterable[str]):
    if data.empty:
        raise InvalidArgumentError('independence tests need data')
    missing = [name for name in names if name not in data.columns]
    if missing:
        raise InvalidArgumentError(f'data has no columns {missing}')


def chi2_ci_test(data: pd.DataFrame, x: str, y: str,
                 z: Sequence[str] = (),
                 min_expected: Optional[float] = None) -> CiTestResult:
    """Pearson chi-square test of x independent of y given z.

    Strata whose mean expected cell count is below `min_expected` are
    skipped and contribute no degrees of freedom.
    """
    z = list(z)
    _check_columns(data, [x, y, *z])
    if x == y or x in z or y in z:
        raise InvalidArgumentError('x, y and z must be disjoint')
    if min_expected is None:
        min_expected = settings.CHI2_MIN_EXPECTED
    return _ci_test(_encode(data[[x, y, *z]]), x, y, z, min_expected)


@dataclass
class PartiallyDirectedGraph:
    """CPDAG: ориентированные и неориентированные рёбра"""

    nodes: Tuple[str, ...]
    directed: set = field(default_factory=set)
    undirected: set = field(default_factory=set)
    separating_sets: Dict[FrozenSet[str], Tuple[str, ...]] = field(
        default_factory=dict)

    def adjacent(self, a: str, b: str) -> bool:
        return ((a, b) in self.directed or (b, a) in self.directed
                or frozenset((a, b)) in self.undirected)

    def skeleton(self) -> set:
        return ({frozenset(edge) for edge in self.directed}
                | set(self.undirected))

    def orient(self, parent: str, child: str):
        self.undirected.discard(frozenset((parent, child)))
        self.directed.add((parent, child))

    def undirected_pairs(self) -> List[Edge]:
        return sorted(tuple(sorted(pair)) for pair in self.undirected)

    def directed_graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(self.nodes)
        graph.add_edges_from(self.directed)
        return graph

    def to_dot(self, name: str = 'cpdag') -> str:
        return render_dot(self.nodes, self.directed,
                          self.undirected_pairs(), name=name)


class IcLearner:
    """Blanket-guided IC: blankets, skeleton, v-structures, propagation."""

    def __init__(self, data: pd.DataFrame, alpha: Optional[float] = None,
                 min_expected: Optional[float] = None):
        _check_columns(data, data.columns)
        self.alpha = settings.IC_ALPHA if alpha is None else alpha
        if not 0 < self.alpha < 1:
            raise InvalidArgumentError('alpha must lie in (0, 1)')
        self.min_expected = (settings.CHI2_MIN_EXPECTED
                             if min_expected is None else min_expected)
        self.nodes = tuple(data.columns)
        self._encoded = _encode(data)
        self.n_tests = 0

    def independent(self, x: str, y: str, z: Iterable[str]) -> bool:
        self.n_tests += 1
        result = _ci_test(self._encoded, x, y, sorted(z), self.min_expected)
        return result.independent(self.alpha)

    def _p_value(self, x: str, y: str, z: Iterable[str]) -> float:
        self.n_tests += 1
        return _ci_test(self._encoded, x, y, sorted(z),
                        self.min_expected).p_value

    def markov_blanket(self, node: str) -> FrozenSet[str]:
        """Grow-shrink blanket estimate of `node`."""
        blanket: List[str] = []
        changed = True
        while changed:
            changed = False
            candidates = [other for other in self.nodes
                          if other != node and other not in blanket]
            scored = [(self._p_value(node, other, blanket), rank, other)
                      for rank, other in enumerate(candidates)]
            scored = [item for item in scored if item[0] <= self.alpha]
            if scored:
                blanket.append(min(scored)[2])
                changed = True
        for other in list(blanket):
            rest = [name for name in blanket if name != other]
            if self.independent(node, other, rest):
                blanket.remove(other)
        return frozenset(blanket)

    def blankets(self) -> Dict[str, FrozenSet[str]]:
        raw = {node: self.markov_blanket(node) for node in self.nodes}
        symmetric = {
            node: frozenset(other for other in members if node in raw[other])
            for node, members in raw.items()
        }
        dropped = sum(len(raw[node]) - len(symmetric[node])
                      for node in self.nodes)
        if dropped:
            logger.debug('dropped %d asymmetric blanket memberships', dropped)
        return symmetric

    def skeleton(self, blankets: Dict[str, FrozenSet[str]]
                 ) -> PartiallyDirectedGraph:
        graph = PartiallyDirectedGraph(self.nodes)
        for a, b in itertools.combinations(self.nodes, 2):
            pair = frozenset((a, b))
            if b not in blankets[a]:
                smaller = min(blankets[a], blankets[b], key=len)
                graph.separating_sets[pair] = tuple(sorted(smaller - pair))
                continue
            pool = sorted(min(blankets[a] - {b}, blankets[b] - {a},
                              key=len))
            separated = None
            for size in range(len(pool) + 1):
                for subset in itertools.combinations(pool, size):
                    if self.independent(a, b, subset):
                        separated = subset
                        break
                if separated is not None:
                    break
            if separated is None:
                graph.undirected.add(pair)
            else:
                graph.separating_sets[pair] = tuple(separated)
        return graph

    def orient_colliders(self, graph: PartiallyDirectedGraph):
        for a, b in itertools.combinations(self.nodes, 2):
            if graph.adjacent(a, b):
                continue
            sepset = graph.separating_sets.get(frozenset((a, b)), ())
            for middle in self.nodes:
                if middle in (a, b) or middle in sepset:
                    continue
                if not (graph.adjacent(a, middle)
                        and graph.adjacent(b, middle)):
                    continue
                for end in (a, b):
                    if (middle, end) in graph.directed:
                        logger.debug('conflicting collider at %s, keeping '
                                     '%s -> %s', middle, middle, end)
                    else:
                        graph.orient(end, middle)

    def propagate(self, graph: PartiallyDirectedGraph):
        """Orient undirected edges until neither rule applies."""
        changed = True
        while changed:
            changed = False
            for a, b in graph.undirected_pairs():
                for start, end in ((a, b), (b, a)):
                    directed = graph.directed_graph()
                    if nx.has_path(directed, start, end):
                        graph.orient(start, end)
                        changed = True
                        break
                    if any((parent, start) in graph.directed
                           and not graph.adjacent(parent, end)
                           for parent in self.nodes
                           if parent not in (start, end)):
                        graph.orient(start, end)
                        changed = True
                        break
                if changed:
                    break

    def learn(self) -> PartiallyDirectedGraph:
        graph = self.skeleton(self.blankets())
        self.orient_colliders(graph)
        self.propagate(graph)
        logger.info('IC learned %d directed and %d undirected edges '
                    'with %d tests', len(graph.directed),
                    len(graph.undirected), self.n_tests)
        return graph


def ic_learn(data: pd.DataFrame,
             alpha: Optional[float] = None) -> PartiallyDirectedGraph:
    return IcLearner(data, alpha).learn()
