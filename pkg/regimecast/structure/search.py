"""Greedy hill climbing over DAGs with a tabu list and random escapes."""
import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import FrozenSet, Iterator, List, Optional, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd
from django.conf import settings

from bayesnet.network import Dag, Edge
from regimecast.errors import InvalidArgumentError

from .exceptions import InvalidSeedError
from .scores import ScoreCache, ScoreSpec, Variables

logger = logging.getLogger(__name__)

OPERATIONS = ('add', 'delete', 'reverse')
GRAPH_PRIORS = ('uniform',)


@dataclass(frozen=True)
class SearchConfig:
    score: ScoreSpec = field(default_factory=ScoreSpec)
    tabu_size: int = 100
    max_iters: int = 1000
    n_random_ops_at_local_max: int = 5
    n_restarts: int = 0
    max_parents: Optional[int] = None
    forbidden_edges: FrozenSet[Edge] = frozenset()
    required_edges: FrozenSet[Edge] = frozenset()
    seed: int = 0
    graph_prior: str = 'uniform'

    def __post_init__(self):
        object.__setattr__(self, 'forbidden_edges', frozenset(
            tuple(edge) for edge in self.forbidden_edges))
        object.__setattr__(self, 'required_edges', frozenset(
            tuple(edge) for edge in self.required_edges))
        if self.tabu_size < 0:
            raise InvalidArgumentError('tabu_size must be >= 0')
        if self.max_iters < 0:
            raise InvalidArgumentError('max_iters must be >= 0')
        if self.n_random_ops_at_local_max < 0 or self.n_restarts < 0:
            raise InvalidArgumentError(
                'random operator and restart counts must be >= 0'
            )
        if self.max_parents is not None and self.max_parents < 0:
            raise InvalidArgumentError('max_parents must be >= 0')
        overlap = self.forbidden_edges & self.required_edges
        if overlap:
            raise InvalidArgumentError(
                f'edges both required and forbidden: {sorted(overlap)}'
            )
        if self.graph_prior not in GRAPH_PRIORS:
            raise InvalidArgumentError(
                f'unknown graph prior {self.graph_prior!r}, '
                f'expected one of {GRAPH_PRIORS}'
            )

    @classmethod
    def from_settings(cls, **overrides) -> 'SearchConfig':
        values = {
            'score': ScoreSpec(settings.SEARCH_SCORE),
            'tabu_size': settings.SEARCH_TABU_SIZE,
            'max_iters': settings.SEARCH_MAX_ITERS,
            'n_random_ops_at_local_max': settings.SEARCH_RANDOM_OPS,
            'n_restarts': settings.SEARCH_RESTARTS,
            'max_parents': settings.SEARCH_MAX_PARENTS,
        }
        values.update(overrides)
        return cls(**values)


@dataclass(frozen=True)
class Move:
    operation: str
    edge: Edge
    delta: float = 0.0


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    operation: str
    edge: str
    score: float


def _canonical(edges) -> Tuple[Edge, ...]:
    return tuple(sorted(edges))


class HillClimber:
    """Жадный поиск структуры с табу-списком

    Every accepted move strictly improves the score; at a local optimum the
    climber either stops or, while restarts remain, perturbs the current
    graph with seeded random operators and climbs again.
    """

    def __init__(self, data: pd.DataFrame,
                 config: Optional[SearchConfig] = None,
                 variables: Variables = None):
        self.config = config or SearchConfig()
        self.cache = ScoreCache(data, self.config.score, variables)
        self.trace: List[TraceRow] = []
        self._rng = np.random.default_rng(self.config.seed)
        self._names: List[str] = []
        self._parents = {}
        self._graph = nx.DiGraph()

    def _check_seed(self, seed_dag: Dag):
        if set(seed_dag.variables) != set(self.cache.variables):
            raise InvalidSeedError(
                f'seed graph nodes {sorted(seed_dag.variables)} differ from '
                f'data columns {sorted(self.cache.variables)}'
            )
        missing = self.config.required_edges - seed_dag.edges
        if missing:
            raise InvalidSeedError(
                f'required edges absent from seed: {sorted(missing)}'
            )
        forbidden = self.config.forbidden_edges & seed_dag.edges
        if forbidden:
            raise InvalidSeedError(
                f'seed contains forbidden edges: {sorted(forbidden)}'
            )
        limit = self.config.max_parents
        if limit is not None:
            crowded = [name for name in seed_dag.variables
                       if len(seed_dag.parents(name)) > limit]
            if crowded:
                raise InvalidSeedError(
                    f'seed exceeds max_parents={limit} at {crowded}'
                )

    def _room_for_parent(self, node: str) -> bool:
        limit = self.config.max_parents
        return limit is None or len(self._parents[node]) < limit

    def _moves(self) -> Iterator[Move]:
        """Legal single-edge moves, ordered by operation then edge."""
        edges = sorted(self._graph.edges)
        forbidden = self.config.forbidden_edges
        required = self.config.required_edges
        for parent in self._names:
            for child in self._names:
                if parent == child or self._graph.has_edge(parent, child):
                    continue
                if self._graph.has_edge(child, parent):
                    continue
                if (parent, child) in forbidden:
                    continue
                if not self._room_for_parent(child):
                    continue
                if nx.has_path(self._graph, child, parent):
                    continue
                yield Move('add', (parent, child))
        for edge in edges:
            if edge not in required:
                yield Move('delete', edge)
        for parent, child in edges:
            if (parent, child) in required or (child, parent) in forbidden:
                continue
            if not self._room_for_parent(parent):
                continue
            self._graph.remove_edge(parent, child)
            cyclic = nx.has_path(self._graph, parent, child)
            self._graph.add_edge(parent, child)
            if not cyclic:
                yield Move('reverse', (parent, child))

    def _family_delta(self, child: str, add=(), remove=()) -> float:
        before = self._parents[child]
        after = (before | set(add)) - set(remove)
        return (self.cache.family(child, after).score
                - self.cache.family(child, before).score)

    def _delta(self, move: Move) -> float:
        parent, child = move.edge
        if move.operation == 'add':
            return self._family_delta(child, add=(parent,))
        delta = self._family_delta(child, remove=(parent,))
        if move.operation == 'reverse':
            delta += self._family_delta(parent, add=(child,))
        return delta

    def _edges_after(self, move: Move) -> Tuple[Edge, ...]:
        edges = set(self._graph.edges)
        parent, child = move.edge
        if move.operation == 'add':
            edges.add(move.edge)
        else:
            edges.discard(move.edge)
            if move.operation == 'reverse':
                edges.add((child, parent))
        return _canonical(edges)

    def _apply(self, move: Move):
        parent, child = move.edge
        if move.operation == 'add':
            self._graph.add_edge(parent, child)
            self._parents[child] = self._parents[child] | {parent}
            return
        self._graph.remove_edge(parent, child)
        self._parents[child] = self._parents[child] - {parent}
        if move.operation == 'reverse':
            self._graph.add_edge(child, parent)
            self._parents[parent] = self._parents[parent] | {child}

    def _score(self) -> float:
        return float(sum(
            self.cache.family(name, self._parents[name]).score
            for name in self._names
        ))

    def _record(self, iteration: int, operation: str, edge: str,
                score: float):
        self.trace.append(TraceRow(iteration, operation, edge, score))

    def _best_move(self, tabu) -> Optional[Move]:
        best = None
        for move in self._moves():
            if self._edges_after(move) in tabu:
                continue
            delta = self._delta(move)
            if best is None or delta > best.delta:
                best = Move(move.operation, move.edge, delta)
        return best

    def _random_move(self, tabu) -> Optional[Move]:
        candidates = [move for move in self._moves()
                      if self._edges_after(move) not in tabu]
        if not candidates:
            return None
        return candidates[int(self._rng.integers(len(candidates)))]

    def run(self, seed_dag: Dag) -> Dag:
        self._check_seed(seed_dag)
        self.trace = []
        self._names = sorted(seed_dag.variables)
        self._parents = {name: frozenset(seed_dag.parents(name))
                         for name in self._names}
        self._graph = seed_dag.to_networkx()
        tabu = deque(maxlen=self.config.tabu_size)
        current = self._score()
        best_score, best_edges = current, _canonical(seed_dag.edges)
        tabu.append(best_edges)
        self._record(0, 'start', '', current)
        escapes = 0
        iteration = 0
        while iteration < self.config.max_iters:
            iteration += 1
            move = self._best_move(tabu)
            if move is not None and move.delta > 0:
                self._apply(move)
                current = self._score()
                tabu.append(_canonical(self._graph.edges))
                self._record(iteration, move.operation,
                             '{} -> {}'.format(*move.edge), current)
                logger.debug('iteration %d: %s %s -> %s, score %.6f',
                             iteration, move.operation, *move.edge, current)
                if current > best_score:
                    best_score = current
                    best_edges = _canonical(self._graph.edges)
                continue
            if escapes >= self.config.n_restarts:
                break
            escapes += 1
            logger.debug('local optimum at iteration %d, escape %d of %d',
                         iteration, escapes, self.config.n_restarts)
            for _ in range(self.config.n_random_ops_at_local_max):
                move = self._random_move(tabu)
                if move is None:
                    break
                self._apply(move)
                self._record(iteration, f'random:{move.operation}',
                             '{} -> {}'.format(*move.edge), self._score())
            current = self._score()
            tabu.append(_canonical(self._graph.edges))
        result = seed_dag.with_edges(best_edges)
        logger.info('hill climb finished after %d iterations: score %.4f, '
                    '%d edges, %d cached families',
                    iteration, best_score, len(best_edges),
                    self.cache.misses)
        return result


def hill_climb(data: pd.DataFrame, seed_dag: Dag,
               config: Optional[SearchConfig] = None,
               variables: Variables = None) -> Dag:
    return HillClimber(data, config, variables).run(seed_dag)


def trace_frame(rows: List[TraceRow]) -> pd.DataFrame:
    return pd.DataFrame(
        [(row.iteration, row.operation, row.edge, row.score) for row in rows],
        columns=['iteration', 'operation', 'edge', 'score'],
    )


def write_trace(rows: List[TraceRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    trace_frame(rows).to_csv(path, index=False, float_format='%.10g')
    return path
