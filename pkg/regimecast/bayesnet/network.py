"""Directed acyclic graphs, discrete variables, CPDs and networks."""
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import networkx as nx
import numpy as np
from django.conf import settings

from regimecast.errors import InvalidArgumentError

Edge = Tuple[str, str]


@dataclass(frozen=True)
class DiscreteVariable:
    name: str
    labels: Tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise InvalidArgumentError(f'{self.name}: no state labels')
        if len(set(labels)) != len(labels):
            raise InvalidArgumentError(f'{self.name}: duplicate labels')
        object.__setattr__(self, 'labels', labels)

    @property
    def cardinality(self) -> int:
        return len(self.labels)

    def index_of(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidArgumentError(
                f'{self.name}: unknown state {label!r}, '
                f'expected one of {list(self.labels)}'
            ) from None


def regime_variables(names: Iterable[str]) -> Dict[str, DiscreteVariable]:
    return {
        name: DiscreteVariable(name, tuple(settings.REGIME_LABELS))
        for name in names
    }


@dataclass(frozen=True)
class Dag:
    """Ориентированный ациклический граф"""

    variables: Tuple[str, ...]
    edges: frozenset

    def __init__(self, variables: Iterable[str],
                 edges: Iterable[Edge] = ()):
        variables = tuple(variables)
        edge_list = [tuple(edge) for edge in edges]
        if len(set(variables)) != len(variables):
            raise InvalidArgumentError('duplicate variable names')
        if len(set(edge_list)) != len(edge_list):
            raise InvalidArgumentError('duplicate edges')
        known = set(variables)
        for parent, child in edge_list:
            if parent == child:
                raise InvalidArgumentError(f'self-loop on {parent}')
            if parent not in known or child not in known:
                raise InvalidArgumentError(
                    f'edge {parent} -> {child} names an unknown variable'
                )
        object.__setattr__(self, 'variables', variables)
        object.__setattr__(self, 'edges', frozenset(edge_list))
        if not nx.is_directed_acyclic_graph(self.to_networkx()):
            raise InvalidArgumentError('graph contains a cycle')

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(self.variables)
        graph.add_edges_from(self.edges)
        return graph

    def parents(self, child: str) -> Tuple[str, ...]:
        parents = {parent for parent, node in self.edges if node == child}
        return tuple(name for name in self.variables if name in parents)

    def children(self, parent: str) -> Tuple[str, ...]:
        children = {child for node, child in self.edges if node == parent}
        return tuple(name for name in self.variables if name in children)

    def topological_order(self) -> List[str]:
        rank = {name: index for index, name in enumerate(self.variables)}
        return list(nx.lexicographical_topological_sort(
            self.to_networkx(), key=rank.__getitem__,
        ))

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges)

    def with_edges(self, edges: Iterable[Edge]) -> 'Dag':
        return Dag(self.variables, edges)


def markov_blanket(dag: Dag, node: str) -> Tuple[str, ...]:
    """Parents, children and the children's other parents of `node`."""
    members = set(dag.parents(node)) | set(dag.children(node))
    for child in dag.children(node):
        members |= set(dag.parents(child))
    members.discard(node)
    return tuple(name for name in dag.variables if name in members)


@dataclass(frozen=True, eq=False)
class Cpd:
    """Таблица P(child | parents), столбец на конфигурацию родителей.

    Columns enumerate parent configurations in row-major order, the last
    parent varying fastest.
    """

    child: DiscreteVariable
    parents: Tuple[DiscreteVariable, ...]
    table: np.ndarray

    def __post_init__(self):
        parents = tuple(self.parents)
        table = np.asarray(self.table, dtype=float)
        n_configs = int(np.prod([p.cardinality for p in parents]))
        expected = (self.child.cardinality, n_configs)
        if table.ndim == 1 and not parents:
            table = table.reshape(-1, 1)
        if table.shape != expected:
            raise InvalidArgumentError(
                f'CPD of {self.child.name}: table shape {table.shape}, '
                f'expected {expected}'
            )
        tolerance = settings.PROBABILITY_TOLERANCE
        if np.any(table < -tolerance) or not np.allclose(
                table.sum(axis=0), 1.0, rtol=0, atol=tolerance):
            raise InvalidArgumentError(
                f'CPD of {self.child.name}: columns must be distributions'
            )
        table.setflags(write=False)
        object.__setattr__(self, 'parents', parents)
        object.__setattr__(self, 'table', table)

    @property
    def parent_names(self) -> Tuple[str, ...]:
        return tuple(parent.name for parent in self.parents)

    def as_array(self) -> np.ndarray:
        """Table reshaped to one axis per variable: (child, *parents)."""
        return self.table.reshape(
            (self.child.cardinality,)
            + tuple(parent.cardinality for parent in self.parents)
        )

    def probability(self, child_index: int,
                    parent_indices: Sequence[int] = ()) -> float:
        return float(self.as_array()[(child_index, *parent_indices)])


class BayesianNetwork:
    """Байесовская сеть: граф и по одной CPD на переменную"""

    def __init__(self, dag: Dag, cpds: Iterable[Cpd]):
        cpds = list(cpds)
        by_name = {cpd.child.name: cpd for cpd in cpds}
        if len(by_name) != len(cpds) or set(by_name) != set(dag.variables):
            raise InvalidArgumentError(
                'exactly one CPD per network variable is required'
            )
        for name, cpd in by_name.items():
            if set(cpd.parent_names) != set(dag.parents(name)):
                raise InvalidArgumentError(
                    f'CPD parents of {name} {list(cpd.parent_names)} do not '
                    f'match graph parents {list(dag.parents(name))}'
                )
        self.dag = dag
        self.cpds: Dict[str, Cpd] = {
            name: by_name[name] for name in dag.variables
        }
        self.variables: Dict[str, DiscreteVariable] = {
            name: cpd.child for name, cpd in self.cpds.items()
        }

    def __repr__(self):
        return (
            f'BayesianNetwork({len(self.variables)} variables, '
            f'{len(self.dag.edges)} edges)'
        )

    def evidence_indices(self, evidence: Mapping[str, object],
                         by_label: bool = False) -> Dict[str, int]:
        """Validate evidence; `by_label` converts state labels to indices."""
        indices = {}
        for name, value in evidence.items():
            if name not in self.variables:
                raise InvalidArgumentError(f'unknown variable {name!r}')
            variable = self.variables[name]
            if by_label:
                indices[name] = variable.index_of(value)
                continue
            index = int(value)
            if not 0 <= index < variable.cardinality:
                raise InvalidArgumentError(
                    f'{name}: state {index} outside cardinality '
                    f'{variable.cardinality}'
                )
            indices[name] = index
        return indices
