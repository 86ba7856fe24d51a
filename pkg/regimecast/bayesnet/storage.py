"""`.bn.json` persistence and DOT rendering of graphs."""
import json
import os
from pathlib import Path
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
from django.template.loader import render_to_string

from regimecast.errors import InvalidArgumentError

from .exceptions import CorruptNetworkError, NetworkIOError
from .network import BayesianNetwork, Cpd, Dag, DiscreteVariable

NETWORK_SUFFIX = '.bn.json'


def network_to_dict(net: BayesianNetwork) -> dict:
    return {
        'variables': [
            {'name': name, 'labels': list(variable.labels)}
            for name, variable in net.variables.items()
        ],
        'edges': [list(edge) for edge in net.dag.sorted_edges()],
        'cpds': [
            {
                'child': name,
                'parents': list(cpd.parent_names),
                'table': cpd.table.T.ravel().tolist(),
            }
            for name, cpd in net.cpds.items()
        ],
    }


def _unflatten(values, child: DiscreteVariable) -> np.ndarray:
    """One distribution per parent configuration back to (card, configs)."""
    return np.asarray(values, dtype=float).reshape(-1, child.cardinality).T


def network_from_dict(payload: dict) -> BayesianNetwork:
    variables = {
        item['name']: DiscreteVariable(item['name'], tuple(item['labels']))
        for item in payload['variables']
    }
    dag = Dag(variables, [tuple(edge) for edge in payload['edges']])
    cpds = [
        Cpd(
            child=variables[item['child']],
            parents=tuple(variables[name] for name in item['parents']),
            table=_unflatten(item['table'], variables[item['child']]),
        )
        for item in payload['cpds']
    ]
    return BayesianNetwork(dag, cpds)


def save_network(net: BayesianNetwork, path: Union[str, Path]) -> Path:
    path = Path(path)
    tmp_path = path.with_name(path.name + '.tmp')
    try:
        with open(tmp_path, 'w', encoding='utf-8') as fh:
            json.dump(network_to_dict(net), fh, indent=2)
        os.replace(tmp_path, path)
    except OSError as exc:
        raise NetworkIOError(f'cannot write network {path}: {exc}') from exc
    return path


def load_network(path: Union[str, Path]) -> BayesianNetwork:
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            payload = json.load(fh)
        return network_from_dict(payload)
    except OSError as exc:
        raise NetworkIOError(f'cannot read network {path}: {exc}') from exc
    except json.JSONDecodeError as exc:
        raise CorruptNetworkError(f'{path}: not valid JSON ({exc})') from exc
    except (KeyError, TypeError, ValueError, InvalidArgumentError) as exc:
        raise CorruptNetworkError(f'{path}: {exc}') from exc


def _quoted(name) -> str:
    return str(name).replace('\\', '\\\\').replace('"', '\\"')


def render_dot(nodes: Sequence[str],
               directed: Iterable[Tuple[str, str]],
               undirected: Iterable[Tuple[str, str]] = (),
               name: str = 'network') -> str:
    return render_to_string('bayesnet/graph.dot', {
        'name': _quoted(name),
        'nodes': [_quoted(node) for node in nodes],
        'directed': [(_quoted(a), _quoted(b)) for a, b in sorted(directed)],
        'undirected': [
            (_quoted(a), _quoted(b)) for a, b in sorted(undirected)
        ],
    })


def dag_to_dot(dag: Dag, name: str = 'network') -> str:
    return render_dot(dag.variables, dag.edges, name=name)
