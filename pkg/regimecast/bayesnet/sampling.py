import numpy as np
import pandas as pd

from regimecast.errors import InvalidArgumentError

from .network import BayesianNetwork


def forward_sample(net: BayesianNetwork, n_rows: int,
                   seed: int) -> pd.DataFrame:
    """Ancestral sampling: parents are drawn before their children."""
    if n_rows < 0:
        raise InvalidArgumentError('n_rows must be non-negative')
    rng = np.random.default_rng(seed)
    states = {}
    for name in net.dag.topological_order():
        cpd = net.cpds[name]
        if cpd.parents:
            configs = np.ravel_multi_index(
                tuple(states[parent] for parent in cpd.parent_names),
                tuple(parent.cardinality for parent in cpd.parents),
            )
        else:
            configs = np.zeros(n_rows, dtype=np.intp)
        cumulative = np.cumsum(cpd.table, axis=0)[:, configs]
        draws = rng.random(n_rows)
        states[name] = np.minimum(
            (draws[None, :] >= cumulative).sum(axis=0),
            cpd.child.cardinality - 1,
        )
    return pd.DataFrame({
        name: np.asarray(net.variables[name].labels, dtype=object)[
            states[name]]
        for name in net.dag.variables
    }).infer_objects()
