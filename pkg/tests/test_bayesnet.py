import itertools
import json
import re

import numpy as np
import pandas as pd
import pytest

from bayesnet.estimators import fit_bayesian, fit_mle
from bayesnet.exceptions import (
    CorruptNetworkError, InconsistentEvidenceError, NetworkIOError,
)
from bayesnet.inference import joint_probability, map_predict, query
from bayesnet.network import (
    BayesianNetwork, Cpd, Dag, DiscreteVariable, markov_blanket,
    regime_variables,
)
from bayesnet.sampling import forward_sample
from bayesnet.storage import dag_to_dot, load_network, save_network
from fixtures.networks import FALSE, TRUE
from regimecast.errors import InvalidArgumentError


def random_network(seed: int, n_variables: int = 4) -> BayesianNetwork:
    """Случайная сеть: рёбра только от ранних переменных к поздним."""
    rng = np.random.default_rng(seed)
    names = [f"V{index}" for index in range(n_variables)]
    variables = {
        name: DiscreteVariable(name, tuple(range(rng.integers(2, 4))))
        for name in names
    }
    edges = [(a, b) for i, a in enumerate(names) for b in names[i + 1:]
             if rng.random() < 0.5]
    dag = Dag(names, edges)
    cpds = []
    for name in names:
        parents = tuple(variables[p] for p in dag.parents(name))
        n_configs = int(np.prod([p.cardinality for p in parents]))
        table = rng.dirichlet(np.ones(variables[name].cardinality),
                              size=n_configs).T
        cpds.append(Cpd(variables[name], parents, table))
    return BayesianNetwork(dag, cpds)


def brute_force_posterior(net, target, evidence):
    names = list(net.dag.variables)
    cards = [net.variables[name].cardinality for name in names]
    scores = np.zeros(net.variables[target].cardinality)
    for states in itertools.product(*(range(card) for card in cards)):
        assignment = dict(zip(names, states))
        if any(assignment[name] != value for name, value in evidence.items()):
            continue
        scores[assignment[target]] += joint_probability(net, assignment)
    return scores / scores.sum()


def test_joint_probability_of_computer_failure(computer_failure):
    assignment = {"E": TRUE, "M": FALSE, "C": TRUE}
    assert joint_probability(computer_failure, assignment) == pytest.approx(
        0.08, abs=1e-12
    ), "P(E=t, M=f, C=t) = 1 * 0.1 * 0.8 = 0.08."
    impossible = {"E": FALSE, "M": FALSE, "C": TRUE}
    assert joint_probability(computer_failure, impossible) == 0.0


def test_joint_probability_of_single_variable():
    x = DiscreteVariable("X", (0, 1))
    net = BayesianNetwork(Dag(["X"]), [Cpd(x, (), [0.3, 0.7])])
    assert joint_probability(net, {"X": 1}) == pytest.approx(0.7)


def test_joint_probability_needs_full_assignment(computer_failure):
    with pytest.raises(InvalidArgumentError):
        joint_probability(computer_failure, {"E": TRUE, "C": TRUE})


@pytest.mark.parametrize("target, evidence, expected", [
    ("C", {}, 0.19),
    ("E", {"C": TRUE}, 10 / 19),
    ("M", {"C": TRUE}, 11 / 19),
])
def test_computer_failure_posteriors(computer_failure, target, evidence,
                                     expected):
    posterior = query(computer_failure, target, evidence)
    assert posterior.probabilities[TRUE] == pytest.approx(
        expected, abs=1e-9
    ), (
        f"P({target}=true | {evidence}) должна быть {expected:.6f}, "
        f"получено {posterior.probabilities[TRUE]:.6f}."
    )


def test_sprinkler_posterior_of_rain(sprinkler):
    posterior = query(sprinkler, "R", {"G": TRUE})
    assert posterior.probabilities[TRUE] == pytest.approx(
        0.002 / 0.1972, abs=1e-6
    ), "P(R=T | G=T) = 0.002 / 0.1972."
    assert posterior.probabilities.sum() == pytest.approx(1.0, abs=1e-9)


def test_zero_probability_evidence_is_reported(computer_failure):
    with pytest.raises(InconsistentEvidenceError):
        query(computer_failure, "M", {"E": TRUE, "C": FALSE})


def test_query_rejects_target_in_evidence(computer_failure):
    with pytest.raises(InvalidArgumentError):
        query(computer_failure, "C", {"C": TRUE})


def test_query_matches_enumeration_for_every_evidence_subset():
    for seed in range(5):
        net = random_network(seed)
        names = list(net.dag.variables)
        for target in names:
            others = [name for name in names if name != target]
            for size in range(len(others) + 1):
                for observed in itertools.combinations(others, size):
                    cards = [range(net.variables[name].cardinality)
                             for name in observed]
                    for states in itertools.product(*cards):
                        evidence = dict(zip(observed, states))
                        posterior = query(net, target, evidence)
                        expected = brute_force_posterior(net, target,
                                                         evidence)
                        assert np.allclose(posterior.probabilities, expected,
                                           rtol=0, atol=1e-10), (
                            f"Сеть {seed}: P({target} | {evidence}) "
                            "расходится с перебором совместного "
                            "распределения."
                        )


def test_posterior_does_not_depend_on_elimination_order():
    net = random_network(seed=21)
    target = "V3"
    eliminate = ["V0", "V1", "V2"]
    reference = query(net, target).probabilities
    for order in itertools.permutations(eliminate):
        posterior = query(net, target, elimination_order=order)
        assert np.allclose(posterior.probabilities, reference,
                           rtol=0, atol=1e-10), (
            f"Порядок исключения {order} изменил апостериорное "
            "распределение."
        )


def test_map_predict_follows_deterministic_parent():
    x, t = DiscreteVariable("X", (0, 1, 2)), DiscreteVariable("T", (0, 1, 2))
    net = BayesianNetwork(
        Dag(["X", "T"], [("X", "T")]),
        [Cpd(x, (), [1 / 3] * 3), Cpd(t, (x,), np.eye(3))],
    )
    prediction = map_predict(net, pd.DataFrame({"X": [2, 0, 1]}), "T")
    assert list(prediction.states) == [2, 0, 1], (
        "Цель, копирующая родителя, должна предсказываться его значением."
    )
    assert not prediction.fallback.any()


def test_map_predict_breaks_ties_toward_first_state():
    x, t = DiscreteVariable("X", (0, 1, 2)), DiscreteVariable("T", (0, 1, 2))
    net = BayesianNetwork(
        Dag(["X", "T"]), [Cpd(x, (), [0.2, 0.3, 0.5]),
                          Cpd(t, (), [1 / 3] * 3)],
    )
    prediction = map_predict(net, pd.DataFrame({"X": [0, 1, 2]}), "T")
    assert list(prediction.states) == [0, 0, 0]


def test_map_predict_matches_joint_table_argmax():
    variables = regime_variables(["A", "B", "T"])
    rng = np.random.default_rng(4)
    dag = Dag(["A", "B", "T"], [("A", "T"), ("B", "T"), ("A", "B")])
    net = BayesianNetwork(dag, [
        Cpd(variables["A"], (), rng.dirichlet(np.ones(3))),
        Cpd(variables["B"], (variables["A"],),
            rng.dirichlet(np.ones(3), size=3).T),
        Cpd(variables["T"], (variables["A"], variables["B"]),
            rng.dirichlet(np.ones(3), size=9).T),
    ])
    rows = pd.DataFrame(list(itertools.product(range(3), repeat=3)),
                        columns=["A", "B", "T"])
    prediction = map_predict(net, rows.drop(columns=["T"]), "T")
    for position, (a, b, _) in enumerate(rows.itertuples(index=False)):
        joint = [joint_probability(net, {"A": a, "B": b, "T": state})
                 for state in range(3)]
        assert prediction.states[position] == int(np.argmax(joint)), (
            f"Строка A={a}, B={b}: MAP-прогноз не совпал с argmax "
            "совместной таблицы."
        )


def test_map_predict_falls_back_to_prior(computer_failure):
    rows = pd.DataFrame({"E": ["T", "F"], "C": ["F", "T"]})
    prediction = map_predict(computer_failure, rows, "M")
    assert list(prediction.fallback) == [True, False], (
        "Строка с нулевой вероятностью свидетельства должна быть помечена."
    )
    assert prediction.states[0] == FALSE, (
        "При несовместном свидетельстве берётся argmax априорного "
        "распределения цели."
    )
    frame = prediction.to_frame(rows.index, ("F", "T"))
    assert list(frame.columns) == ["prediction", "fallback"]
    assert list(frame["fallback"]) == [1, 0]


def test_map_predict_needs_evidence_columns(computer_failure):
    with pytest.raises(InvalidArgumentError):
        map_predict(computer_failure, pd.DataFrame({"E": ["T"]}), "M")


def test_fit_mle_copies_identity():
    rng = np.random.default_rng(0)
    x = rng.integers(0, 3, 300)
    data = pd.DataFrame({"X": x, "Y": x})
    net = fit_mle(Dag(["X", "Y"], [("X", "Y")]), data)
    assert np.allclose(net.cpds["Y"].table, np.eye(3)), (
        "Для Y = X условная таблица должна быть единичной матрицей."
    )
    expected = np.bincount(x, minlength=3) / x.size
    assert np.allclose(net.cpds["X"].table[:, 0], expected), (
        "Без родителей CPD - маргинальные частоты."
    )


def test_fit_mle_unseen_parent_configuration_is_uniform():
    data = pd.DataFrame({"X": [0, 0, 1, 1], "Y": [0, 1, 2, 2]})
    net = fit_mle(Dag(["X", "Y"], [("X", "Y")]), data)
    assert np.allclose(net.cpds["Y"].table[:, 2], [1 / 3] * 3), (
        "Ненаблюдавшаяся конфигурация родителей даёт равномерное "
        "распределение."
    )


def test_fit_rejects_unknown_states():
    data = pd.DataFrame({"X": [0, 3]})
    with pytest.raises(InvalidArgumentError):
        fit_mle(Dag(["X"]), data)


def test_fit_mle_reproduces_empirical_frequencies():
    rng = np.random.default_rng(1)
    data = pd.DataFrame({"A": rng.integers(0, 3, 2000),
                         "B": rng.integers(0, 3, 2000)})
    data["C"] = (data["A"] + data["B"] + rng.integers(0, 2, 2000)) % 3
    dag = Dag(["A", "B", "C"], [("A", "C"), ("B", "C"), ("A", "B")])
    net = fit_mle(dag, data)
    frequencies = data.value_counts(normalize=True)
    for (a, b, c), expected in frequencies.items():
        assert joint_probability(net, {"A": a, "B": b, "C": c}) == \
            pytest.approx(expected, abs=1e-9)


def test_fit_bayesian_without_data_is_the_prior():
    data = pd.DataFrame({"X": pd.Series([], dtype=int)})
    net = fit_bayesian(Dag(["X"]), data, prior="k2")
    assert np.allclose(net.cpds["X"].table[:, 0], [1 / 3] * 3)


def test_fit_bayesian_k2_pseudo_counts():
    data = pd.DataFrame({"X": [0, 0]})
    net = fit_bayesian(Dag(["X"]), data, prior="k2")
    assert np.allclose(net.cpds["X"].table[:, 0], [3 / 5, 1 / 5, 1 / 5]), (
        "Для счётчиков [2, 0, 0] априорное K2 даёт [3/5, 1/5, 1/5]."
    )


def test_fit_bayesian_bdeu_pseudo_counts():
    data = pd.DataFrame({"X": [0, 1, 1], "Y": [0, 0, 2]})
    net = fit_bayesian(Dag(["X", "Y"], [("X", "Y")]), data, prior="bdeu",
                       ess=9.0)
    pseudo = 9.0 / (3 * 3)
    expected = np.array([1 + pseudo, pseudo, 1 + pseudo]) / (2 + 3 * pseudo)
    assert np.allclose(net.cpds["Y"].table[:, 1], expected)
    with pytest.raises(InvalidArgumentError):
        fit_bayesian(Dag(["X"]), data, prior="bdeu", ess=0)


def test_fit_bayesian_approaches_mle_on_large_data():
    rng = np.random.default_rng(2)
    a = rng.integers(0, 3, 10000)
    data = pd.DataFrame({"A": a, "B": (a + (rng.random(10000) < 0.3)) % 3})
    dag = Dag(["A", "B"], [("A", "B")])
    bayes = fit_bayesian(dag, data, prior="k2")
    mle = fit_mle(dag, data)
    for name in dag.variables:
        assert np.allclose(bayes.cpds[name].table, mle.cpds[name].table,
                           atol=0.01)


def test_forward_sample_is_reproducible(chain):
    first = forward_sample(chain, 500, seed=3)
    second = forward_sample(chain, 500, seed=3)
    pd.testing.assert_frame_equal(first, second)
    assert set(first["X"]) <= {"F", "T"}
    agreement = (first["X"] == first["Y"]).mean()
    assert 0.78 < agreement < 0.92, (
        f"Доля совпадений X и Y {agreement:.2f} далека от 0.85."
    )


def test_dag_rejects_cycles_and_self_loops():
    with pytest.raises(InvalidArgumentError):
        Dag(["A", "B"], [("A", "B"), ("B", "A")])
    with pytest.raises(InvalidArgumentError):
        Dag(["A"], [("A", "A")])
    with pytest.raises(InvalidArgumentError):
        Dag(["A", "B"], [("A", "B"), ("A", "B")])
    with pytest.raises(InvalidArgumentError):
        Dag(["A"], [("A", "Z")])


def test_markov_blanket_includes_co_parents(sprinkler, collider):
    assert set(markov_blanket(collider.dag, "X")) == {"Y", "Z"}
    assert set(markov_blanket(sprinkler.dag, "S")) == {"R", "G"}


def test_network_file_round_trip(tmp_path, sprinkler):
    path = save_network(sprinkler, tmp_path / "sprinkler.bn.json")
    loaded = load_network(path)
    assert loaded.dag == sprinkler.dag
    for name in sprinkler.dag.variables:
        assert np.allclose(loaded.cpds[name].table,
                           sprinkler.cpds[name].table, rtol=0, atol=1e-12)
    assert query(loaded, "R", {"G": TRUE}).probabilities[TRUE] == \
        pytest.approx(0.002 / 0.1972, abs=1e-9)


def test_network_file_flattens_tables_by_configuration(tmp_path, sprinkler):
    path = save_network(sprinkler, tmp_path / "sprinkler.bn.json")
    payload = json.loads(path.read_text(encoding="utf-8"))
    cpds = {item["child"]: item for item in payload["cpds"]}
    assert cpds["G"]["parents"] == ["S", "R"]
    assert cpds["G"]["table"] == pytest.approx(
        [0.6, 0.4, 0.99, 0.01, 0.99, 0.01, 0.99, 0.01]
    ), (
        "Таблица хранится плоско: распределение на каждую конфигурацию "
        "родителей, последний родитель меняется быстрее."
    )
    assert cpds["R"]["table"] == pytest.approx([0.8, 0.2])


def test_corrupt_network_file_is_rejected(tmp_path, sprinkler):
    path = save_network(sprinkler, tmp_path / "sprinkler.bn.json")
    payload = json.loads(path.read_text(encoding="utf-8"))
    payload["cpds"][1]["table"] = [0.5, 0.4, 0.5, 0.4]
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(CorruptNetworkError):
        load_network(path)


def test_network_file_errors_are_data_errors(tmp_path, sprinkler):
    with pytest.raises(NetworkIOError):
        save_network(sprinkler, tmp_path / "absent" / "net.bn.json")
    with pytest.raises(NetworkIOError):
        load_network(tmp_path / "absent.bn.json")


def test_dot_export_is_well_formed(sprinkler):
    dot = dag_to_dot(sprinkler.dag, name="sprinkler")
    assert dot.startswith('digraph "sprinkler" {'), (
        "DOT-описание должно начинаться с заголовка digraph."
    )
    assert dot.rstrip().endswith("}")
    assert dot.count("{") == dot.count("}")
    edges = re.findall(r'"(\w+)" -> "(\w+)";', dot)
    assert sorted(edges) == sorted(sprinkler.dag.edges), (
        "Каждое ребро графа должно попасть в DOT ровно один раз."
    )
