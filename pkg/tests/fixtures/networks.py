import pytest

from bayesnet.network import BayesianNetwork, Cpd, Dag, DiscreteVariable

FALSE, TRUE = 0, 1


def boolean(name: str) -> DiscreteVariable:
    return DiscreteVariable(name, ("F", "T"))


def computer_failure_network() -> BayesianNetwork:
    """Отказ компьютера C от сбоя питания E и неисправности M."""
    e, m, c = boolean("E"), boolean("M"), boolean("C")
    return BayesianNetwork(
        Dag(["E", "M", "C"], [("E", "C"), ("M", "C")]),
        [
            Cpd(e, (), [0.9, 0.1]),
            Cpd(m, (), [0.8, 0.2]),
            # (E, M) = FF, FT, TF, TT
            Cpd(c, (e, m), [[1.0, 0.5, 0.0, 0.0], [0.0, 0.5, 1.0, 1.0]]),
        ],
    )


def sprinkler_network() -> BayesianNetwork:
    r, s, g = boolean("R"), boolean("S"), boolean("G")
    return BayesianNetwork(
        Dag(["R", "S", "G"], [("R", "S"), ("S", "G"), ("R", "G")]),
        [
            Cpd(r, (), [0.8, 0.2]),
            Cpd(s, (r,), [[0.6, 0.99], [0.4, 0.01]]),
            # (S, R) = FF, FT, TF, TT
            Cpd(g, (s, r), [[0.6, 0.99, 0.99, 0.99],
                            [0.4, 0.01, 0.01, 0.01]]),
        ],
    )


def collider_network() -> BayesianNetwork:
    x, y, z = boolean("X"), boolean("Y"), boolean("Z")
    return BayesianNetwork(
        Dag(["X", "Y", "Z"], [("X", "Z"), ("Y", "Z")]),
        [
            Cpd(x, (), [0.5, 0.5]),
            Cpd(y, (), [0.5, 0.5]),
            Cpd(z, (x, y), [[0.9, 0.2, 0.2, 0.1], [0.1, 0.8, 0.8, 0.9]]),
        ],
    )


def chain_network() -> BayesianNetwork:
    x, y, z = boolean("X"), boolean("Y"), boolean("Z")
    return BayesianNetwork(
        Dag(["X", "Y", "Z"], [("X", "Y"), ("Y", "Z")]),
        [
            Cpd(x, (), [0.5, 0.5]),
            Cpd(y, (x,), [[0.85, 0.15], [0.15, 0.85]]),
            Cpd(z, (y,), [[0.85, 0.15], [0.15, 0.85]]),
        ],
    )


@pytest.fixture
def computer_failure():
    return computer_failure_network()


@pytest.fixture
def sprinkler():
    return sprinkler_network()


@pytest.fixture
def collider():
    return collider_network()


@pytest.fixture
def chain():
    return chain_network()
