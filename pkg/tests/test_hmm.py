import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings
from hypothesis import strategies as st
from scipy.special import logsumexp

from conftest import assert_close
from hmm.algorithms import (
    backward, baum_welch, chunk_sequence, forward, generate,
    posterior_states, viterbi,
)
from hmm.exceptions import CorruptModelError
from hmm.model import DtHmm, hmm_random, stationary_distribution
from hmm.storage import load_hmm, save_hmm
from regimecast.errors import InvalidArgumentError


def enumerate_paths(model: DtHmm, obs):
    """Совместная вероятность каждого пути состояний."""
    for path in itertools.product(range(model.n_states), repeat=len(obs)):
        probability = model.pi[path[0]] * model.emit[path[0], obs[0]]
        for t in range(1, len(obs)):
            probability *= (model.trans[path[t - 1], path[t]]
                            * model.emit[path[t], obs[t]])
        yield path, probability


def test_random_single_state_model_is_forced():
    model = hmm_random(1, 1, seed=123)
    assert_close(model.pi, [1.0], 0, "π модели с одним состоянием")
    assert_close(model.trans, [[1.0]], 0, "матрицу переходов")
    assert_close(model.emit, [[1.0]], 0, "матрицу эмиссий")


def test_random_model_is_reproducible():
    first, second = hmm_random(3, 2, seed=7), hmm_random(3, 2, seed=7)
    for name in ("pi", "trans", "emit"):
        assert np.array_equal(getattr(first, name), getattr(second, name)), (
            f"Убедитесь, что `hmm_random` с одним и тем же seed даёт "
            f"одинаковый параметр `{name}`."
        )


@hypothesis_settings(max_examples=50, deadline=None)
@given(
    n_states=st.integers(min_value=1, max_value=6),
    n_symbols=st.integers(min_value=1, max_value=5),
    seed=st.integers(min_value=0, max_value=2 ** 32 - 1),
)
def test_random_model_rows_are_distributions(n_states, n_symbols, seed):
    model = hmm_random(n_states, n_symbols, seed)
    assert model.n_states == n_states and model.n_symbols == n_symbols
    for matrix in (model.pi, model.trans, model.emit):
        assert np.allclose(matrix.sum(axis=-1), 1.0, rtol=0, atol=1e-9), (
            "Каждая строка случайной модели должна суммироваться в 1."
        )


@pytest.mark.parametrize("n_states, n_symbols", [(0, 2), (2, 0)])
def test_random_model_rejects_empty_dimensions(n_states, n_symbols):
    with pytest.raises(InvalidArgumentError):
        hmm_random(n_states, n_symbols, seed=0)


def test_model_rejects_non_stochastic_rows():
    with pytest.raises(InvalidArgumentError):
        DtHmm(pi=[0.5, 0.4], trans=[[1, 0], [0, 1]],
              emit=[[1, 0], [0, 1]])


@pytest.mark.parametrize("obs, expected", [([0, 1], 0.2090), ([0], 0.62)])
def test_forward_textbook_likelihood(textbook_hmm, obs, expected):
    lattice = forward(textbook_hmm, obs)
    assert np.isclose(np.exp(lattice.log_likelihood), expected,
                      rtol=0, atol=1e-12), (
        f"Правдоподобие последовательности {obs} должно быть {expected}."
    )


def test_degenerate_chain_has_likelihood_one():
    model = DtHmm(pi=[1.0], trans=[[1.0]], emit=[[1.0]])
    lattice = forward(model, [0] * 50)
    assert lattice.log_likelihood == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(backward(model, [0] * 50).log_beta, 0.0)
    _, path = viterbi(model, [0] * 50)
    assert not path.any(), "Путь модели с одним состоянием - одни нули."


def test_long_sequence_does_not_underflow(textbook_hmm):
    _, obs = generate(textbook_hmm, 20000, seed=4)
    lattice = forward(textbook_hmm, obs)
    assert np.isfinite(lattice.log_likelihood), (
        "Прямой проход должен работать в логарифмах и не терять точность "
        "на длинных последовательностях."
    )
    assert lattice.log_likelihood < -1000


@pytest.mark.parametrize("obs", [[], [0, 2], [-1], [0.5]])
def test_invalid_emissions_are_rejected(textbook_hmm, obs):
    for operation in (forward, backward, viterbi):
        with pytest.raises(InvalidArgumentError):
            operation(textbook_hmm, obs)


def test_forward_and_viterbi_match_path_enumeration(oracle_models):
    for seed, model in enumerate(oracle_models):
        length = 1 + seed % 6
        _, obs = generate(model, length, seed=seed)
        paths = list(enumerate_paths(model, obs))
        total = sum(probability for _, probability in paths)
        lattice = forward(model, obs)
        assert np.isclose(np.exp(lattice.log_likelihood), total,
                          rtol=1e-10, atol=0), (
            f"Модель {seed}: прямой проход расходится с перебором путей."
        )
        ranked = sorted(paths, key=lambda item: (-item[1], item[0]))
        log_prob, path = viterbi(model, obs)
        assert np.isclose(np.exp(log_prob), ranked[0][1],
                          rtol=1e-10, atol=0), (
            f"Модель {seed}: вероятность пути Витерби не максимальна."
        )
        unique = len(ranked) == 1 or ranked[1][1] < ranked[0][1] * (1 - 1e-9)
        if unique:
            assert tuple(path) == ranked[0][0], (
                f"Модель {seed}: путь Витерби {tuple(path)} не совпадает "
                f"с найденным перебором {ranked[0][0]}."
            )


def test_alpha_beta_product_is_constant_over_time(oracle_models):
    for seed, model in enumerate(oracle_models[:30]):
        _, obs = generate(model, 40, seed=seed)
        alpha = forward(model, obs)
        beta = backward(model, obs)
        assert np.allclose(beta.log_beta[-1], 0.0), (
            "Последняя строка обратной решётки должна быть log 1 = 0."
        )
        per_step = logsumexp(alpha.log_alpha + beta.log_beta, axis=1)
        assert np.allclose(per_step, alpha.log_likelihood,
                           rtol=0, atol=1e-9), (
            "Сумма α_t(i)β_t(i) должна совпадать с правдоподобием при "
            "каждом t."
        )


def test_backward_reproduces_textbook_likelihood(textbook_hmm):
    alpha = forward(textbook_hmm, [0, 1])
    beta = backward(textbook_hmm, [0, 1])
    first = np.exp(alpha.log_alpha[0] + beta.log_beta[0]).sum()
    assert first == pytest.approx(0.2090, abs=1e-12)


def test_viterbi_textbook_path(textbook_hmm):
    log_prob, path = viterbi(textbook_hmm, [0, 1])
    assert list(path) == [0, 1], "Оптимальный путь для [0, 1] - [0, 1]."
    assert np.exp(log_prob) == pytest.approx(0.1296, abs=1e-12)


def test_viterbi_breaks_ties_toward_lower_state():
    model = DtHmm(pi=[0.5, 0.5], trans=[[0.5, 0.5], [0.5, 0.5]],
                  emit=[[0.5, 0.5], [0.5, 0.5]])
    _, path = viterbi(model, [0, 1, 1, 0])
    assert not path.any(), (
        "При равных вероятностях выбирается состояние с меньшим индексом."
    )


def test_viterbi_recovers_deterministic_path(one_hot_hmm):
    states, obs = generate(one_hot_hmm, 12, seed=0)
    assert list(states) == [0, 1, 2] * 4, (
        "Детерминированная модель должна порождать цикл 0, 1, 2."
    )
    assert list(obs) == [0, 1, 1] * 4
    log_prob, path = viterbi(one_hot_hmm, obs)
    assert np.array_equal(path, states)
    assert log_prob == pytest.approx(0.0, abs=1e-12)


def test_posterior_states_are_normalized(generator_hmm):
    _, obs = generate(generator_hmm, 300, seed=2)
    gamma = posterior_states(generator_hmm, obs)
    assert gamma.shape == (300, 3)
    assert np.allclose(gamma.sum(axis=1), 1.0, rtol=0, atol=1e-9), (
        "Апостериорные вероятности состояний γ_t должны суммироваться в 1."
    )


def test_baum_welch_is_monotone():
    for seed in range(20):
        truth = hmm_random(3, 2, seed=1000 + seed)
        _, obs = generate(truth, 200, seed=seed)
        model, report = baum_welch(hmm_random(3, 2, seed), [obs], 100,
                                   tol=None)
        history = np.asarray(report.log_likelihood_per_iteration)
        assert report.iterations_run == 100
        assert np.all(np.diff(history) >= -1e-9), (
            f"Экземпляр {seed}: правдоподобие Баума-Велша уменьшилось."
        )
        for matrix in (model.pi, model.trans, model.emit):
            assert np.allclose(matrix.sum(axis=-1), 1.0, atol=1e-9)


def test_baum_welch_keeps_deterministic_model_fixed(one_hot_hmm):
    _, obs = generate(one_hot_hmm, 30, seed=0)
    model, report = baum_welch(one_hot_hmm, [obs], 10)
    assert model.allclose(one_hot_hmm, atol=1e-12), (
        "Детерминированная модель - неподвижная точка EM."
    )
    assert np.allclose(report.log_likelihood_per_iteration, 0.0, atol=1e-12)


def test_baum_welch_stops_at_tolerance(generator_hmm):
    _, obs = generate(generator_hmm, 500, seed=3)
    _, report = baum_welch(hmm_random(3, 2, 1), [obs], 1000, tol=1e-4)
    assert report.iterations_run < 1000, (
        "С порогом сходимости обучение должно останавливаться раньше."
    )
    history = report.log_likelihood_per_iteration
    assert history[-1] - history[-2] < 1e-4


def test_baum_welch_converges_by_default(generator_hmm, settings):
    _, obs = generate(generator_hmm, 500, seed=3)
    _, report = baum_welch(hmm_random(3, 2, 1), [obs], 1000)
    assert report.iterations_run < 1000, (
        "По умолчанию обучение останавливается по HMM_CONVERGENCE."
    )
    history = report.log_likelihood_per_iteration
    assert history[-1] - history[-2] < settings.HMM_CONVERGENCE
    _, fixed = baum_welch(hmm_random(3, 2, 1), [obs], 5, tol=None)
    assert fixed.iterations_run == 5


def test_baum_welch_accumulates_several_sequences(generator_hmm):
    _, obs = generate(generator_hmm, 400, seed=8)
    pieces = chunk_sequence(obs, 32)
    _, report = baum_welch(hmm_random(3, 2, 2), pieces, 20)
    history = np.asarray(report.log_likelihood_per_iteration)
    assert np.all(np.diff(history) >= -1e-9)


def test_baum_welch_needs_sequences(textbook_hmm):
    with pytest.raises(InvalidArgumentError):
        baum_welch(textbook_hmm, [], 10)


def test_baum_welch_recovers_generator(generator_hmm):
    _, train = generate(generator_hmm, 5000, seed=1)
    _, held_out = generate(generator_hmm, 5000, seed=2)
    model, _ = baum_welch(hmm_random(3, 2, seed=7), [train], 100, tol=1e-7)
    trained = forward(model, held_out).log_likelihood / held_out.size
    reference = forward(generator_hmm, held_out).log_likelihood / held_out.size
    assert trained >= reference - 0.02, (
        f"Обученная модель ({trained:.4f} нат/символ) уступает "
        f"порождающей ({reference:.4f}) больше чем на 0.02."
    )


def test_generate_is_reproducible(textbook_hmm):
    first = generate(textbook_hmm, 100, seed=5)
    second = generate(textbook_hmm, 100, seed=5)
    assert all(np.array_equal(a, b) for a, b in zip(first, second))
    with pytest.raises(InvalidArgumentError):
        generate(textbook_hmm, 0, seed=5)


def test_generated_symbol_frequencies_follow_stationary_mix(textbook_hmm):
    _, obs = generate(textbook_hmm, 100000, seed=11)
    expected = stationary_distribution(textbook_hmm) @ textbook_hmm.emit
    observed = np.bincount(obs, minlength=2) / obs.size
    assert np.allclose(observed, expected, atol=0.02), (
        f"Частоты символов {observed} далеки от стационарных {expected}."
    )


def test_stationary_distribution_of_periodic_chain(one_hot_hmm):
    assert_close(stationary_distribution(one_hot_hmm), [1 / 3] * 3, 1e-9,
                 "стационарное распределение периодической цепи")


def test_chunk_sequence_covers_the_sequence():
    obs = np.arange(70) % 2
    chunks = chunk_sequence(obs, 32)
    assert len(chunks) == 3 and max(len(c) for c in chunks) <= 32, (
        "Куски не должны быть длиннее заданного размера."
    )
    assert np.array_equal(np.concatenate(chunks), obs)
    with pytest.raises(InvalidArgumentError):
        chunk_sequence(obs, 0)


def test_model_file_round_trip(tmp_path, generator_hmm):
    path = save_hmm(generator_hmm, tmp_path / "price.hmm.json")
    loaded = load_hmm(path)
    assert loaded.allclose(generator_hmm, atol=1e-12), (
        "Модель после сохранения и загрузки должна совпадать с исходной."
    )
    payload = json.loads(path.read_text(encoding="utf-8"))
    assert set(payload) == {"n_states", "n_symbols", "pi", "trans", "emit"}
    assert (payload["n_states"], payload["n_symbols"]) == (3, 2)


def test_corrupt_model_file_is_rejected(tmp_path, textbook_hmm):
    payload = textbook_hmm.to_dict()
    payload["trans"][0] = [0.6, 0.3]
    path = tmp_path / "broken.hmm.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(CorruptModelError):
        load_hmm(path)
    payload = textbook_hmm.to_dict()
    payload["n_symbols"] = 3
    path.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(CorruptModelError):
        load_hmm(path)
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(CorruptModelError):
        load_hmm(path)
