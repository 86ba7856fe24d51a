"""Evaluation, decoding, sampling and Baum-Welch training in the log domain."""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings
from scipy.special import logsumexp

from regimecast.errors import InvalidArgumentError

from .model import (
    BackwardLattice, DtHmm, ForwardLattice, TrainReport, as_emissions,
)

logger = logging.getLogger(__name__)

NOT_PROVIDED = object()


def _logsumexp(values, axis=None):
    with np.errstate(divide='ignore', invalid='ignore'):
        return logsumexp(values, axis=axis)


def forward(model: DtHmm, obs: Sequence[int]) -> ForwardLattice:
    symbols = as_emissions(obs, model.n_symbols)
    log_pi, log_trans, log_emit = model.log_params()
    log_alpha = np.empty((symbols.size, model.n_states))
    log_alpha[0] = log_pi + log_emit[:, symbols[0]]
    for t in range(1, symbols.size):
        log_alpha[t] = (
            _logsumexp(log_alpha[t - 1][:, None] + log_trans, axis=0)
            + log_emit[:, symbols[t]]
        )
    return ForwardLattice(
        log_alpha=log_alpha,
        log_likelihood=float(_logsumexp(log_alpha[-1])),
    )


def backward(model: DtHmm, obs: Sequence[int]) -> BackwardLattice:
    symbols = as_emissions(obs, model.n_symbols)
    _, log_trans, log_emit = model.log_params()
    log_beta = np.zeros((symbols.size, model.n_states))
    for t in range(symbols.size - 2, -1, -1):
        log_beta[t] = _logsumexp(
            log_trans + log_emit[:, symbols[t + 1]] + log_beta[t + 1],
            axis=1,
        )
    return BackwardLattice(log_beta=log_beta)


def viterbi(model: DtHmm, obs: Sequence[int]) -> Tuple[float, np.ndarray]:
    """Most probable state path; ties go to the lowest state index."""
    symbols = as_emissions(obs, model.n_symbols)
    log_pi, log_trans, log_emit = model.log_params()
    length = symbols.size
    delta = log_pi + log_emit[:, symbols[0]]
    pointers = np.zeros((length, model.n_states), dtype=np.intp)
    for t in range(1, length):
        candidates = delta[:, None] + log_trans
        pointers[t] = np.argmax(candidates, axis=0)
        delta = (
            candidates[pointers[t], np.arange(model.n_states)]
            + log_emit[:, symbols[t]]
        )
    path = np.empty(length, dtype=np.intp)
    path[-1] = int(np.argmax(delta))
    for t in range(length - 1, 0, -1):
        path[t - 1] = pointers[t, path[t]]
    return float(delta[path[-1]]), path


def posterior_states(model: DtHmm, obs: Sequence[int]) -> np.ndarray:
    """γ_t(i): probability of state i at time t given the whole sequence."""
    alpha = forward(model, obs)
    beta = backward(model, obs)
    with np.errstate(invalid='ignore'):
        log_gamma = alpha.log_alpha + beta.log_beta - alpha.log_likelihood
    return np.exp(log_gamma)


def _expected_counts(model: DtHmm, sequences: List[np.ndarray]):
    log_pi, log_trans, log_emit = model.log_params()
    pi_counts = np.zeros(model.n_states)
    trans_counts = np.zeros((model.n_states, model.n_states))
    emit_counts = np.zeros((model.n_states, model.n_symbols))
    total = 0.0
    for symbols in sequences:
        alpha = forward(model, symbols)
        beta = backward(model, symbols)
        log_likelihood = alpha.log_likelihood
        total += log_likelihood
        with np.errstate(invalid='ignore'):
            gamma = np.exp(alpha.log_alpha + beta.log_beta - log_likelihood)
        gamma = np.nan_to_num(gamma)
        pi_counts += gamma[0]
        np.add.at(emit_counts.T, symbols, gamma)
        if symbols.size > 1:
            with np.errstate(invalid='ignore'):
                log_xi = (
                    alpha.log_alpha[:-1, :, None]
                    + log_trans[None, :, :]
                    + (log_emit[:, symbols[1:]].T + beta.log_beta[1:])[
                        :, None, :]
                    - log_likelihood
                )
            trans_counts += np.nan_to_num(np.exp(log_xi)).sum(axis=0)
    return pi_counts, trans_counts, emit_counts, total


def _normalize_rows(counts: np.ndarray) -> np.ndarray:
    sums = counts.sum(axis=-1, keepdims=True)
    width = counts.shape[-1]
    with np.errstate(invalid='ignore', divide='ignore'):
        rows = np.where(sums > 0, counts / sums, 1.0 / width)
    return rows


def baum_welch(
        model: DtHmm,
        sequences: Sequence[Sequence[int]],
        max_iters: int,
        tol: Optional[float] = NOT_PROVIDED,
) -> Tuple[DtHmm, TrainReport]:
    """Re-estimate λ from expected counts accumulated over all sequences.

    Training stops as soon as the total log-likelihood improves by less
    than `tol`, by default `settings.HMM_CONVERGENCE`. `tol=None` runs
    exactly `max_iters` updates.
    """
    if tol is NOT_PROVIDED:
        tol = settings.HMM_CONVERGENCE
    if max_iters < 1:
        raise InvalidArgumentError('max_iters must be positive')
    if len(sequences) == 0:
        raise InvalidArgumentError('at least one emission sequence required')
    encoded = [as_emissions(seq, model.n_symbols) for seq in sequences]
    history: List[float] = []
    current = model
    updates = 0
    for _ in range(max_iters):
        pi_counts, trans_counts, emit_counts, total = _expected_counts(
            current, encoded,
        )
        if tol is not None and history and total - history[-1] < tol:
            history.append(total)
            break
        history.append(total)
        current = DtHmm(
            pi=_normalize_rows(pi_counts),
            trans=_normalize_rows(trans_counts),
            emit=_normalize_rows(emit_counts),
        )
        updates += 1
    logger.debug(
        'baum-welch: %d updates, log-likelihood %.6f',
        updates, history[-1],
    )
    return current, TrainReport(
        log_likelihood_per_iteration=history,
        iterations_run=updates,
    )


def generate(model: DtHmm, length: int,
             seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Sample a state path from π and A, then one symbol per state from B."""
    if length < 1:
        raise InvalidArgumentError('length must be positive')
    rng = np.random.default_rng(seed)
    draws = rng.random((length, 2))
    start = np.cumsum(model.pi)
    trans = np.cumsum(model.trans, axis=1)
    emit = np.cumsum(model.emit, axis=1)
    last_state = model.n_states - 1
    last_symbol = model.n_symbols - 1
    states = np.empty(length, dtype=np.intp)
    symbols = np.empty(length, dtype=np.intp)
    state = min(int(np.searchsorted(start, draws[0, 0], side='right')),
                last_state)
    for t in range(length):
        if t:
            state = min(
                int(np.searchsorted(trans[state], draws[t, 0],
                                    side='right')),
                last_state,
            )
        states[t] = state
        symbols[t] = min(
            int(np.searchsorted(emit[state], draws[t, 1], side='right')),
            last_symbol,
        )
    return states, symbols


def chunk_sequence(obs: Sequence[int],
                   size: Optional[int] = None) -> List[np.ndarray]:
    """Split a sequence into near-equal pieces no longer than `size`."""
    size = settings.HMM_CHUNK if size is None else size
    if size < 1:
        raise InvalidArgumentError('chunk size must be positive')
    symbols = np.asarray(obs, dtype=np.intp)
    if symbols.size == 0:
        raise InvalidArgumentError('emission sequence must be non-empty')
    sections = -(-symbols.size // size)
    return [chunk for chunk in np.array_split(symbols, sections)]
