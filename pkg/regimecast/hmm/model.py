"""Discrete-time hidden Markov model and the values the algorithms return."""
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
from django.conf import settings

from regimecast.errors import InvalidArgumentError


def _check_stochastic(name: str, matrix: np.ndarray) -> None:
    tolerance = settings.PROBABILITY_TOLERANCE
    if not np.all(np.isfinite(matrix)):
        raise InvalidArgumentError(f'{name}: non-finite probability')
    if np.any(matrix < -tolerance) or np.any(matrix > 1 + tolerance):
        raise InvalidArgumentError(f'{name}: probability outside [0, 1]')
    sums = matrix.sum(axis=-1)
    if not np.allclose(sums, 1.0, rtol=0, atol=tolerance):
        raise InvalidArgumentError(
            f'{name}: rows must sum to 1, got {np.round(sums, 12).tolist()}'
        )


@dataclass(frozen=True, eq=False)
class DtHmm:
    """Скрытая марковская модель λ = (π, A, B)"""

    pi: np.ndarray
    trans: np.ndarray
    emit: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float)
        trans = np.asarray(self.trans, dtype=float)
        emit = np.asarray(self.emit, dtype=float)
        if pi.ndim != 1 or pi.size == 0:
            raise InvalidArgumentError('pi must be a non-empty vector')
        n_states = pi.size
        if trans.shape != (n_states, n_states):
            raise InvalidArgumentError(
                f'trans must be {n_states}x{n_states}, got {trans.shape}'
            )
        if emit.ndim != 2 or emit.shape[0] != n_states or emit.shape[1] == 0:
            raise InvalidArgumentError(
                f'emit must be {n_states}xM, got {emit.shape}'
            )
        _check_stochastic('pi', pi)
        _check_stochastic('trans', trans)
        _check_stochastic('emit', emit)
        for name, value in (('pi', pi), ('trans', trans), ('emit', emit)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_states(self) -> int:
        return self.pi.size

    @property
    def n_symbols(self) -> int:
        return self.emit.shape[1]

    def log_params(self):
        with np.errstate(divide='ignore'):
            return np.log(self.pi), np.log(self.trans), np.log(self.emit)

    def allclose(self, other: 'DtHmm', atol: float = 1e-12) -> bool:
        return (
            self.pi.shape == other.pi.shape
            and self.emit.shape == other.emit.shape
            and np.allclose(self.pi, other.pi, rtol=0, atol=atol)
            and np.allclose(self.trans, other.trans, rtol=0, atol=atol)
            and np.allclose(self.emit, other.emit, rtol=0, atol=atol)
        )

    def to_dict(self) -> dict:
        return {
            'n_states': self.n_states,
            'n_symbols': self.n_symbols,
            'pi': self.pi.tolist(),
            'trans': self.trans.tolist(),
            'emit': self.emit.tolist(),
        }


@dataclass(frozen=True, eq=False)
class ForwardLattice:
    log_alpha: np.ndarray
    log_likelihood: float


@dataclass(frozen=True, eq=False)
class BackwardLattice:
    log_beta: np.ndarray


@dataclass(frozen=True)
class TrainReport:
    log_likelihood_per_iteration: List[float] = field(default_factory=list)
    iterations_run: int = 0


def as_emissions(obs: Sequence[int], n_symbols: int) -> np.ndarray:
    """Validate an emission sequence against an alphabet of `n_symbols`."""
    symbols = np.asarray(obs)
    if symbols.ndim != 1 or symbols.size == 0:
        raise InvalidArgumentError('emission sequence must be non-empty')
    if not np.issubdtype(symbols.dtype, np.integer):
        if not np.all(np.mod(symbols, 1) == 0):
            raise InvalidArgumentError('emission symbols must be integers')
        symbols = symbols.astype(int)
    if symbols.min() < 0 or symbols.max() >= n_symbols:
        raise InvalidArgumentError(
            f'emission symbol out of range [0, {n_symbols})'
        )
    return symbols.astype(np.intp)


def hmm_random(n_states: int, n_symbols: int, seed: int) -> DtHmm:
    """Draw every probability row uniformly from its simplex."""
    if n_states < 1 or n_symbols < 1:
        raise InvalidArgumentError(
            'n_states and n_symbols must both be at least 1'
        )
    rng = np.random.default_rng(seed)
    pi = rng.dirichlet(np.ones(n_states))
    trans = rng.dirichlet(np.ones(n_states), size=n_states)
    emit = rng.dirichlet(np.ones(n_symbols), size=n_states)
    return DtHmm(pi=pi, trans=trans, emit=emit)


def stationary_distribution(model: DtHmm, max_iters: int = 100000,
                            tol: float = 1e-13) -> np.ndarray:
    """Stationary distribution of the hidden chain by power iteration.

    Iterates the lazy chain (I + A) / 2, which shares the stationary
    distribution of A and does not oscillate on periodic chains.
    """
    lazy = 0.5 * (np.eye(model.n_states) + model.trans)
    dist = np.full(model.n_states, 1.0 / model.n_states)
    for _ in range(max_iters):
        following = dist @ lazy
        if np.abs(following - dist).max() < tol:
            return following / following.sum()
        dist = following
    return dist / dist.sum()
