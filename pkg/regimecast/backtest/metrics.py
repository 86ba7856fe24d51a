"""Prediction error and ledger comparison."""
from dataclasses import asdict, dataclass
from typing import Dict, Sequence

import numpy as np
from django.conf import settings

from regimecast.errors import InvalidArgumentError

from .ledger import TradeLedger


@dataclass(frozen=True, eq=False)
class ErrorReport:
    direct_error: float
    lag1_error: float
    confusion: np.ndarray

    def to_dict(self) -> dict:
        return {
            'direct_error': self.direct_error,
            'lag1_error': self.lag1_error,
            'confusion': self.confusion.tolist(),
        }


def regime_error(real: Sequence[int], pred: Sequence[int]) -> ErrorReport:
    """Mismatch rates of predicted regimes, aligned and rolled by one.

    The lag-one rate compares `real` with the predictions rotated forward
    one step, the last prediction wrapping around to the front.
    """
    real = np.asarray(real, dtype=np.intp)
    pred = np.asarray(pred, dtype=np.intp)
    if real.shape != pred.shape or real.ndim != 1:
        raise InvalidArgumentError(
            f'{real.size} real labels but {pred.size} predictions'
        )
    if real.size == 0:
        raise InvalidArgumentError('at least one label is needed')
    n_labels = len(settings.REGIME_LABELS)
    if min(real.min(), pred.min()) < 0 or \
            max(real.max(), pred.max()) >= n_labels:
        raise InvalidArgumentError(f'labels must lie in [0, {n_labels})')
    confusion = np.zeros((n_labels, n_labels), dtype=int)
    np.add.at(confusion, (real, pred), 1)
    return ErrorReport(
        direct_error=float(np.mean(real != pred)),
        lag1_error=float(np.mean(real != np.roll(pred, 1))),
        confusion=confusion,
    )


@dataclass(frozen=True)
class LedgerSummary:
    final_equity: float
    total_return: float
    max_drawdown: float


def summarize(ledger: TradeLedger) -> LedgerSummary:
    equity = ledger.equity
    peaks = np.maximum.accumulate(equity)
    with np.errstate(divide='ignore', invalid='ignore'):
        drawdowns = np.where(peaks > 0, (peaks - equity) / peaks, 0.0)
    return LedgerSummary(
        final_equity=float(equity[-1]),
        total_return=float(equity[-1] / equity[0] - 1.0),
        max_drawdown=float(drawdowns.max()),
    )


def compare(ledger_a: TradeLedger, ledger_b: TradeLedger,
            names: Sequence[str] = ('strategy', 'buy_and_hold')
            ) -> Dict[str, dict]:
    """Final equity, total return and max drawdown of two ledgers."""
    if len(ledger_a.dates) != len(ledger_b.dates) or \
            not (ledger_a.dates == ledger_b.dates).all():
        raise InvalidArgumentError('ledgers cover different dates')
    first, second = names
    return {
        first: asdict(summarize(ledger_a)),
        second: asdict(summarize(ledger_b)),
    }
