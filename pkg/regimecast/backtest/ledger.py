"""Signal replay against prices: the faithful and the corrected loop."""
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from regimecast.errors import InvalidArgumentError

SHORT, HOLD, LONG = 0, 1, 2
MODES = ('paper', 'corrected')


@dataclass(frozen=True, eq=False)
class SignalSeries:
    """Сигналы: 0 выход/шорт, 1 без действий, 2 лонг"""

    dates: pd.DatetimeIndex
    signals: np.ndarray

    def __post_init__(self):
        signals = np.asarray(self.signals, dtype=np.intp)
        if signals.shape != (len(self.dates),):
            raise InvalidArgumentError('one signal per date is required')
        if signals.size and (signals.min() < SHORT or signals.max() > LONG):
            raise InvalidArgumentError('signals must lie in {0, 1, 2}')
        object.__setattr__(self, 'signals', signals)


@dataclass(frozen=True, eq=False)
class TradeLedger:
    dates: pd.DatetimeIndex
    prices: np.ndarray
    signals: np.ndarray
    equity: np.ndarray
    positions: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                'equity': self.equity,
                'position': self.positions.astype(int),
                'signal': self.signals,
                'price': self.prices,
            },
            index=pd.Index(self.dates, name='date'),
        )


def _inputs(prices: Sequence[float], signals: Sequence[int],
            dates: Optional[Sequence] = None):
    prices = np.asarray(prices, dtype=float)
    signals = np.asarray(signals, dtype=np.intp)
    if prices.ndim != 1 or prices.shape != signals.shape:
        raise InvalidArgumentError(
            f'{prices.size} prices but {signals.size} signals'
        )
    if prices.size < 2:
        raise InvalidArgumentError('at least two periods are needed')
    if dates is None:
        dates = pd.RangeIndex(prices.size)
    series = SignalSeries(pd.Index(dates), signals)
    return prices, series.signals, series.dates


def _replay(prices, signals, dates, exit_on_short: bool) -> TradeLedger:
    equity = np.empty(prices.size)
    positions = np.zeros(prices.size, dtype=bool)
    equity[0] = prices[0]
    long = False
    for t in range(1, prices.size):
        signal = signals[t]
        if signal == SHORT:
            if exit_on_short:
                long = False
            equity[t] = equity[t - 1]
        elif signal == LONG and not long:
            long = True
            equity[t] = equity[t - 1]
        elif long:
            equity[t] = prices[t]
        else:
            equity[t] = equity[t - 1]
        positions[t] = long
    return TradeLedger(dates, prices, signals, equity, positions)


def simulate_paper(prices: Sequence[float], signals: Sequence[int],
                   dates: Optional[Sequence] = None) -> TradeLedger:
    """Replay where a short signal only freezes equity; the long never ends.

    The first signal is not acted upon: row t reacts to signal t.
    """
    return _replay(*_inputs(prices, signals, dates), exit_on_short=False)


def simulate_corrected(prices: Sequence[float], signals: Sequence[int],
                       dates: Optional[Sequence] = None) -> TradeLedger:
    """Like `simulate_paper`, but a short signal closes the long."""
    return _replay(*_inputs(prices, signals, dates), exit_on_short=True)


def simulate(prices: Sequence[float], signals: Sequence[int],
             mode: str = 'paper',
             dates: Optional[Sequence] = None) -> TradeLedger:
    if mode not in MODES:
        raise InvalidArgumentError(
            f'unknown backtest mode {mode!r}, expected one of {MODES}'
        )
    if mode == 'paper':
        return simulate_paper(prices, signals, dates)
    return simulate_corrected(prices, signals, dates)


def buy_and_hold(prices: Sequence[float],
                 dates: Optional[Sequence] = None) -> TradeLedger:
    prices = np.asarray(prices, dtype=float)
    if prices.ndim != 1 or prices.size < 1:
        raise InvalidArgumentError('at least one price is needed')
    if dates is None:
        dates = pd.RangeIndex(prices.size)
    return TradeLedger(
        dates=pd.Index(dates),
        prices=prices,
        signals=np.full(prices.size, LONG, dtype=np.intp),
        equity=prices.copy(),
        positions=np.ones(prices.size, dtype=bool),
    )
