from typing import Tuple

import numpy as np
import pandas as pd
import pytest

DOWN, FLAT, UP = 0, 1, 2
SEGMENT_ORDER = (UP, FLAT, DOWN, FLAT)


def month_index(n_months: int, start: str = "1990-01-01") -> pd.DatetimeIndex:
    return pd.date_range(start, periods=n_months, freq="MS", name="date")


def three_regime_series(n_months: int = 500, segment: int = 50,
                        seed: int = 0) -> Tuple[pd.Series, np.ndarray]:
    """Цена с участками роста, боковика и падения.

    Returns the prices and the generating regime of every month-on-month
    change (one label fewer than prices). Flat stretches alternate small
    rises and falls, trending ones move with the drift on almost every
    month.
    """
    rng = np.random.default_rng(seed)
    truth = np.array([
        SEGMENT_ORDER[(t // segment) % len(SEGMENT_ORDER)]
        for t in range(n_months - 1)
    ])
    diffs = np.empty(n_months - 1)
    for t, regime in enumerate(truth):
        if regime == FLAT:
            diffs[t] = 0.1 if t % 2 else -0.1
            continue
        sign = 1.0 if regime == UP else -1.0
        flipped = rng.random() < 0.03
        diffs[t] = sign * (-0.5 if flipped else 1.0 + rng.random())
    prices = 200.0 + np.concatenate([[0.0], np.cumsum(diffs)])
    return pd.Series(prices, index=month_index(n_months), name="SYN"), truth


def planted_data(seed: int, n_rows: int = 2500) -> pd.DataFrame:
    """A зависит от B и C, H от G и A, остальные столбцы - шум."""
    rng = np.random.default_rng(seed)
    data = pd.DataFrame(rng.integers(0, 3, size=(n_rows, 8)),
                        columns=list("ABCDEFGH"))
    data["A"] += data["B"] + data["C"]
    data["H"] = data["G"] - data["A"]
    return data


def noise_data(seed: int, n_rows: int = 2000,
               columns: str = "WXYZ") -> pd.DataFrame:
    rng = np.random.default_rng(seed)
    return pd.DataFrame(rng.integers(0, 3, size=(n_rows, len(columns))),
                        columns=list(columns))


@pytest.fixture
def three_regime():
    return three_regime_series()


@pytest.fixture
def regime_panel() -> pd.DataFrame:
    """Небольшая панель режимов, где `forecast` повторяет `P`."""
    rng = np.random.default_rng(3)
    n_rows = 300
    frame = pd.DataFrame({
        "S": rng.integers(0, 3, n_rows),
        "P": rng.integers(0, 3, n_rows),
    }, index=month_index(n_rows))
    frame["forecast"] = np.where(rng.random(n_rows) < 0.9, frame["P"],
                                 rng.integers(0, 3, n_rows))
    return frame
