import logging
from pathlib import Path
from typing import Union

import pandas as pd

from regimecast.errors import DataError

from .ledger import TradeLedger

logger = logging.getLogger(__name__)


def write_ledger(ledger: TradeLedger, path: Union[str, Path]) -> Path:
    path = Path(path)
    ledger.to_frame().to_csv(path, date_format='%Y-%m-%d',
                             float_format='%.10g')
    return path


def read_reference(path: Union[str, Path]) -> pd.Series:
    """Reference forecast file with a `date` column and one value column."""
    try:
        frame = pd.read_csv(path, parse_dates=['date'], index_col='date')
    except (OSError, ValueError) as exc:
        raise DataError(f'cannot read reference forecast {path}: {exc}') \
            from exc
    if frame.shape[1] != 1:
        raise DataError(
            f'{path}: expected one value column, got {list(frame.columns)}'
        )
    return frame.iloc[:, 0].rename('reference')


def join_reference(ledger: TradeLedger,
                   reference: pd.Series) -> pd.DataFrame:
    """Ledger price and equity next to the reference forecast by date."""
    joined = ledger.to_frame()[['price', 'equity']].join(
        reference, how='inner',
    )
    if joined.empty:
        logger.warning('reference forecast shares no dates with the ledger')
    return joined
