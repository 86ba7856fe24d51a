"""Monthly series cleaning, alignment, targets and chronological splits."""
import logging
import math
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple, Union

import pandas as pd
from dateutil import parser as date_parser
from django.conf import settings

from regimecast.errors import InvalidArgumentError

from .exceptions import (
    InvalidRecordError, NoOverlapError, PanelFileError, UnusableSeriesError,
)

logger = logging.getLogger(__name__)

SOURCES = ('EIA', 'FRED', 'CSV')
MISSING_TOKENS = ('-', '.', '')

Panel = pd.DataFrame


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Месячный ряд без пропусков, даты по возрастанию"""

    series_id: str
    values: pd.Series

    def __post_init__(self):
        if not self.values.index.is_monotonic_increasing or \
                not self.values.index.is_unique:
            raise InvalidArgumentError(
                f'{self.series_id}: timestamps must be strictly increasing'
            )
        if self.values.isna().any():
            raise InvalidArgumentError(f'{self.series_id}: missing values')

    def __len__(self):
        return len(self.values)

    @property
    def start(self) -> pd.Timestamp:
        return self.values.index[0]

    @property
    def end(self) -> pd.Timestamp:
        return self.values.index[-1]


def parse_month(token) -> datetime:
    """Month start of an EIA `YYYYMM` or an ISO date token."""
    text = str(token).strip()
    try:
        if len(text) == 6 and text.isdigit():
            return datetime(int(text[:4]), int(text[4:]), 1)
        parsed = date_parser.isoparse(text)
    except ValueError:
        raise InvalidRecordError(
            f'unparseable date token {token!r}'
        ) from None
    return datetime(parsed.year, parsed.month, 1)


def clean_series(raw: Iterable[Tuple[object, object]], source: str,
                 series_id: str = '') -> TimeSeries:
    """Parse records and fill holes forward, then backward at the head."""
    if source not in SOURCES:
        raise InvalidArgumentError(
            f'unknown source {source!r}, expected one of {SOURCES}'
        )
    records = list(raw)
    if not records:
        raise UnusableSeriesError(f'{series_id}: no records')
    dates = [parse_month(date) for date, _ in records]
    tokens = pd.Series(
        [None if str(value).strip() in MISSING_TOKENS else value
         for _, value in records],
        index=pd.DatetimeIndex(dates, name='date'),
        dtype=object,
    )
    values = pd.to_numeric(tokens, errors='coerce').astype(float)
    if values.isna().all():
        raise UnusableSeriesError(f'{series_id}: every value is missing')
    if not values.index.is_unique:
        logger.warning('%s: duplicate months, keeping the last record',
                       series_id)
        values = values[~values.index.duplicated(keep='last')]
    values = values.sort_index().ffill().bfill()
    values.name = series_id
    return TimeSeries(series_id, values)


def read_series_csv(path: Union[str, Path], source: str,
                    series_id: Optional[str] = None) -> TimeSeries:
    """Load a cached `date,value` file; tokens are kept as text."""
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, ValueError) as exc:
        raise InvalidRecordError(f'cannot read {path}: {exc}') from exc
    if list(frame.columns) != ['date', 'value']:
        raise InvalidRecordError(
            f'{path}: expected header date,value, got {list(frame.columns)}'
        )
    return clean_series(
        frame.itertuples(index=False, name=None), source,
        series_id or Path(path).stem,
    )


def align(series: Sequence[TimeSeries]) -> Panel:
    """Inner join on dates; columns keep the input order."""
    if not series:
        raise InvalidArgumentError('at least one series is required')
    ids = [item.series_id for item in series]
    if len(set(ids)) != len(ids):
        raise InvalidArgumentError(f'duplicate series ids in {ids}')
    panel = pd.concat([item.values for item in series], axis=1,
                      join='inner', keys=ids)
    if panel.empty:
        ranges = ', '.join(
            f'{item.series_id} {item.start:%Y-%m}..{item.end:%Y-%m}'
            for item in series
        )
        raise NoOverlapError(f'series share no months: {ranges}')
    panel.index.name = 'date'
    logger.info('aligned %d series over %d months (%s..%s)',
                len(ids), len(panel), f'{panel.index[0]:%Y-%m}',
                f'{panel.index[-1]:%Y-%m}')
    return panel


def add_targets(panel: Panel, price_id: Optional[str] = None,
                target_id: Optional[str] = None) -> Panel:
    """Append next month's price as the target and drop the last row."""
    price_id = price_id or settings.PRICE_ID
    target_id = target_id or settings.TARGET_ID
    if price_id not in panel.columns:
        raise InvalidArgumentError(f'panel has no price column {price_id!r}')
    result = panel.assign(**{target_id: panel[price_id].shift(-1)})
    result = result.iloc[:-1]
    if result.empty:
        logger.warning('panel of %d rows leaves no target rows', len(panel))
    return result


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.80
    vald_frac: float = 0.10
    test_frac: float = 0.10

    def __post_init__(self):
        fractions = (self.train_frac, self.vald_frac, self.test_frac)
        if any(fraction <= 0 for fraction in fractions):
            raise InvalidArgumentError('split fractions must be positive')
        if not math.isclose(sum(fractions), 1.0, abs_tol=1e-9):
            raise InvalidArgumentError('split fractions must sum to 1')

    @classmethod
    def from_settings(cls) -> 'SplitSpec':
        return cls(*settings.SPLIT_FRACTIONS)

    def boundaries(self, n_rows: int) -> Tuple[int, int]:
        first = math.floor(n_rows * self.train_frac + 1e-9)
        second = math.floor(n_rows * (self.train_frac + self.vald_frac)
                            + 1e-9)
        return first, second


def split(panel: Panel,
          spec: Optional[SplitSpec] = None) -> Tuple[Panel, Panel, Panel]:
    """Contiguous train/validation/test slices, oldest first."""
    spec = spec or SplitSpec.from_settings()
    if len(panel) < settings.MIN_SPLIT_LENGTH:
        raise InvalidArgumentError(
            f'panel has {len(panel)} rows, at least '
            f'{settings.MIN_SPLIT_LENGTH} are needed to split'
        )
    first, second = spec.boundaries(len(panel))
    return panel.iloc[:first], panel.iloc[first:second], panel.iloc[second:]


def write_panel(panel: Panel, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        panel.to_csv(path, index_label='date', date_format='%Y-%m-%d',
                     float_format='%.17g')
    except OSError as exc:
        raise PanelFileError(f'cannot write panel {path}: {exc}') from exc
    return path


def read_panel(path: Union[str, Path]) -> Panel:
    try:
        return pd.read_csv(path, index_col='date', parse_dates=['date'],
                           float_precision='round_trip')
    except (OSError, ValueError) as exc:
        raise PanelFileError(f'cannot read panel {path}: {exc}') from exc
