"""EIA and FRED series retrieval behind an on-disk CSV cache."""
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import pandas as pd
import requests
from django.conf import settings
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from regimecast.errors import InvalidArgumentError

from .exceptions import FetchError, RecordsFileError, SeriesNotFoundError

logger = logging.getLogger(__name__)

SOURCES = ('EIA', 'FRED', 'CSV')
MISSING = ''

Record = Tuple[str, str]


@dataclass(frozen=True)
class SourceSpec:
    source: str
    series_id: str
    path: Optional[str] = None
    api_key: Optional[str] = field(default=None, repr=False)

    def __post_init__(self):
        if self.source not in SOURCES:
            raise InvalidArgumentError(
                f'unknown source {self.source!r}, expected one of {SOURCES}'
            )
        if not self.series_id:
            raise InvalidArgumentError('series_id must be non-empty')
        if self.source == 'CSV' and not self.path:
            raise InvalidArgumentError(
                f'{self.series_id}: CSV sources need a path'
            )

    def resolved_key(self) -> Optional[str]:
        if self.api_key:
            return self.api_key
        env = {
            'EIA': settings.EIA_API_KEY_ENV,
            'FRED': settings.FRED_API_KEY_ENV,
        }.get(self.source)
        return os.environ.get(env) if env else None

    def relative_path(self) -> Path:
        return Path(self.source) / f'{self.series_id}.csv'


def build_session(attempts: Optional[int] = None,
                  backoff: Optional[float] = None) -> requests.Session:
    """Session retrying connection errors and 5xx answers."""
    attempts = attempts or settings.HTTP_RETRIES
    retry = Retry(
        total=attempts - 1,
        backoff_factor=settings.HTTP_BACKOFF if backoff is None else backoff,
        status_forcelist=(429, 500, 502, 503, 504),
        allowed_methods=('GET',),
        raise_on_status=False,
    )
    session = requests.Session()
    session.mount('https://', HTTPAdapter(max_retries=retry))
    session.mount('http://', HTTPAdapter(max_retries=retry))
    return session


def _token(value) -> str:
    if value is None:
        return MISSING
    text = str(value).strip()
    return MISSING if text in ('.', '-') else text


def parse_eia(payload: dict, series_id: str) -> List[Record]:
    """`series[0].data` as (YYYYMM, value) pairs."""
    try:
        rows = payload['series'][0]['data']
    except (KeyError, IndexError, TypeError):
        error = (payload.get('data') or {}).get('error') \
            if isinstance(payload, dict) else None
        raise SeriesNotFoundError(
            f'EIA has no series {series_id!r}: {error or "empty answer"}'
        ) from None
    return [(str(date), _token(value)) for date, value in rows]


def parse_fred(payload: dict, series_id: str) -> List[Record]:
    """`observations[].{date,value}`; FRED marks holes with '.'."""
    if 'observations' not in payload:
        raise SeriesNotFoundError(
            f'FRED has no series {series_id!r}: '
            f'{payload.get("error_message", "empty answer")}'
        )
    return [(item['date'], _token(item['value']))
            for item in payload['observations']]


def read_records(path: Union[str, Path]) -> List[Record]:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
        frame = frame[['date', 'value']]
    except (OSError, ValueError) as exc:
        raise RecordsFileError(f'cannot read {path}: {exc}') from exc
    except KeyError as exc:
        raise RecordsFileError(
            f'{path}: expected columns date,value, got {list(frame.columns)}'
        ) from exc
    return list(frame.itertuples(index=False, name=None))


def write_records(records: List[Record], path: Union[str, Path]) -> Path:
    """Atomic `date,value` write: temp file, then rename."""
    path = Path(path)
    tmp_path = path.with_name(path.name + '.tmp')
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(records, columns=['date', 'value']).to_csv(
            tmp_path, index=False,
        )
        os.replace(tmp_path, path)
    except OSError as exc:
        raise RecordsFileError(f'cannot write {path}: {exc}') from exc
    return path


class Fetcher:
    """Загрузчик рядов: кэш, затем фикстуры или HTTP"""

    def __init__(self, cache_dir: Union[str, Path, None] = None,
                 offline: bool = False,
                 fixtures_dir: Union[str, Path, None] = None,
                 session: Optional[requests.Session] = None):
        self.cache_dir = Path(cache_dir or settings.CACHE_DIR)
        self.fixtures_dir = Path(fixtures_dir or settings.FIXTURES_DIR)
        self.offline = offline
        self._session = session

    @property
    def session(self) -> requests.Session:
        if self._session is None:
            self._session = build_session()
        return self._session

    def cache_path(self, spec: SourceSpec) -> Path:
        return self.cache_dir / spec.relative_path()

    def fetch(self, spec: SourceSpec) -> List[Record]:
        if spec.source == 'CSV':
            return read_records(spec.path)
        cached = self.cache_path(spec)
        if cached.exists():
            logger.info('%s: served from cache %s', spec.series_id, cached)
            return read_records(cached)
        if self.offline:
            fixture = self.fixtures_dir / spec.relative_path()
            if fixture.exists():
                logger.info('%s: served from fixture %s', spec.series_id,
                            fixture)
                return read_records(fixture)
            raise FetchError(
                f'{spec.series_id}: offline and neither cached nor bundled'
            )
        records = self._download(spec)
        write_records(records, cached)
        logger.info('%s: fetched %d records from %s', spec.series_id,
                    len(records), spec.source)
        return records

    def _download(self, spec: SourceSpec) -> List[Record]:
        api_key = spec.resolved_key()
        if not api_key:
            env = (settings.EIA_API_KEY_ENV if spec.source == 'EIA'
                   else settings.FRED_API_KEY_ENV)
            raise InvalidArgumentError(
                f'{spec.series_id}: not cached and {env} is not set'
            )
        if spec.source == 'EIA':
            url = settings.EIA_API_URL
            params = {'api_key': api_key, 'series_id': spec.series_id}
        else:
            url = settings.FRED_API_URL
            params = {'series_id': spec.series_id, 'api_key': api_key,
                      'file_type': 'json'}
        try:
            response = self.session.get(url, params=params,
                                        timeout=settings.HTTP_TIMEOUT)
        except requests.RequestException as exc:
            raise FetchError(f'{spec.series_id}: {exc}') from exc
        if response.status_code in (400, 404):
            raise SeriesNotFoundError(
                f'{spec.source} rejected series {spec.series_id!r} '
                f'(HTTP {response.status_code})'
            )
        if response.status_code != 200:
            raise FetchError(
                f'{spec.series_id}: HTTP {response.status_code}',
                status=response.status_code,
            )
        try:
            payload = response.json()
        except ValueError as exc:
            raise FetchError(f'{spec.series_id}: answer is not JSON',
                             status=response.status_code) from exc
        if spec.source == 'EIA':
            return parse_eia(payload, spec.series_id)
        return parse_fred(payload, spec.series_id)


def fetch(spec: SourceSpec, cache_dir: Union[str, Path, None] = None,
          offline: bool = False,
          session: Optional[requests.Session] = None) -> List[Record]:
    return Fetcher(cache_dir, offline=offline, session=session).fetch(spec)
