"""Artifact layout of a run and all-or-nothing stage output."""
import json
import logging
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Union

from django.conf import settings

from bayesnet.network import Dag

from .exceptions import CorruptArtifactError, MissingArtifactError

logger = logging.getLogger(__name__)

SPLITS = ('train', 'validation', 'test')


class RunLayout:
    """Каталог `out/<run-name>` и пути его файлов"""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    @classmethod
    def for_run(cls, name: str,
                out_dir: Union[str, Path, None] = None) -> 'RunLayout':
        return cls(Path(out_dir or settings.ARTIFACTS_DIR) / name)

    @property
    def panels(self) -> Path:
        return self.root / 'panels'

    @property
    def hmms(self) -> Path:
        return self.root / 'hmms'

    @property
    def model(self) -> Path:
        return self.root / 'model'

    @property
    def predictions(self) -> Path:
        return self.root / 'predictions'

    @property
    def backtest(self) -> Path:
        return self.root / 'backtest'

    @property
    def plots(self) -> Path:
        return self.root / 'plots'

    def panel(self, split: str) -> Path:
        return self.panels / f'{split}.csv'

    def regimes(self, split: str) -> Path:
        return self.panels / f'{split}_regimes.csv'

    @property
    def structure(self) -> Path:
        return self.model / 'structure.json'

    @property
    def network(self) -> Path:
        return self.model / 'network.bn.json'

    def prediction(self, split: str) -> Path:
        return self.predictions / f'{split}.csv'

    def require(self, path: Path, stage: str) -> Path:
        if not path.exists():
            raise MissingArtifactError(path, stage)
        return path

    @contextmanager
    def staged(self) -> Iterator['RunLayout']:
        """Layout rooted in a scratch directory, merged in on success."""
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            scratch = Path(tempfile.mkdtemp(prefix='.stage-', dir=self.root))
        except OSError as exc:
            raise CorruptArtifactError(
                f'cannot write under {self.root}: {exc}'
            ) from exc
        try:
            for name in ('panels', 'hmms', 'model', 'predictions',
                         'backtest', 'plots'):
                (scratch / name).mkdir()
            yield RunLayout(scratch)
            for path in sorted(scratch.rglob('*')):
                if path.is_dir():
                    continue
                target = self.root / path.relative_to(scratch)
                target.parent.mkdir(parents=True, exist_ok=True)
                os.replace(path, target)
        except OSError as exc:
            raise CorruptArtifactError(
                f'cannot write under {self.root}: {exc}'
            ) from exc
        finally:
            shutil.rmtree(scratch, ignore_errors=True)


def save_structure(dag: Dag, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as fh:
        json.dump({
            'variables': list(dag.variables),
            'edges': [list(edge) for edge in dag.sorted_edges()],
        }, fh, indent=2)
    return path


def load_structure(path: Union[str, Path]) -> Dag:
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            payload = json.load(fh)
        return Dag(payload['variables'],
                   [tuple(edge) for edge in payload['edges']])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CorruptArtifactError(f'{path}: {exc}') from exc


def write_json(payload: dict, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write('\n')
    return path
