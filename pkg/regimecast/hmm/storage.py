import json
import os
from pathlib import Path
from typing import Union

from regimecast.errors import InvalidArgumentError

from .exceptions import CorruptModelError, ModelIOError
from .model import DtHmm

HMM_SUFFIX = '.hmm.json'
SCHEMA_KEYS = {'n_states', 'n_symbols', 'pi', 'trans', 'emit'}


def save_hmm(model: DtHmm, path: Union[str, Path]) -> Path:
    path = Path(path)
    tmp_path = path.with_name(path.name + '.tmp')
    try:
        with open(tmp_path, 'w', encoding='utf-8') as fh:
            json.dump(model.to_dict(), fh, indent=2)
        os.replace(tmp_path, path)
    except OSError as exc:
        raise ModelIOError(f'cannot write model {path}: {exc}') from exc
    return path


def load_hmm(path: Union[str, Path]) -> DtHmm:
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise ModelIOError(f'cannot read model {path}: {exc}') from exc
    except json.JSONDecodeError as exc:
        raise CorruptModelError(f'{path}: not valid JSON ({exc})') from exc
    if not isinstance(payload, dict) or set(payload) != SCHEMA_KEYS:
        raise CorruptModelError(
            f'{path}: expected keys {sorted(SCHEMA_KEYS)}'
        )
    try:
        model = DtHmm(
            pi=payload['pi'], trans=payload['trans'], emit=payload['emit'],
        )
    except (InvalidArgumentError, TypeError, ValueError) as exc:
        raise CorruptModelError(f'{path}: {exc}') from exc
    if (model.n_states, model.n_symbols) != (
            payload['n_states'], payload['n_symbols']):
        raise CorruptModelError(
            f'{path}: declared dimensions {payload["n_states"]}x'
            f'{payload["n_symbols"]} do not match the arrays'
        )
    return model
