import json
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
import pytest
from requests.adapters import HTTPAdapter
from requests.sessions import Session

from hmm.model import DtHmm

pytest_plugins = [
    "fixtures.models",
    "fixtures.networks",
    "fixtures.panels",
    "fixtures.runs",
]

PROJECT_DIR = Path(__file__).resolve().parent.parent
SAMPLE_CONFIG = PROJECT_DIR / "config" / "sample.json"


class NetworkDisabled(AssertionError):
    ...


@pytest.fixture(autouse=True)
def disable_network(monkeypatch):
    """Любое обращение к сети в тестах - ошибка."""

    def guard(*args, **kwargs):
        raise NetworkDisabled(
            "Тесты не должны обращаться к сети: запрос "
            f"{args[1:3] if len(args) > 2 else args}"
        )

    monkeypatch.setattr(Session, "request", guard)
    monkeypatch.setattr(HTTPAdapter, "send", guard)


@pytest.fixture(autouse=True)
def isolated_dirs(settings, tmp_path):
    settings.CACHE_DIR = tmp_path / "cache"
    settings.ARTIFACTS_DIR = tmp_path / "out"
    settings.FIXTURES_DIR = PROJECT_DIR / "fixtures"
    return settings


def textbook_model() -> DtHmm:
    return DtHmm(
        pi=[0.6, 0.4],
        trans=[[0.7, 0.3], [0.4, 0.6]],
        emit=[[0.9, 0.1], [0.2, 0.8]],
    )


def one_hot_model() -> DtHmm:
    """Детерминированный цикл 0 -> 1 -> 2 -> 0 с символами 0, 1, 1."""
    return DtHmm(
        pi=[1.0, 0.0, 0.0],
        trans=[[0, 1, 0], [0, 0, 1], [1, 0, 0]],
        emit=[[1, 0], [0, 1], [0, 1]],
    )


def assert_close(actual, expected, atol: float, what: str):
    assert np.allclose(actual, expected, rtol=0, atol=atol), (
        f"Проверьте {what}: ожидалось {expected}, получено {actual}."
    )


def write_config(path: Path, name: str = "sample", seed: int = 7,
                 datasets: Optional[Iterable[dict]] = None,
                 **sections) -> Path:
    """JSON-конфигурация запуска; пустые секции не записываются."""
    payload = {"name": name, "seed": seed}
    if datasets is not None:
        payload["datasets"] = list(datasets)
    payload.update({key: value for key, value in sections.items()
                    if value is not None})
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return path
