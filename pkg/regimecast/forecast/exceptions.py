from regimecast.errors import DataError


class MissingArtifactError(DataError):
    """Не найден результат предыдущего этапа"""

    def __init__(self, path, stage: str):
        super().__init__(
            f'{path} is missing; run `manage.py {stage}` first'
        )
        self.path = path
        self.stage = stage


class EmptyPanelError(DataError):
    """Панель не содержит строк"""


class CorruptArtifactError(DataError):
    """Артефакт этапа повреждён или не записан"""
