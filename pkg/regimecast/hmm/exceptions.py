from regimecast.errors import DataError


class CorruptModelError(DataError):
    """Файл модели не соответствует схеме"""


class ModelIOError(DataError):
    """Файл модели не удалось прочитать или записать"""
