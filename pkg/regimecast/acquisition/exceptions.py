from regimecast.errors import DataError


class FetchError(DataError):
    """Источник недоступен, а в кэше ряда нет"""

    def __init__(self, message: str, status=None):
        super().__init__(message)
        self.status = status


class SeriesNotFoundError(DataError):
    """Источник не знает такого ряда"""


class RecordsFileError(DataError):
    """Файл date,value не удалось прочитать или записать"""
