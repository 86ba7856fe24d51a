from regimecast.errors import DataError


class UnusableSeriesError(DataError):
    """Ряд не содержит ни одного значения"""


class InvalidRecordError(DataError):
    """Запись с нераспознаваемой датой"""


class NoOverlapError(DataError):
    """Ряды не пересекаются по датам"""


class MissingModelError(DataError):
    """Для столбца нет обученной HMM"""


class PanelFileError(DataError):
    """Файл панели не удалось прочитать или записать"""
