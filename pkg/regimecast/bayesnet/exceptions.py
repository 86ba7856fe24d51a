from regimecast.errors import DataError


class InconsistentEvidenceError(DataError):
    """Свидетельство имеет нулевую вероятность"""


class CorruptNetworkError(DataError):
    """Файл сети не соответствует схеме"""


class NetworkIOError(DataError):
    """Файл сети не удалось прочитать или записать"""
