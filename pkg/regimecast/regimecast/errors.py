class RegimecastError(Exception):
    """Базовая ошибка проекта"""


class InvalidArgumentError(RegimecastError, ValueError):
    """Неверные аргументы или конфигурация"""

    exit_code = 1


class DataError(RegimecastError):
    """Проблема с данными или артефактами"""

    exit_code = 2
