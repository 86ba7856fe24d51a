from regimecast.errors import InvalidArgumentError


class InvalidSeedError(InvalidArgumentError):
    """Начальный граф нарушает ограничения поиска"""
