# hypdyn/errors.py
"""Иерархия исключений пакета hypdyn."""
from __future__ import annotations

from typing import Any, Optional


class HypdynError(Exception):
    """Базовое исключение пакета."""


class ConfigurationError(HypdynError, ValueError):
    """Неверная конфигурация (например, нарушен порядок допусков)."""


class DomainError(HypdynError, ValueError):
    """Геометрически недопустимый вход: точка вне диска/поверхности, плохие параметры."""


class SurfaceMismatchError(DomainError):
    """Операция над точками разных поверхностей."""


class CuspError(DomainError):
    """Модуль или воротник запрошены для параболического фактора (cusp-type surface)."""


class MapDomainError(DomainError):
    """Семейство отображений не определено между данными поверхностями."""


class BranchAmbiguityError(DomainError):
    """Прообраз области слишком близко к критическому значению."""

    def __init__(self, message: str, component: Optional[int] = None):
        super().__init__(message)
        self.component = component


class InjectivityError(DomainError):
    """Область выходит за диск инъективности произведения Бляшке."""


class NumericalBreakdown(HypdynError, ArithmeticError):
    """Потеря точности: орбита подошла к границе, производная не вычислилась и т.п."""

    def __init__(self, message: str, level: Optional[int] = None):
        super().__init__(message)
        self.level = level


class SequenceDataError(HypdynError, ValueError):
    """Последовательность расстояний не монотонна сверх допуска."""


class PreconditionError(HypdynError):
    """Нарушено предусловие классификационной операции."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class InconclusiveError(PreconditionError):
    """Горизонт недостаточен для определённого ответа."""


class MarginExhausted(HypdynError):
    """Построение модели остановлено: запас исчерпан. Несёт частичное состояние."""

    def __init__(self, message: str, level: int, state: Any = None):
        super().__init__(message)
        self.level = level
        self.state = state


class TowerSpecError(HypdynError, ValueError):
    """Ошибка разбора или проверки JSON-описания башни, с указанием позиции."""

    def __init__(self, message: str, position: str = ""):
        super().__init__(f"{position}: {message}" if position else message)
        self.position = position
        self.message = message
