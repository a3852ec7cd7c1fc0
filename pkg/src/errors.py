"""
Исключения инструментария algcon

Все ошибки наследуют ValueError, поэтому CLI ловит их одним обработчиком.
"""
from typing import Optional


class AlgconError(ValueError):
    """Базовая ошибка инструментария"""


class GraphParseError(AlgconError):
    """Ошибка разбора файла графа"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class UnknownNodeError(AlgconError):
    """Узел не принадлежит графу"""


class UnsupportedSizeError(AlgconError):
    """Размер задачи превышает бюджет перебора"""


class FamilyError(AlgconError):
    """Некорректное семейство идентифицирующих множеств"""


class ExpansionCapError(AlgconError):
    """Матрица слишком велика для символьного разложения"""


class DivisionByZeroPolynomialError(AlgconError):
    """Деление на нулевой многочлен"""


class FingerprintMismatchError(AlgconError):
    """Отпечатки получены с разными простыми или seed"""


class HomogeneityError(AlgconError):
    """Многочлен не является V-однородным"""

    def __init__(self, message: str, first_term: str = "", second_term: str = ""):
        self.first_term = first_term
        self.second_term = second_term
        super().__init__(message)


class NonSquareConstraintError(AlgconError):
    """Матрица ограничения не квадратная"""

    def __init__(self, row_slots: int, col_slots: int):
        self.row_slots = row_slots
        self.col_slots = col_slots
        super().__init__(
            f"Constraint is not square: {row_slots} row slots vs {col_slots} column slots"
        )


class NonTreeConstraintError(AlgconError):
    """Операция определена только для ограничений-деревьев"""


class DegenerateConstraintError(AlgconError):
    """Определитель ограничения тождественно равен нулю"""


class IdentificationRecursionError(AlgconError):
    """Раскрытие узла нарушает порядок идентификации"""


class TrivialFactorSignal(AlgconError):
    """|A^(v)| - пустой определитель, равный 1"""


class InvalidTransformationError(AlgconError):
    """Тройка узлов не удовлетворяет условиям преобразования"""


class SamplingBudgetError(AlgconError):
    """Не удалось получить обратимую I - Lambda за отведённое число попыток"""


class IdentificationUndefinedError(AlgconError):
    """Матрица A^(v) вырождена в данной точке"""

    def __init__(self, node: str):
        self.node = node
        super().__init__(f"Identification undefined at sigma: A^({node}) is singular")


class MissingVariableError(AlgconError):
    """В ковариационной матрице нет нужной переменной"""
