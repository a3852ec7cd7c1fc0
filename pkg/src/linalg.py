"""
Точная линейная алгебра над рациональными числами и над полем вычетов

Матрицы - списки строк. Рациональные значения хранятся как Fraction,
значения по модулю p - как int в диапазоне [0, p).
"""
from fractions import Fraction
from typing import List, Optional, Sequence

Matrix = List[List[Fraction]]


def identity(n: int) -> Matrix:
    """Единичная матрица n x n"""
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def zeros(n: int, m: Optional[int] = None) -> Matrix:
    """Нулевая матрица n x m"""
    m = n if m is None else m
    return [[Fraction(0)] * m for _ in range(n)]


def transpose(m: Sequence[Sequence]) -> List[list]:
    return [list(col) for col in zip(*m)] if m else []


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> List[list]:
    """Произведение матриц"""
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def subtract(a: Sequence[Sequence], b: Sequence[Sequence]) -> List[list]:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def det_bareiss(m: Sequence[Sequence]) -> Fraction:
    """
    Определитель методом Барейсса (без дробей в промежуточных шагах)

    Args:
        m: квадратная матрица рациональных чисел

    Returns:
        Точное значение определителя
    """
    n = len(m)
    if n == 0:
        return Fraction(1)

    a = [[Fraction(x) for x in row] for row in m]
    sign = 1
    prev = Fraction(1)

    for k in range(n - 1):
        if a[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if pivot is None:
                return Fraction(0)
            a[k], a[pivot] = a[pivot], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                # деление точное по построению
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
        prev = a[k][k]

    return sign * a[n - 1][n - 1]


def solve(a: Sequence[Sequence], b: Sequence) -> Optional[List[Fraction]]:
    """
    Решение квадратной системы a x = b методом Гаусса-Жордана

    Returns:
        Вектор решения или None, если матрица вырождена
    """
    n = len(a)
    aug = [[Fraction(x) for x in row] + [Fraction(rhs)] for row, rhs in zip(a, b)]

    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        lead = aug[col][col]
        aug[col] = [x / lead for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]

    return [aug[r][n] for r in range(n)]


def inverse(a: Sequence[Sequence]) -> Optional[Matrix]:
    """Обратная матрица или None для вырожденной"""
    n = len(a)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(a)]

    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        lead = aug[col][col]
        aug[col] = [x / lead for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]

    return [row[n:] for row in aug]


def leading_principal_minors(m: Sequence[Sequence]) -> List[Fraction]:
    """Ведущие главные миноры (критерий Сильвестра)"""
    return [det_bareiss([row[:k] for row in m[:k]]) for k in range(1, len(m) + 1)]


# --- поле вычетов ---------------------------------------------------------

def det_mod(m: Sequence[Sequence[int]], p: int) -> int:
    """Определитель по модулю простого p (исключение Гаусса)"""
    n = len(m)
    a = [[x % p for x in row] for row in m]
    det = 1

    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col]), None)
        if pivot is None:
            return 0
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        lead = a[col][col]
        det = det * lead % p
        inv = pow(lead, p - 2, p)
        for r in range(col + 1, n):
            if a[r][col]:
                factor = a[r][col] * inv % p
                a[r] = [(x - factor * y) % p for x, y in zip(a[r], a[col])]

    return det % p


def rank_mod(m: Sequence[Sequence[int]], p: int) -> int:
    """Ранг матрицы по модулю p"""
    a = [[x % p for x in row] for row in m]
    rows = len(a)
    cols = len(a[0]) if a else 0
    rank = 0

    for col in range(cols):
        pivot = next((r for r in range(rank, rows) if a[r][col]), None)
        if pivot is None:
            continue
        a[rank], a[pivot] = a[pivot], a[rank]
        inv = pow(a[rank][col], p - 2, p)
        for r in range(rows):
            if r != rank and a[r][col]:
                factor = a[r][col] * inv % p
                a[r] = [(x - factor * y) % p for x, y in zip(a[r], a[rank])]
        rank += 1
        if rank == rows:
            break

    return rank


def inverse_mod(a: Sequence[Sequence[int]], p: int) -> Optional[List[List[int]]]:
    """Обратная матрица по модулю p или None"""
    n = len(a)
    aug = [[x % p for x in row] + [int(i == j) for j in range(n)] for i, row in enumerate(a)]

    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col]), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = pow(aug[col][col], p - 2, p)
        aug[col] = [x * inv % p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [(x - factor * y) % p for x, y in zip(aug[r], aug[col])]

    return [row[n:] for row in aug]


def matmul_mod(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]], p: int) -> List[List[int]]:
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) % p for col in bt] for row in a]
