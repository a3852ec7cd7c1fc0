"""
Модуль точных многочленов от переменных sigma_vw

Многочлен - словарь {моном: рациональный коэффициент}. Переменная sigma_vw
хранится как упорядоченная пара (v, w), v <= w, поэтому sigma_vw и sigma_wv
совпадают. Порядок мономов - градуированный лексикографический.
"""
import hashlib
import logging
import re
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from config import DEFAULT_CONFIG, ToolkitConfig
from errors import (
    AlgconError,
    DivisionByZeroPolynomialError,
    ExpansionCapError,
    FingerprintMismatchError,
    HomogeneityError,
)
from linalg import det_mod

logger = logging.getLogger(__name__)

Var = Tuple[str, str]
Monomial = Tuple[Tuple[Var, int], ...]

_TERM_RE = re.compile(r"^[+-]\d+(/\d+)?$")
_VAR_RE = re.compile(r"^s\[([^,\]]+),([^,\]]+)\]$")


def sigma(v: str, w: str) -> Var:
    """Переменная sigma_vw (симметричная)"""
    return (v, w) if v <= w else (w, v)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    exps = dict(a)
    for var, e in b:
        exps[var] = exps.get(var, 0) + e
    return tuple(sorted(exps.items()))


def _mono_divides(a: Monomial, b: Monomial) -> bool:
    """Делит ли моном a моном b"""
    exps = dict(b)
    return all(exps.get(var, 0) >= e for var, e in a)


def _mono_div(a: Monomial, b: Monomial) -> Monomial:
    exps = dict(a)
    for var, e in b:
        exps[var] -= e
    return tuple(sorted((var, e) for var, e in exps.items() if e))


@lru_cache(maxsize=None)
def _order_key(mono: Monomial) -> tuple:
    # по возрастанию ключа = по убыванию в градуированном лекс. порядке
    expanded = tuple(var for var, e in mono for _ in range(e))
    return (-len(expanded), expanded)


def _mono_text(mono: Monomial) -> str:
    return " ".join(f"s[{v},{w}]" for (v, w), e in mono for _ in range(e))


def _coef_text(c: Fraction) -> str:
    sign = '+' if c > 0 else '-'
    c = abs(c)
    return f"{sign}{c.numerator}" if c.denominator == 1 else f"{sign}{c.numerator}/{c.denominator}"


class Polynomial:
    """Точный многочлен с рациональными коэффициентами"""

    __slots__ = ('terms',)

    def __init__(self, terms: Optional[Mapping[Monomial, Union[int, Fraction]]] = None):
        self.terms: Dict[Monomial, Fraction] = {}
        for mono, c in (terms or {}).items():
            if c != 0:
                self.terms[mono] = Fraction(c)

    @classmethod
    def constant(cls, c: Union[int, Fraction]) -> "Polynomial":
        return cls({(): c})

    @classmethod
    def variable(cls, v: str, w: str) -> "Polynomial":
        return cls({((sigma(v, w), 1),): 1})

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e for _, e in mono) for mono in self.terms), default=0)

    def sorted_terms(self) -> List[Tuple[Monomial, Fraction]]:
        """Термы в каноническом порядке (старший первым)"""
        return sorted(self.terms.items(), key=lambda item: _order_key(item[0]))

    def leading_term(self) -> Tuple[Monomial, Fraction]:
        if not self.terms:
            raise AlgconError("zero polynomial has no leading term")
        mono = min(self.terms, key=_order_key)
        return mono, self.terms[mono]

    def variables(self) -> List[Var]:
        return sorted({var for mono in self.terms for var, _ in mono})

    def nodes(self) -> List[str]:
        """Модельные переменные, встречающиеся в индексах sigma"""
        return sorted({v for var in self.variables() for v in var})

    def canonical_sign(self) -> "Polynomial":
        """Знак, при котором старший коэффициент положителен"""
        if self.terms and self.leading_term()[1] < 0:
            return -self
        return self

    def evaluate(self, values: Mapping[Var, Fraction]) -> Fraction:
        """Точное значение при заданных sigma_vw"""
        total = Fraction(0)
        for mono, c in self.terms.items():
            term = c
            for var, e in mono:
                term *= Fraction(values[var]) ** e
            total += term
        return total

    def evaluate_mod(self, values: Mapping[Var, int], prime: int) -> int:
        total = 0
        for mono, c in self.terms.items():
            term = c.numerator * pow(c.denominator, prime - 2, prime) % prime
            for var, e in mono:
                term = term * pow(values[var], e, prime) % prime
            total = (total + term) % prime
        return total

    def relabel(self, mapping: Mapping[str, str]) -> "Polynomial":
        """Переименование модельных переменных"""
        result: Dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            renamed: Dict[Var, int] = {}
            for (v, w), e in mono:
                var = sigma(mapping.get(v, v), mapping.get(w, w))
                renamed[var] = renamed.get(var, 0) + e
            key = tuple(sorted(renamed.items()))
            result[key] = result.get(key, Fraction(0)) + c
        return Polynomial(result)

    def to_text(self) -> str:
        """Текст вида `+1 s[a,b] s[c,c] -1 s[a,c] s[b,c]`"""
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.sorted_terms():
            parts.append(_coef_text(c))
            if mono:
                parts.append(_mono_text(mono))
        return " ".join(parts)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            terms[mono] = terms.get(mono, Fraction(0)) + c
        return Polynomial(terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial({mono: -c for mono, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other)
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return Polynomial({mono: c * other for mono, c in self.terms.items()})
        terms: Dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = _mono_mul(m1, m2)
                terms[mono] = terms.get(mono, Fraction(0)) + c1 * c2
        return Polynomial(terms)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        result = Polynomial.constant(1)
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        return f"Polynomial({self.to_text()})"


def parse_polynomial(text: str) -> Polynomial:
    """Разбор текстового представления (обратное к Polynomial.to_text)"""
    tokens = text.split()
    if tokens == ['0']:
        return Polynomial()

    terms: Dict[Monomial, Fraction] = {}
    coef: Optional[Fraction] = None
    mono: Monomial = ()

    def flush():
        if coef is not None:
            terms[mono] = terms.get(mono, Fraction(0)) + coef

    for token in tokens:
        if _TERM_RE.match(token):
            flush()
            coef = Fraction(token)
            mono = ()
            continue
        match = _VAR_RE.match(token)
        if not match or coef is None:
            raise AlgconError(f"malformed polynomial token '{token}'")
        mono = _mono_mul(mono, ((sigma(match.group(1), match.group(2)), 1),))
    flush()
    return Polynomial(terms)


@dataclass(frozen=True)
class PatternMatrix:
    """Квадратная матрица M из ограничения: sigma_vw или 0 в каждой клетке"""

    rows: Tuple[Tuple[str, str], ...]
    cols: Tuple[Tuple[str, str], ...]
    entries: Tuple[Tuple[Optional[Var], ...], ...]

    @property
    def dimension(self) -> int:
        return len(self.rows)

    def numeric(self, values: Mapping[Var, object], zero=0) -> List[list]:
        """Матрица значений при подстановке sigma_vw"""
        return [[zero if var is None else values[var] for var in row] for row in self.entries]

    def variables(self) -> List[Var]:
        return sorted({var for row in self.entries for var in row if var is not None})

    def to_lists(self) -> List[List[str]]:
        return [["0" if var is None else f"s[{var[0]},{var[1]}]" for var in row] for row in self.entries]


def det_expand(m: PatternMatrix, config: ToolkitConfig = DEFAULT_CONFIG) -> Polynomial:
    """
    Символьный определитель матрицы-шаблона (разложение Лапласа с мемоизацией)

    Args:
        m: матрица-шаблон
        config: expansion_cap - максимальная размерность

    Returns:
        Развёрнутый многочлен; знак определяется порядком строк и столбцов
    """
    n = m.dimension
    if n > config.expansion_cap:
        raise ExpansionCapError(
            f"{n}x{n} exceeds expansion cap {config.expansion_cap}; use fingerprint-only workflows"
        )

    memo: Dict[int, Polynomial] = {}
    entries = m.entries

    def minor(row: int, mask: int) -> Polynomial:
        if row == n:
            return Polynomial.constant(1)
        if mask in memo:
            return memo[mask]
        total = Polynomial()
        position = 0
        for j in range(n):
            if not mask >> j & 1:
                continue
            var = entries[row][j]
            if var is not None:
                sub = minor(row + 1, mask & ~(1 << j))
                if not sub.is_zero():
                    term = Polynomial.variable(*var) * sub
                    total = total + term if position % 2 == 0 else total - term
            position += 1
        memo[mask] = total
        return total

    return minor(0, (1 << n) - 1)


def divide_exact(p: Polynomial, q: Polynomial) -> Optional[Polynomial]:
    """
    Точное деление многочленов

    Returns:
        h, при котором p = q * h, или None, если q не делит p
    """
    if q.is_zero():
        raise DivisionByZeroPolynomialError("division by the zero polynomial")

    lead_mono, lead_coef = q.leading_term()
    remainder = dict(p.terms)
    quotient: Dict[Monomial, Fraction] = {}

    while remainder:
        mono = min(remainder, key=_order_key)
        if not _mono_divides(lead_mono, mono):
            return None
        q_mono = _mono_div(mono, lead_mono)
        q_coef = remainder[mono] / lead_coef
        quotient[q_mono] = q_coef
        for mono2, c2 in q.terms.items():
            target = _mono_mul(q_mono, mono2)
            value = remainder.get(target, Fraction(0)) - q_coef * c2
            if value:
                remainder[target] = value
            else:
                remainder.pop(target, None)

    return Polynomial(quotient)


# --- отпечатки --------------------------------------------------------------

@lru_cache(maxsize=200000)
def _point_value(seed: int, point: int, var: Var, prime: int) -> int:
    digest = hashlib.blake2b(f"{seed}|{point}|{var[0]},{var[1]}".encode('utf-8'), digest_size=8).digest()
    value = int.from_bytes(digest, 'big') % prime
    return value or 1


@dataclass(frozen=True)
class Fingerprint:
    """Значения многочлена в фиксированных псевдослучайных точках по модулю prime"""

    values: Tuple[int, ...]
    prime: int
    seed: int

    def is_zero(self) -> bool:
        return not any(self.values)

    def _check(self, other: "Fingerprint"):
        if (self.prime, self.seed, len(self.values)) != (other.prime, other.seed, len(other.values)):
            raise FingerprintMismatchError(
                f"fingerprints differ in prime/seed/points: "
                f"({self.prime}, {self.seed}) vs ({other.prime}, {other.seed})"
            )

    def normalized(self) -> Tuple[int, ...]:
        """Вектор, делённый на первое ненулевое значение (канонический с точностью до скаляра)"""
        lead = next((x for x in self.values if x), None)
        if lead is None:
            return self.values
        inv = pow(lead, self.prime - 2, self.prime)
        return tuple(x * inv % self.prime for x in self.values)

    def __mul__(self, other: "Fingerprint") -> "Fingerprint":
        self._check(other)
        values = tuple(a * b % self.prime for a, b in zip(self.values, other.values))
        return Fingerprint(values, self.prime, self.seed)

    def __neg__(self) -> "Fingerprint":
        return Fingerprint(tuple(-x % self.prime for x in self.values), self.prime, self.seed)


def evaluation_point(seed: int, point: int, variables: Iterable[Var],
                     config: ToolkitConfig = DEFAULT_CONFIG) -> Dict[Var, int]:
    """Значения переменных в точке с номером point"""
    return {var: _point_value(seed, point, var, config.prime) for var in variables}


def fingerprint(obj: Union[Polynomial, PatternMatrix], seed: int = 0,
                config: ToolkitConfig = DEFAULT_CONFIG) -> Fingerprint:
    """
    Отпечаток многочлена или определителя матрицы-шаблона

    Для PatternMatrix определитель считается численно по модулю prime
    без символьного разложения.
    """
    prime = config.prime
    variables = obj.variables()
    values = []
    for k in range(config.fingerprint_points):
        point = evaluation_point(seed, k, variables, config)
        if isinstance(obj, PatternMatrix):
            values.append(det_mod(obj.numeric(point), prime))
        else:
            values.append(obj.evaluate_mod(point, prime))
    return Fingerprint(tuple(values), prime, seed)


def _scalar(f1: Fingerprint, f2: Fingerprint) -> Optional[int]:
    # c с f1 = c * f2, c != 0; None если такого нет
    f1._check(f2)
    p = f1.prime
    if f1.is_zero() or f2.is_zero():
        return 1 if f1.is_zero() and f2.is_zero() else None
    i = next(k for k, x in enumerate(f2.values) if x)
    c = f1.values[i] * pow(f2.values[i], p - 2, p) % p
    if c == 0:
        return None
    if all(a == c * b % p for a, b in zip(f1.values, f2.values)):
        return c
    return None


def equal_up_to_scalar(f1: Fingerprint, f2: Fingerprint) -> bool:
    """f1 = c * f2 для одного ненулевого скаляра c во всех точках"""
    return _scalar(f1, f2) is not None


def equal_up_to_sign(f1: Fingerprint, f2: Fingerprint) -> bool:
    c = _scalar(f1, f2)
    return c is not None and c in (1, f1.prime - 1)


# --- V-однородность ---------------------------------------------------------

def _node_counts(mono: Monomial) -> Counter:
    counts = Counter()
    for (v, w), e in mono:
        counts[v] += e
        counts[w] += e
    return counts


def homogeneity_signature(p: Polynomial) -> Dict[str, int]:
    """
    Общее для всех термов число вхождений каждой модельной переменной
    (sigma_vv считается дважды)

    Raises:
        HomogeneityError: многочлен не V-однороден (названы два терма)
    """
    if p.is_zero():
        raise AlgconError("homogeneity signature of the zero polynomial is undefined")

    terms = p.sorted_terms()
    first_mono, first_coef = terms[0]
    expected = _node_counts(first_mono)
    for mono, c in terms[1:]:
        if _node_counts(mono) != expected:
            first = f"{_coef_text(first_coef)} {_mono_text(first_mono)}".strip()
            second = f"{_coef_text(c)} {_mono_text(mono)}".strip()
            raise HomogeneityError(
                f"polynomial is not V-homogeneous: '{first}' vs '{second}'", first, second
            )
    return dict(sorted(expected.items()))


def diagonal_monomial(p: Polynomial) -> Optional[Tuple[Monomial, Fraction]]:
    """Единственный моном только из диагональных sigma_vv, если он есть"""
    homogeneity_signature(p)
    for mono, c in p.sorted_terms():
        if all(v == w for (v, w), _ in mono):
            return mono, c
    return None
