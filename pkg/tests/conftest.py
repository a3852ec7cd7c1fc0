"""
Общие фикстуры: графы и ограничения из разобранных примеров
"""
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from constraint import make_constraint  # noqa: E402
from graph import parse_graph  # noqa: E402
from htc import IdentifyingFamily, find_identifying_family  # noqa: E402

WORKED_GRAPH = """nodes a b c d
dir a b
dir b d
bi a c
bi a d
bi b c
"""

CYCLIC_GRAPH = """nodes a b c d
dir a b
dir d a
dir a c
dir c a
bi a b
"""

CHAIN = """nodes a b c
dir a b
dir b c
"""

FACTOR_GRAPH = """nodes a b c d
dir a b
dir a c
dir b d
bi a d
bi b c
"""


@pytest.fixture
def worked_graph():
    """Бесконтурный граф без луков с одним ограничением"""
    return parse_graph(WORKED_GRAPH)


@pytest.fixture
def worked_family(worked_graph):
    return find_identifying_family(worked_graph)


@pytest.fixture
def worked_constraint():
    """Ограничение, выводимое для пары {c, d} графа worked_graph"""
    return make_constraint(
        [('t1', 'c'), ('t3', 'ab')],
        [('t2', 'bd'), ('t4', 'a')],
        [('t1', 't2'), ('t3', 't2'), ('t3', 't4')],
        seeds=('t1', 't2'),
    )


@pytest.fixture
def cyclic_graph():
    """Граф с циклом a <-> c и луком между a и b"""
    return parse_graph(CYCLIC_GRAPH)


@pytest.fixture
def cyclic_family():
    return IdentifyingFamily(
        {'a': frozenset('cd'), 'b': frozenset('d'), 'c': frozenset('d'), 'd': frozenset()},
        ('b', 'c', 'a', 'd'),
    )


@pytest.fixture
def cyclic_constraint():
    """Ограничение для пары {b, c} графа cyclic_graph"""
    return make_constraint(
        [('t1', 'ab'), ('t4', 'd')],
        [('t2', 'ac'), ('t3', 'd')],
        [('t1', 't2'), ('t1', 't3'), ('t4', 't2')],
        seeds=('t1', 't2'),
    )


@pytest.fixture
def chain():
    return parse_graph(CHAIN)


@pytest.fixture
def split_example():
    """Дерево с двумя симметричными преобразованиями"""
    return make_constraint(
        [('t1', 'rs'), ('t4', 't'), ('t5', 't')],
        [('t2', 'xa'), ('t3', 'xb')],
        [('t1', 't2'), ('t1', 't3'), ('t2', 't4'), ('t3', 't5')],
    )


@pytest.fixture
def factor_graph():
    """Граф, у которого упрощение ограничения пары {a, c} отщепляет sigma_aa"""
    return parse_graph(FACTOR_GRAPH)


@pytest.fixture
def factor_family():
    return IdentifyingFamily(
        {'a': frozenset(), 'b': frozenset('a'), 'd': frozenset('b'), 'c': frozenset('d')},
        ('a', 'b', 'd', 'c'),
    )
