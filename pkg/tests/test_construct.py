"""
Тесты для модуля construct
"""
import itertools

import pytest

from config import DEFAULT_CONFIG
from constraint import build_matrix, constraint_fingerprint, constraint_polynomial
from construct import (
    _TreeBuilder,
    a_minor_constraint,
    a_minor_constraints,
    derive_all,
    derive_constraint,
    expansion_trace,
)
from errors import FamilyError, IdentificationRecursionError, TrivialFactorSignal
from graph import canonical_form, enumerate_graphs
from htc import IdentifyingFamily, enumerate_identifying_families, find_identifying_family
from oracle import sample_covariance_mod_p, vanishes_mod_p, vanishing_battery
from poly import Polynomial


def s(v, w):
    return Polynomial.variable(v, w)


def test_derive_worked_example(worked_graph, worked_family, worked_constraint):
    """Тест: ограничение для пары {c, d} совпадает с разобранным примером"""
    assert derive_constraint(worked_graph, worked_family, ('c', 'd')) == worked_constraint
    assert derive_constraint(worked_graph, worked_family, ('d', 'c')) == worked_constraint
    assert expansion_trace(worked_graph, worked_family, ('c', 'd')) == ['d', 'b']


def test_derive_cyclic_example(cyclic_graph, cyclic_family, cyclic_constraint):
    """Тест: граф с циклом и луком"""
    assert derive_constraint(cyclic_graph, cyclic_family, ('b', 'c')) == cyclic_constraint


def test_derive_all(worked_graph, worked_family, worked_constraint, chain):
    """Тест: по одному ограничению на пару"""
    assert derive_all(worked_graph, worked_family) == [worked_constraint]

    constraints = derive_all(chain, IdentifyingFamily(
        {'a': frozenset(), 'b': frozenset('a'), 'c': frozenset('b')}, ('a', 'b', 'c')))
    assert len(constraints) == 1
    p = constraint_polynomial(constraints[0])
    expected = s('a', 'b') * s('b', 'c') - s('a', 'c') * s('b', 'b')
    assert p == expected or p == -expected


def test_derive_errors(worked_graph, worked_family):
    """Тест: пара без ограничения и некорректное семейство"""
    with pytest.raises(FamilyError):
        derive_constraint(worked_graph, worked_family, ('a', 'b'))

    bad = IdentifyingFamily(
        {'a': frozenset(), 'b': frozenset('c'), 'c': frozenset(), 'd': frozenset('b')},
        ('a', 'b', 'c', 'd'),
    )
    with pytest.raises(FamilyError):
        derive_constraint(worked_graph, bad, ('c', 'd'))


def test_a_minor(worked_graph, worked_family):
    """Тест: ограничения |A^(v)| для узлов с родителями"""
    minor_d = a_minor_constraint(worked_graph, worked_family, 'd')
    assert len(minor_d.part_a) == 1 and len(minor_d.part_b) == 1
    assert minor_d.part_a[0].label == frozenset('ab')
    assert minor_d.part_b[0].label == frozenset('ab')
    p = constraint_polynomial(minor_d)
    expected = s('a', 'a') * s('b', 'b') - s('a', 'b') * s('a', 'b')
    assert p == expected or p == -expected

    minor_b = a_minor_constraint(worked_graph, worked_family, 'b')
    assert constraint_polynomial(minor_b) == s('a', 'a')

    with pytest.raises(TrivialFactorSignal):
        a_minor_constraint(worked_graph, worked_family, 'a')

    assert len(a_minor_constraints(worked_graph, worked_family, ['a', 'b', 'd'])) == 2


def test_identification_guard(worked_graph, worked_family):
    """Тест: раскрытие против порядка идентификации запрещено"""
    builder = _TreeBuilder(worked_graph, worked_family)
    root = builder.add_node('d', True)
    with pytest.raises(IdentificationRecursionError):
        builder.expand(root, 'd', bound=0)


def test_derived_matrix_is_square(cyclic_graph, cyclic_family):
    """Тест: выведенное ограничение квадратное"""
    gc = derive_constraint(cyclic_graph, cyclic_family, ('b', 'c'))
    m = build_matrix(gc)
    assert len(m.rows) == len(m.cols) == 3


def check_vanishing(graphs, points=2):
    checked = 0
    for g in graphs:
        fam = find_identifying_family(g)
        if fam is None:
            continue
        for gc in derive_all(g, fam):
            assert gc.is_square
            assert not constraint_fingerprint(gc).is_zero()
            for seed in range(points):
                assert vanishes_mod_p(gc, sample_covariance_mod_p(g, seed), DEFAULT_CONFIG.prime)
            checked += 1
    return checked


def graphs_up_to(n, allow_bows=True, allow_cycles=True):
    for k in range(2, n + 1):
        for m in range(3 * k * (k - 1) // 2 + 1):
            yield from enumerate_graphs(k, m, allow_bows, allow_cycles)


def test_derived_constraints_vanish_on_model():
    """Тест: все выведенные ограничения графов до 3 узлов обращаются в ноль на модели"""
    assert check_vanishing(graphs_up_to(3)) > 0


@pytest.mark.slow
def test_derived_constraints_vanish_four_nodes():
    """Тест: то же для бесконтурных графов без луков с 4 узлами"""
    graphs = itertools.chain.from_iterable(enumerate_graphs(4, m, False, False) for m in range(7))
    assert check_vanishing(graphs) > 0


@pytest.mark.slow
def test_battery_every_family_four_nodes():
    """Тест: батарея из 25 испытаний для всех семейств графов до 4 узлов с луками и циклами"""
    representatives = {}
    for g in graphs_up_to(4):
        representatives.setdefault(canonical_form(g), g)

    checked = 0
    for g in representatives.values():
        families = list(enumerate_identifying_families(g, limit=DEFAULT_CONFIG.family_candidate_cap))
        for fam in families:
            for gc in derive_all(g, fam):
                battery = vanishing_battery(gc, g, trials=25, seed=checked)
                assert battery['model_pass'] == 25, (g, fam.to_dict())
                assert battery['offmodel_reject'] >= 24, (g, fam.to_dict())
                checked += 1
    assert checked > 0
