"""
Тесты для модуля classify
"""
import pytest

from classify import (
    CERTIFIED,
    REFUTED,
    UNKNOWN,
    certify_core,
    i_primary_certificate,
    pd_primary_certificate,
    peel_principal_minors,
    principal_minor_poly,
)
from config import DEFAULT_CONFIG
from constraint import constraint_polynomial, make_constraint
from construct import a_minor_constraint, derive_all, derive_constraint
from errors import AlgconError
from graph import enumerate_graphs
from htc import IdentifyingFamily, constraint_pairs, validate_family
from poly import Polynomial, fingerprint


def s(v, w):
    return Polynomial.variable(v, w)


def ci_det():
    return s('a', 'b') * s('c', 'c') - s('a', 'c') * s('b', 'c')


def worked_det():
    return (s('b', 'c') * s('a', 'b') * s('a', 'd') - s('a', 'a') * s('b', 'c') * s('b', 'd')
            - s('a', 'b') * s('a', 'b') * s('c', 'd') + s('a', 'a') * s('b', 'b') * s('c', 'd'))


def parent_family(g):
    """Семейство Y_v = pa(v) с топологическим порядком"""
    return IdentifyingFamily({v: g.parents(v) for v in g.nodes}, tuple(g.topological_order()))


def all_graphs(n, allow_bows, allow_cycles):
    for m in range(3 * n * (n - 1) // 2 + 1):
        yield from enumerate_graphs(n, m, allow_bows, allow_cycles)


def test_principal_minor_poly():
    """Тест: главные миноры Sigma"""
    assert principal_minor_poly(['a']) == s('a', 'a')
    assert principal_minor_poly(['b', 'a']) == s('a', 'a') * s('b', 'b') - s('a', 'b') * s('a', 'b')
    three = principal_minor_poly(['a', 'b', 'c'])
    assert len(three.terms) == 6
    assert three.degree() == 3
    with pytest.raises(AlgconError):
        principal_minor_poly([])


def test_peel_principal_minors():
    """Тест: отделение главных миноров и восстановление произведения"""
    minor_ab = principal_minor_poly(['a', 'b'])

    core, peeled = peel_principal_minors(s('a', 'a') * ci_det())
    assert core == ci_det()
    assert peeled == [(('a',), 1)]

    core, peeled = peel_principal_minors(minor_ab * ci_det())
    assert core == ci_det()
    assert peeled == [(('a', 'b'), 1)]

    core, peeled = peel_principal_minors(minor_ab * minor_ab)
    assert core == Polynomial.constant(1)
    assert peeled == [(('a', 'b'), 2)]

    core, peeled = peel_principal_minors(worked_det())
    assert core == worked_det()
    assert peeled == []

    with pytest.raises(AlgconError):
        peel_principal_minors(Polynomial())


def test_factor_accounting():
    """Тест: ядро на произведение миноров даёт исходный многочлен"""
    p = s('a', 'a') * principal_minor_poly(['b', 'c']) * ci_det()
    core, peeled = peel_principal_minors(p)
    product = core
    for subset, k in peeled:
        product = product * principal_minor_poly(subset) ** k
    assert product == p


def test_certify_core():
    """Тест: три вердикта сравнения ядра с эталоном"""
    assert certify_core(ci_det() * 3, ci_det())['verdict'] == CERTIFIED
    refuted = certify_core(ci_det() * s('a', 'b'), ci_det())
    assert refuted['verdict'] == REFUTED
    assert refuted['residual'] == "+1 s[a,b]"
    assert certify_core(ci_det(), worked_det())['verdict'] == UNKNOWN
    assert certify_core(-ci_det(), fingerprint(ci_det(), 0))['verdict'] == CERTIFIED
    with pytest.raises(AlgconError):
        certify_core(ci_det(), Polynomial())


def test_pd_primary_certificate(worked_constraint):
    """Тест: PD-сертификат выхода алгоритма построения"""
    result = pd_primary_certificate(worked_constraint, worked_det())
    assert result['verdict'] == CERTIFIED
    assert result['peeled'] == []

    with_minor = make_constraint([('t1', 'ab'), ('t3', 'c')], [('t2', 'ab'), ('t4', 'd')],
                                 [('t1', 't2'), ('t3', 't4')])
    result = pd_primary_certificate(with_minor, s('c', 'd'))
    assert result['verdict'] == CERTIFIED
    assert result['peeled'] == [[['a', 'b'], 1]]
    assert result['core'] == "+1 s[c,d]"


def test_pd_primary_beyond_expansion_cap(worked_constraint):
    """Тест: без разложения вердикт даёт только отпечаток"""
    small = DEFAULT_CONFIG.with_overrides(expansion_cap=2)
    assert pd_primary_certificate(worked_constraint, worked_det(), small)['verdict'] == UNKNOWN
    by_fingerprint = pd_primary_certificate(worked_constraint, fingerprint(worked_det(), 0), small)
    assert by_fingerprint['verdict'] == CERTIFIED
    assert by_fingerprint['core'] is None


def test_i_primary_certificate(worked_graph, worked_family, worked_constraint):
    """Тест: I-сертификат с диагональными мономами для d и b"""
    result = i_primary_certificate(worked_constraint, worked_family, worked_graph, ('c', 'd'))
    assert result['verdict'] == CERTIFIED
    assert result['witnesses'] == {'d': "+1 s[a,a] s[b,b]", 'b': "+1 s[a,a]"}
    assert result['failed_node'] is None

    everything = i_primary_certificate(worked_constraint, worked_family, worked_graph)
    assert everything['verdict'] == CERTIFIED
    assert set(everything['witnesses']) == {'b', 'd'}

    small = DEFAULT_CONFIG.with_overrides(expansion_cap=1)
    unknown = i_primary_certificate(worked_constraint, worked_family, worked_graph, ('c', 'd'), small)
    assert unknown['verdict'] == UNKNOWN
    assert unknown['failed_node'] == 'd'


def check_ancestral_minors(n):
    checked = 0
    for g in all_graphs(n, allow_bows=False, allow_cycles=False):
        if not g.is_ancestral():
            continue
        fam = parent_family(g)
        for v in g.nodes:
            parents = g.parents(v)
            if not parents:
                continue
            gc = a_minor_constraint(g, fam, v)
            assert len(gc.nodes) == 2
            assert all(node.label == parents for node in gc.nodes.values())
            assert constraint_polynomial(gc) == principal_minor_poly(parents)
            checked += 1
    return checked


def check_bow_free_i_primary(n):
    checked = 0
    for g in all_graphs(n, allow_bows=False, allow_cycles=False):
        fam = parent_family(g)
        for pair in constraint_pairs(g, fam):
            gc = derive_constraint(g, fam, pair)
            assert i_primary_certificate(gc, fam, g, pair)['verdict'] == CERTIFIED
            checked += 1
    return checked


def test_ancestral_minors_small():
    """Тест: для предковых графов |A^(v)| - главный минор по pa(v)"""
    assert check_ancestral_minors(3) > 0


def test_bow_free_i_primary_small():
    """Тест: бесконтурные графы без луков дают I-сертифицированные ограничения"""
    assert check_bow_free_i_primary(3) > 0


@pytest.mark.slow
def test_ancestral_minors_four_nodes():
    """Тест: главные миноры для предковых графов с 4 узлами"""
    assert check_ancestral_minors(4) > 0


@pytest.mark.slow
def test_bow_free_i_primary_four_nodes():
    """Тест: I-сертификаты для бесконтурных графов без луков с 4 узлами"""
    assert check_bow_free_i_primary(4) > 0


def test_derive_all_parent_family_is_valid():
    """Тест: семейство pa подходит всем бесконтурным графам без луков"""
    for g in all_graphs(3, allow_bows=False, allow_cycles=False):
        fam = parent_family(g)
        assert validate_family(g, fam)
        assert len(derive_all(g, fam)) == len(constraint_pairs(g, fam))
