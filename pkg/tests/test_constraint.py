"""
Тесты для модуля constraint
"""
import itertools
import random
from fractions import Fraction

import pytest

from constraint import (
    CovarianceMatrix,
    build_matrix,
    canonical_key,
    components,
    constraint_from_json,
    constraint_polynomial,
    constraint_to_json,
    edge_weight,
    is_degenerate,
    is_isomorphic,
    is_normal,
    make_constraint,
    normal_form,
    read_covariance,
    relabel_variables,
    render_text,
    satisfies,
    write_covariance,
)
from errors import (
    AlgconError,
    DegenerateConstraintError,
    MissingVariableError,
    NonSquareConstraintError,
    NonTreeConstraintError,
)
from oracle import covariance, sample_offmodel_covariance, sample_parameters
from poly import Polynomial


def s(v, w):
    return Polynomial.variable(v, w)


def four_cycle():
    return make_constraint([('t1', 'a'), ('t3', 'b')], [('t2', 'c'), ('t4', 'd')],
                           [('t1', 't2'), ('t1', 't4'), ('t3', 't2'), ('t3', 't4')])


def test_matrix_layout(worked_constraint):
    """Тест: строки и столбцы матрицы ограничения"""
    m = build_matrix(worked_constraint)
    assert m.rows == (('t1', 'c'), ('t3', 'a'), ('t3', 'b'))
    assert m.cols == (('t2', 'b'), ('t2', 'd'), ('t4', 'a'))
    assert m.entries[0] == (('b', 'c'), ('c', 'd'), None)
    assert m.entries[1] == (('a', 'b'), ('a', 'd'), ('a', 'a'))
    assert m.entries[2] == (('b', 'b'), ('b', 'd'), ('a', 'b'))


def test_polynomial(worked_constraint):
    """Тест: определитель ограничения из разобранного примера"""
    p = constraint_polynomial(worked_constraint)
    expected = (s('b', 'c') * s('a', 'b') * s('a', 'd') - s('a', 'a') * s('b', 'c') * s('b', 'd')
                - s('a', 'b') * s('a', 'b') * s('c', 'd') + s('a', 'a') * s('b', 'b') * s('c', 'd'))
    assert p == expected or p == -expected
    assert len(p.terms) == 4
    assert p.degree() == 3


def test_non_square():
    """Тест: неквадратное ограничение"""
    gc = make_constraint([('t1', 'ab')], [('t2', 'c')], [('t1', 't2')])
    with pytest.raises(NonSquareConstraintError) as info:
        build_matrix(gc)
    assert info.value.row_slots == 2
    assert info.value.col_slots == 1


def test_invalid_constraints():
    """Тест: пустая метка, ребро внутри доли, чужое семя"""
    with pytest.raises(AlgconError):
        make_constraint([('t1', '')], [('t2', 'a')], [('t1', 't2')])
    with pytest.raises(AlgconError):
        make_constraint([('t1', 'a'), ('t3', 'b')], [('t2', 'a')], [('t1', 't3')])
    with pytest.raises(AlgconError):
        make_constraint([('t1', 'a')], [('t2', 'a')], [('t1', 't2')], seeds=('t9',))


def test_normal_form_merges():
    """Тест: узлы с одинаковыми соседями и непересекающимися метками сливаются"""
    gc = make_constraint([('t1', 'a'), ('t3', 'b')], [('t2', 'cd')], [('t1', 't2'), ('t3', 't2')])
    assert not is_normal(gc)
    nf = normal_form(gc)
    assert is_normal(nf)
    assert [n.label for n in nf.part_a] == [frozenset('ab')]
    assert nf.edges == frozenset({('t1', 't2')})


def test_normal_form_keeps_overlapping_labels():
    """Тест: узлы с пересекающимися метками не сливаются"""
    gc = make_constraint([('t1', 'a'), ('t3', 'a')], [('t2', 'cd')], [('t1', 't2'), ('t3', 't2')])
    assert normal_form(gc) == gc


def test_satisfies(worked_constraint):
    """Тест: точная проверка обращения определителя в ноль"""
    nodes = ('a', 'b', 'c', 'd')
    identity = CovarianceMatrix.from_entries(nodes, {(v, v): 1 for v in nodes})
    assert satisfies(worked_constraint, identity)
    entries = {(v, v): 2 for v in nodes}
    entries[('c', 'd')] = 1
    assert not satisfies(worked_constraint, CovarianceMatrix.from_entries(nodes, entries))


def test_edge_weights(worked_constraint):
    """Тест: веса рёбер совпадают с подсчётом по членам определителя"""
    m = build_matrix(worked_constraint)
    n = m.dimension
    for edge in sorted(worked_constraint.edges):
        weight = edge_weight(worked_constraint, edge)
        assert weight == 1
        for perm in itertools.permutations(range(n)):
            if any(m.entries[i][perm[i]] is None for i in range(n)):
                continue
            in_block = sum(1 for i in range(n)
                           if m.rows[i][0] == edge[0] and m.cols[perm[i]][0] == edge[1])
            assert in_block == weight


def test_edge_weight_errors():
    """Тест: вес ребра не определён для цикла и для вырожденного дерева"""
    with pytest.raises(NonTreeConstraintError):
        edge_weight(four_cycle(), ('t1', 't2'))

    degenerate = make_constraint([('t1', 'ab'), ('t3', 'd')], [('t2', 'c'), ('t4', 'ef')],
                                 [('t1', 't2'), ('t3', 't2'), ('t3', 't4')])
    with pytest.raises(DegenerateConstraintError):
        edge_weight(degenerate, ('t1', 't2'))
    assert is_degenerate(degenerate)


def test_is_degenerate(worked_constraint):
    """Тест: повторяющиеся строки дают нулевой определитель"""
    duplicate = make_constraint([('t1', 'a'), ('t3', 'a')], [('t2', 'b'), ('t4', 'c')],
                                [('t1', 't2'), ('t1', 't4'), ('t3', 't2'), ('t3', 't4')])
    assert is_degenerate(duplicate)
    assert not is_degenerate(worked_constraint)
    assert not is_degenerate(four_cycle())


def test_components():
    """Тест: разбиение на связные компоненты"""
    gc = make_constraint([('t1', 'a'), ('t3', 'b')], [('t2', 'c'), ('t4', 'd')],
                         [('t1', 't2'), ('t3', 't4')])
    parts = components(gc)
    assert len(parts) == 2
    assert set(parts[0].nodes) == {'t1', 't2'}
    assert set(parts[1].nodes) == {'t3', 't4'}


def test_canonical_key_and_isomorphism(worked_constraint, cyclic_constraint):
    """Тест: канонический ключ не зависит от имён узлов и обмена долей"""
    renamed = make_constraint(
        [('u7', 'bd'), ('u2', 'a')],
        [('u5', 'c'), ('u1', 'ab')],
        [('u5', 'u7'), ('u1', 'u7'), ('u1', 'u2')],
    )
    assert canonical_key(renamed) == canonical_key(worked_constraint)
    assert is_isomorphic(renamed, worked_constraint)
    assert canonical_key(cyclic_constraint) != canonical_key(worked_constraint)
    assert not is_isomorphic(cyclic_constraint, worked_constraint)


def test_json_round_trip(worked_constraint):
    """Тест: JSON сохраняет доли, рёбра и семена"""
    text = constraint_to_json(worked_constraint)
    assert '"seeds"' in text
    assert constraint_from_json(text) == worked_constraint
    with pytest.raises(AlgconError):
        constraint_from_json('{"partA": []}')
    with pytest.raises(AlgconError):
        constraint_from_json('not json')


def test_render_text(worked_constraint):
    """Тест: текстовый рисунок ограничения"""
    drawing = render_text(worked_constraint)
    assert "*c" in drawing
    assert "*bd" in drawing
    assert "also" not in drawing
    assert len(drawing.strip('\n').splitlines()) == 3
    assert "also: " in render_text(four_cycle())


def test_covariance_matrix():
    """Тест: проверки ковариационной матрицы и файловый формат"""
    with pytest.raises(AlgconError):
        CovarianceMatrix(('a', 'b'), ((1, 2), (3, 1)))
    with pytest.raises(AlgconError):
        CovarianceMatrix(('a', 'b'), ((0, 0), (0, 1)))
    with pytest.raises(AlgconError):
        CovarianceMatrix(('a', 'b'), ((1, 0),))

    cov = CovarianceMatrix(('a', 'b'), ((2, Fraction(1, 2)), (Fraction(1, 2), 1)))
    assert cov['b', 'a'] == Fraction(1, 2)
    assert cov.is_positive_definite()
    assert read_covariance(write_covariance(cov)) == cov
    assert read_covariance("a b  # имена\n1 1/3\n1/3 1\n")['a', 'b'] == Fraction(1, 3)
    with pytest.raises(MissingVariableError):
        cov['a', 'z']
    with pytest.raises(AlgconError):
        read_covariance("a b\n1 x\nx 1\n")
    assert not CovarianceMatrix(('a', 'b'), ((1, 2), (2, 1))).is_positive_definite()


def test_relabel_variables(worked_constraint):
    """Тест: переименование переменных в метках"""
    renamed = relabel_variables(worked_constraint, {'a': 'z'})
    assert renamed.labels_used() == ['b', 'c', 'd', 'z']
    assert renamed.seeds == worked_constraint.seeds


def random_square_constraint(rng, variables='abcd'):
    while True:
        part_a = [(f"t{2 * i + 1}", rng.sample(variables, rng.randint(1, 2))) for i in range(rng.randint(1, 3))]
        part_b = [(f"t{2 * i + 2}", rng.sample(variables, rng.randint(1, 2))) for i in range(rng.randint(1, 3))]
        edges = [(x, y) for x, _ in part_a for y, _ in part_b if rng.random() < 0.7]
        gc = make_constraint(part_a, part_b, edges)
        if gc.is_square:
            return gc


def test_satisfies_invariant_under_normal_form(worked_graph, worked_constraint):
    """Тест: satisfies совпадает для ограничения и его нормальной формы на случайных Sigma"""
    rng = random.Random(0)
    constraints = [worked_constraint] + [random_square_constraint(rng) for _ in range(150)]
    sigmas = [sample_offmodel_covariance(('a', 'b', 'c', 'd'), seed) for seed in range(3)]
    sigmas += [covariance(sample_parameters(worked_graph, seed)) for seed in range(2)]

    merged = satisfied = 0
    for gc in constraints:
        normal = normal_form(gc)
        merged += normal != gc
        for sigma_matrix in sigmas:
            verdict = satisfies(gc, sigma_matrix)
            assert satisfies(normal, sigma_matrix) == verdict
            satisfied += verdict
    assert merged > 0
    assert satisfied > 0
