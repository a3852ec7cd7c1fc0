"""
Модуль перебора графических ограничений

Перечисляются связные двудольные графы в нормальной форме с метками из
заданного множества переменных, квадратные и в пределах числа слотов.
Каждое ограничение выдаётся один раз с точностью до переименования узлов
и обмена долей; сначала деревья, затем остальные.
"""
import itertools
import logging
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

import networkx as nx

from config import DEFAULT_CONFIG, ToolkitConfig
from constraint import (
    ConstraintNode,
    GraphicalConstraint,
    canonical_key,
    constraint_fingerprint,
    constraint_polynomial,
)
from errors import AlgconError, ExpansionCapError
from graph import MixedGraph
from oracle import derive_seed, sample_covariance_mod_p, vanishes_mod_p
from poly import (
    Fingerprint,
    PatternMatrix,
    Polynomial,
    divide_exact,
    equal_up_to_scalar,
    fingerprint,
    homogeneity_signature,
)

logger = logging.getLogger(__name__)

Target = Union[Polynomial, PatternMatrix, Fingerprint]


def _shapes(k: int, l: int, trees: bool) -> Iterator[FrozenSet[Tuple[int, int]]]:
    """Связные двудольные графы k x l, у которых нет двух узлов доли с одинаковыми соседями"""
    cells = [(i, j) for i in range(k) for j in range(l)]
    tree_edges = k + l - 1
    sizes = [tree_edges] if trees else range(tree_edges + 1, len(cells) + 1)
    for size in sizes:
        for edges in itertools.combinations(cells, size):
            rows = [frozenset(j for i, j in edges if i == r) for r in range(k)]
            cols = [frozenset(i for i, j in edges if j == c) for c in range(l)]
            if len(set(rows)) < k or len(set(cols)) < l:
                continue
            graph = nx.Graph()
            graph.add_nodes_from(('A', i) for i in range(k))
            graph.add_nodes_from(('B', j) for j in range(l))
            graph.add_edges_from((('A', i), ('B', j)) for i, j in edges)
            if nx.is_connected(graph):
                yield frozenset(edges)


def _labelings(k: int, l: int, variables: Sequence[str], max_slots: int,
               signature: Optional[Dict[str, int]]) -> Iterator[Tuple[FrozenSet[str], ...]]:
    options = [frozenset(c) for size in range(1, len(variables) + 1)
               for c in itertools.combinations(variables, size)]
    total = k + l

    def rec(i: int, rows: int, cols: int, chosen: list, remaining: Optional[Dict[str, int]]):
        if i == total:
            if rows == cols and (remaining is None or not any(remaining.values())):
                yield tuple(chosen)
            return
        in_a = i < k
        for label in options:
            r = rows + (len(label) if in_a else 0)
            c = cols + (0 if in_a else len(label))
            if r > max_slots or c > max_slots:
                continue
            left = None
            if remaining is not None:
                if any(remaining.get(v, 0) < 1 for v in label):
                    continue
                left = dict(remaining)
                for v in label:
                    left[v] -= 1
            chosen.append(label)
            yield from rec(i + 1, r, c, chosen, left)
            chosen.pop()

    yield from rec(0, 0, 0, [], dict(signature) if signature is not None else None)


def enumerate_candidates(variables: Sequence[str], max_nodes: Optional[int] = None,
                         max_slots: Optional[int] = None, trees_only: bool = False,
                         signature: Optional[Dict[str, int]] = None,
                         config: ToolkitConfig = DEFAULT_CONFIG) -> Iterator[GraphicalConstraint]:
    """
    Поток кандидатов-ограничений

    Args:
        variables: модельные переменные для меток
        max_nodes: предел числа узлов ограничения
        max_slots: предел размерности матрицы
        trees_only: только деревья
        signature: известная сигнатура однородности цели (сокращает перебор)

    Returns:
        Итератор ограничений; каждое - один раз с точностью до изоморфизма
    """
    max_nodes = config.search_max_nodes if max_nodes is None else max_nodes
    max_slots = config.search_max_slots if max_slots is None else max_slots
    variables = sorted(set(variables))
    seen = set()
    emitted = 0

    for trees in ((True,) if trees_only else (True, False)):
        for total in range(2, max_nodes + 1):
            for k in range(1, total // 2 + 1):
                l = total - k
                for edges in _shapes(k, l, trees):
                    for labels in _labelings(k, l, variables, max_slots, signature):
                        part_a = tuple(ConstraintNode(f"t{i + 1}", labels[i]) for i in range(k))
                        part_b = tuple(ConstraintNode(f"t{k + j + 1}", labels[k + j]) for j in range(l))
                        gc = GraphicalConstraint(
                            part_a, part_b,
                            frozenset((f"t{i + 1}", f"t{k + j + 1}") for i, j in edges),
                        )
                        key = canonical_key(gc)
                        if key in seen:
                            continue
                        seen.add(key)
                        emitted += 1
                        yield gc

    logger.debug("enumerated %d candidate constraints", emitted)


def match_target(target: Target, variables: Sequence[str], max_nodes: Optional[int] = None,
                 max_slots: Optional[int] = None, mode: str = 'up-to-scalar', trees_only: bool = False,
                 seed: int = 0, config: ToolkitConfig = DEFAULT_CONFIG) -> List[GraphicalConstraint]:
    """
    Кандидаты, определитель которых совпадает с целью

    Если цель задана многочленом или матрицей, совпадение подтверждается
    вторым независимым seed, а при возможности - точным делением.

    Args:
        target: многочлен, матрица-шаблон или отпечаток
        mode: 'exact' (равенство отпечатков) или 'up-to-scalar'
    """
    if mode not in ('exact', 'up-to-scalar'):
        raise AlgconError(f"unknown match mode '{mode}'")

    if isinstance(target, Fingerprint):
        primary, confirm = target, None
    else:
        primary = fingerprint(target, seed, config)
        confirm = fingerprint(target, seed + 1, config)

    signature = None
    if isinstance(target, Polynomial) and not target.is_zero():
        signature = homogeneity_signature(target)

    def matches(fp: Fingerprint, ref: Fingerprint) -> bool:
        return fp.values == ref.values if mode == 'exact' else equal_up_to_scalar(fp, ref)

    found = []
    for gc in enumerate_candidates(variables, max_nodes, max_slots, trees_only, signature, config):
        fp = constraint_fingerprint(gc, primary.seed, config)
        if fp.is_zero() or not matches(fp, primary):
            continue
        if confirm is not None and not matches(constraint_fingerprint(gc, confirm.seed, config), confirm):
            logger.debug("candidate rejected by the confirmation seed")
            continue
        if isinstance(target, Polynomial):
            try:
                h = divide_exact(constraint_polynomial(gc, config), target)
            except ExpansionCapError:
                h = None
            else:
                if h is None or h.degree() != 0:
                    continue
        found.append(gc)

    logger.info("search found %d matching constraints", len(found))
    return found


def find_vanishing_constraints(g: MixedGraph, max_nodes: Optional[int] = None,
                               max_slots: Optional[int] = None, samples: int = 4, seed: int = 0,
                               limit: Optional[int] = None, trees_only: bool = False,
                               config: ToolkitConfig = DEFAULT_CONFIG) -> List[GraphicalConstraint]:
    """
    Ограничения, обращающиеся в ноль на модели графа

    Невырожденный кандидат принимается, если его определитель равен нулю
    во всех samples точках модели над полем вычетов. Кандидаты, кратные
    уже найденным, пропускаются.
    """
    points = [sample_covariance_mod_p(g, derive_seed(seed, 'search', s), config) for s in range(samples)]
    found: List[GraphicalConstraint] = []
    found_polys: List[Optional[Polynomial]] = []

    for gc in enumerate_candidates(g.nodes, max_nodes, max_slots, trees_only, None, config):
        if not all(vanishes_mod_p(gc, point, config.prime) for point in points):
            continue
        if constraint_fingerprint(gc, seed, config).is_zero():
            continue
        try:
            poly = constraint_polynomial(gc, config)
        except ExpansionCapError:
            poly = None
        if poly is not None and any(
            ref is not None and divide_exact(poly, ref) is not None for ref in found_polys
        ):
            continue
        logger.debug("vanishing constraint found with %d nodes", len(gc.nodes))
        found.append(gc)
        found_polys.append(poly)
        if limit is not None and len(found) >= limit:
            break

    return found
