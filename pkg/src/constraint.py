"""
Модуль графических ограничений

Графическое ограничение - неориентированный двудольный граф (обычно дерево),
узлы которого помечены непустыми подмножествами модельных переменных.
Ограничение задаёт квадратную матрицу M: строки - пары (узел из A, метка),
столбцы - пары (узел из B, метка), M[(a,v),(b,w)] = sigma_vw, если a и b
смежны, иначе 0. Ковариационная матрица удовлетворяет ограничению, если
det M в ней равен нулю.
"""
import itertools
import json
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from config import DEFAULT_CONFIG, ToolkitConfig
from errors import (
    AlgconError,
    DegenerateConstraintError,
    MissingVariableError,
    NonSquareConstraintError,
    NonTreeConstraintError,
)
from linalg import det_bareiss, leading_principal_minors
from poly import PatternMatrix, Polynomial, det_expand, fingerprint, sigma, Fingerprint

logger = logging.getLogger(__name__)

_DIGITS = re.compile(r'(\d+)')


def node_sort_key(node_id: str) -> tuple:
    """Естественный порядок идентификаторов: t2 < t10"""
    return tuple(int(part) if part.isdigit() else part for part in _DIGITS.split(node_id))


@dataclass(frozen=True)
class ConstraintNode:
    id: str
    label: FrozenSet[str]

    def __post_init__(self):
        object.__setattr__(self, 'label', frozenset(self.label))
        if not self.label:
            raise AlgconError(f"constraint node '{self.id}' has an empty label")

    @property
    def sorted_label(self) -> Tuple[str, ...]:
        return tuple(sorted(self.label))


@dataclass(frozen=True)
class GraphicalConstraint:
    """
    Двудольное ограничение: part_a задаёт строки матрицы, part_b - столбцы

    Узлы каждой доли хранятся в естественном порядке идентификаторов,
    рёбра - как пары (id из A, id из B). seeds - идентификаторы
    исходных узлов-семян, если ограничение построено алгоритмом.
    """

    part_a: Tuple[ConstraintNode, ...]
    part_b: Tuple[ConstraintNode, ...]
    edges: FrozenSet[Tuple[str, str]]
    seeds: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        part_a = tuple(sorted(self.part_a, key=lambda n: node_sort_key(n.id)))
        part_b = tuple(sorted(self.part_b, key=lambda n: node_sort_key(n.id)))
        ids_a = {n.id for n in part_a}
        ids_b = {n.id for n in part_b}
        if len(ids_a) != len(part_a) or len(ids_b) != len(part_b) or ids_a & ids_b:
            raise AlgconError("constraint node ids must be unique")

        edges = set()
        for x, y in self.edges:
            if x in ids_a and y in ids_b:
                edges.add((x, y))
            elif y in ids_a and x in ids_b:
                edges.add((y, x))
            else:
                raise AlgconError(f"edge {x}-{y} does not join part A to part B")

        for s in self.seeds:
            if s not in ids_a | ids_b:
                raise AlgconError(f"seed '{s}' is not a constraint node")

        object.__setattr__(self, 'part_a', part_a)
        object.__setattr__(self, 'part_b', part_b)
        object.__setattr__(self, 'edges', frozenset(edges))
        object.__setattr__(self, 'seeds', tuple(sorted(set(self.seeds), key=node_sort_key)))

    @property
    def row_slots(self) -> int:
        return sum(len(n.label) for n in self.part_a)

    @property
    def col_slots(self) -> int:
        return sum(len(n.label) for n in self.part_b)

    @property
    def is_square(self) -> bool:
        return self.row_slots == self.col_slots

    @property
    def dimension(self) -> int:
        return self.row_slots

    @cached_property
    def nodes(self) -> Dict[str, ConstraintNode]:
        return {n.id: n for n in self.part_a + self.part_b}

    @cached_property
    def _neighbours(self) -> Dict[str, FrozenSet[str]]:
        result = {node_id: set() for node_id in self.nodes}
        for a, b in self.edges:
            result[a].add(b)
            result[b].add(a)
        return {k: frozenset(v) for k, v in result.items()}

    def neighbours(self, node_id: str) -> FrozenSet[str]:
        return self._neighbours[node_id]

    def in_part_a(self, node_id: str) -> bool:
        return any(n.id == node_id for n in self.part_a)

    def to_networkx(self) -> nx.Graph:
        """Граф ограничения с атрибутами part и label на узлах"""
        graph = nx.Graph()
        for n in self.part_a:
            graph.add_node(n.id, part='A', label=n.label)
        for n in self.part_b:
            graph.add_node(n.id, part='B', label=n.label)
        graph.add_edges_from(self.edges)
        return graph

    def is_tree(self) -> bool:
        return nx.is_tree(self.to_networkx())

    def labels_used(self) -> List[str]:
        return sorted({v for n in self.nodes.values() for v in n.label})


def make_constraint(part_a: Iterable[Tuple[str, Iterable[str]]],
                    part_b: Iterable[Tuple[str, Iterable[str]]],
                    edges: Iterable[Tuple[str, str]],
                    seeds: Iterable[str] = ()) -> GraphicalConstraint:
    """Короткий конструктор: доли заданы парами (id, метка)"""
    return GraphicalConstraint(
        tuple(ConstraintNode(i, frozenset(lbl)) for i, lbl in part_a),
        tuple(ConstraintNode(i, frozenset(lbl)) for i, lbl in part_b),
        frozenset(tuple(e) for e in edges),
        tuple(seeds),
    )


def _require_square(gc: GraphicalConstraint):
    if not gc.is_square:
        raise NonSquareConstraintError(gc.row_slots, gc.col_slots)


def build_matrix(gc: GraphicalConstraint) -> PatternMatrix:
    """
    Матрица-шаблон ограничения

    Строки - (узел A, переменная) по id узла и имени переменной,
    столбцы - так же для B.
    """
    _require_square(gc)
    rows = tuple((n.id, v) for n in gc.part_a for v in n.sorted_label)
    cols = tuple((n.id, v) for n in gc.part_b for v in n.sorted_label)
    entries = tuple(
        tuple(sigma(v, w) if (a, b) in gc.edges else None for b, w in cols)
        for a, v in rows
    )
    return PatternMatrix(rows, cols, entries)


def constraint_polynomial(gc: GraphicalConstraint, config: ToolkitConfig = DEFAULT_CONFIG) -> Polynomial:
    """Развёрнутый определитель (в пределах expansion_cap)"""
    return det_expand(build_matrix(gc), config)


def constraint_fingerprint(gc: GraphicalConstraint, seed: int = 0,
                           config: ToolkitConfig = DEFAULT_CONFIG) -> Fingerprint:
    return fingerprint(build_matrix(gc), seed, config)


def normal_form(gc: GraphicalConstraint) -> GraphicalConstraint:
    """
    Слияние узлов одной доли с одинаковыми множествами соседей

    Узлы с пересекающимися метками не сливаются: их строки совпадают,
    и такое ограничение вырождено.
    """
    current = gc
    while True:
        merged = _merge_once(current)
        if merged is None:
            return current
        current = merged


def _merge_once(gc: GraphicalConstraint) -> Optional[GraphicalConstraint]:
    for part in (gc.part_a, gc.part_b):
        for first, second in itertools.combinations(part, 2):
            if gc.neighbours(first.id) != gc.neighbours(second.id):
                continue
            if first.label & second.label:
                continue
            keep, drop = first, second
            logger.debug("merging constraint nodes %s and %s", keep.id, drop.id)
            merged = ConstraintNode(keep.id, keep.label | drop.label)

            def replace(nodes):
                return tuple(merged if n.id == keep.id else n for n in nodes if n.id != drop.id)

            edges = frozenset(e for e in gc.edges if drop.id not in e)
            seeds = tuple(keep.id if s == drop.id else s for s in gc.seeds)
            return GraphicalConstraint(replace(gc.part_a), replace(gc.part_b), edges, seeds)
    return None


def is_normal(gc: GraphicalConstraint) -> bool:
    """Нет двух узлов одной доли с одинаковыми соседями"""
    for part in (gc.part_a, gc.part_b):
        seen = set()
        for n in part:
            nb = gc.neighbours(n.id)
            if nb in seen:
                return False
            seen.add(nb)
    return True


@dataclass(frozen=True)
class CovarianceMatrix:
    """Симметричная рациональная матрица, индексированная модельными переменными"""

    nodes: Tuple[str, ...]
    values: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.nodes)
        values = tuple(tuple(Fraction(x) for x in row) for row in self.values)
        if len(values) != n or any(len(row) != n for row in values):
            raise AlgconError(f"covariance matrix must be {n}x{n}")
        for i in range(n):
            if values[i][i] <= 0:
                raise AlgconError(f"diagonal entry for '{self.nodes[i]}' must be positive")
            for j in range(i):
                if values[i][j] != values[j][i]:
                    raise AlgconError(
                        f"covariance matrix is not symmetric at ({self.nodes[i]}, {self.nodes[j]})"
                    )
        object.__setattr__(self, 'nodes', tuple(self.nodes))
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_entries(cls, nodes: Sequence[str], entries: Mapping[Tuple[str, str], object],
                     default=0) -> "CovarianceMatrix":
        """Построение по словарю {(v, w): значение}; недостающие - default"""
        lookup = {sigma(v, w): Fraction(x) for (v, w), x in entries.items()}
        rows = [[lookup.get(sigma(v, w), Fraction(default)) for w in nodes] for v in nodes]
        return cls(tuple(nodes), tuple(tuple(r) for r in rows))

    @cached_property
    def _index(self) -> Dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    def __getitem__(self, key: Tuple[str, str]) -> Fraction:
        v, w = key
        if v not in self._index or w not in self._index:
            raise MissingVariableError(f"covariance matrix has no entry for sigma_{v}{w}")
        return self.values[self._index[v]][self._index[w]]

    def as_mapping(self) -> Dict[Tuple[str, str], Fraction]:
        return {sigma(v, w): self[v, w] for v in self.nodes for w in self.nodes}

    def is_positive_definite(self) -> bool:
        return all(m > 0 for m in leading_principal_minors(self.values))


def read_covariance(text: str) -> CovarianceMatrix:
    """
    Чтение файла ковариации

    Первая строка - имена переменных, далее n строк рациональных
    значений `p/q`; `#` начинает комментарий.
    """
    lines = [raw.split('#', 1)[0].split() for raw in text.splitlines()]
    lines = [tokens for tokens in lines if tokens]
    if not lines:
        raise AlgconError("empty covariance file")
    nodes = lines[0]
    try:
        rows = [[Fraction(tok) for tok in tokens] for tokens in lines[1:]]
    except ValueError as e:
        raise AlgconError(f"malformed covariance value: {e}") from e
    return CovarianceMatrix(tuple(nodes), tuple(tuple(r) for r in rows))


def write_covariance(sigma_matrix: CovarianceMatrix) -> str:
    lines = [" ".join(sigma_matrix.nodes)]
    for row in sigma_matrix.values:
        lines.append(" ".join(str(x) for x in row))
    return "\n".join(lines) + "\n"


def satisfies(gc: GraphicalConstraint, sigma_matrix: CovarianceMatrix) -> bool:
    """Точная проверка det M(Sigma) == 0 (без допусков)"""
    m = build_matrix(gc)
    values = {var: sigma_matrix[var] for var in m.variables()}
    return det_bareiss(m.numeric(values, Fraction(0))) == 0


def _component_surplus(gc: GraphicalConstraint, edge: Tuple[str, str]) -> Tuple[int, int]:
    graph = gc.to_networkx()
    a, b = edge
    graph.remove_edge(a, b)
    component = nx.node_connected_component(graph, a)
    rows = sum(len(gc.nodes[x].label) for x in component if graph.nodes[x]['part'] == 'A')
    cols = sum(len(gc.nodes[x].label) for x in component if graph.nodes[x]['part'] == 'B')
    return rows, cols


def edge_weight(gc: GraphicalConstraint, edge: Tuple[str, str]) -> int:
    """
    Вес ребра дерева: число элементов блока (a, b) матрицы в каждом
    члене определителя

    После удаления ребра берётся компонента конца из доли A; вес равен
    (слоты строк) - (слоты столбцов) этой компоненты.

    Raises:
        NonTreeConstraintError: ограничение не дерево
        DegenerateConstraintError: определитель тождественно равен нулю
    """
    _require_square(gc)
    if not gc.is_tree():
        raise NonTreeConstraintError("edge weights are defined only for tree-shaped constraints")

    x, y = edge
    if (x, y) not in gc.edges:
        x, y = y, x
    if (x, y) not in gc.edges:
        raise AlgconError(f"no edge {edge[0]}-{edge[1]} in constraint")

    rows, cols = _component_surplus(gc, (x, y))
    weight = rows - cols
    bound = min(len(gc.nodes[x].label), len(gc.nodes[y].label))
    if weight < 0 or weight > bound:
        raise DegenerateConstraintError(
            f"edge {x}-{y} needs {weight} entries from a block of rank at most {bound}: "
            f"determinant is identically zero"
        )
    return weight


def is_degenerate(gc: GraphicalConstraint, config: ToolkitConfig = DEFAULT_CONFIG) -> bool:
    """Определитель тождественно равен нулю (проверка по отпечатку)"""
    _require_square(gc)
    if gc.is_tree():
        try:
            for e in sorted(gc.edges):
                edge_weight(gc, e)
        except DegenerateConstraintError:
            return True
    return constraint_fingerprint(gc, 0, config).is_zero()


def components(gc: GraphicalConstraint) -> List[GraphicalConstraint]:
    """Связные компоненты как отдельные ограничения (по наименьшему id)"""
    graph = gc.to_networkx()
    result = []
    for comp in nx.connected_components(graph):
        result.append(GraphicalConstraint(
            tuple(n for n in gc.part_a if n.id in comp),
            tuple(n for n in gc.part_b if n.id in comp),
            frozenset(e for e in gc.edges if e[0] in comp),
            tuple(s for s in gc.seeds if s in comp),
        ))
    return sorted(result, key=lambda c: min(node_sort_key(i) for i in c.nodes))


def relabel_variables(gc: GraphicalConstraint, mapping: Mapping[str, str]) -> GraphicalConstraint:
    def rename(nodes):
        return tuple(ConstraintNode(n.id, frozenset(mapping.get(v, v) for v in n.label)) for n in nodes)

    return GraphicalConstraint(rename(gc.part_a), rename(gc.part_b), gc.edges, gc.seeds)


def canonical_key(gc: GraphicalConstraint) -> tuple:
    """
    Канонический ключ с точностью до переименования узлов и обмена долей

    Перебираются перестановки внутри групп узлов с одинаковыми метками.
    """
    return min(_oriented_key(gc.part_a, gc.part_b, gc.edges),
               _oriented_key(gc.part_b, gc.part_a, {(b, a) for a, b in gc.edges}))


def _group_orders(part: Sequence[ConstraintNode]) -> Iterable[Tuple[ConstraintNode, ...]]:
    ordered = sorted(part, key=lambda n: n.sorted_label)
    groups = [list(g) for _, g in itertools.groupby(ordered, key=lambda n: n.sorted_label)]
    for choice in itertools.product(*(itertools.permutations(g) for g in groups)):
        yield tuple(n for group in choice for n in group)


def _oriented_key(rows: Sequence[ConstraintNode], cols: Sequence[ConstraintNode], edges) -> tuple:
    row_labels = tuple(sorted(n.sorted_label for n in rows))
    col_labels = tuple(sorted(n.sorted_label for n in cols))
    best = None
    for row_order in _group_orders(rows):
        row_pos = {n.id: i for i, n in enumerate(row_order)}
        for col_order in _group_orders(cols):
            col_pos = {n.id: j for j, n in enumerate(col_order)}
            key = tuple(sorted((row_pos[a], col_pos[b]) for a, b in edges))
            if best is None or key < best:
                best = key
    return (row_labels, col_labels, best)


def is_isomorphic(gc1: GraphicalConstraint, gc2: GraphicalConstraint) -> bool:
    """Изоморфизм с сохранением меток (VF2), с учётом обмена долей"""
    g1 = gc1.to_networkx()
    g2 = gc2.to_networkx()

    def same(x, y):
        return x['label'] == y['label'] and x['part'] == y['part']

    def swapped(x, y):
        return x['label'] == y['label'] and x['part'] != y['part']

    return nx.is_isomorphic(g1, g2, node_match=same) or nx.is_isomorphic(g1, g2, node_match=swapped)


def constraint_to_dict(gc: GraphicalConstraint) -> dict:
    data = {
        'partA': [{'id': n.id, 'label': list(n.sorted_label)} for n in gc.part_a],
        'partB': [{'id': n.id, 'label': list(n.sorted_label)} for n in gc.part_b],
        'edges': [list(e) for e in sorted(gc.edges, key=lambda e: (node_sort_key(e[0]), node_sort_key(e[1])))],
    }
    if gc.seeds:
        data['seeds'] = list(gc.seeds)
    return data


def constraint_from_dict(data: dict) -> GraphicalConstraint:
    try:
        return make_constraint(
            [(n['id'], n['label']) for n in data['partA']],
            [(n['id'], n['label']) for n in data['partB']],
            [tuple(e) for e in data['edges']],
            data.get('seeds', ()),
        )
    except (KeyError, TypeError) as e:
        raise AlgconError(f"malformed constraint JSON: {e}") from e


def constraint_to_json(gc: GraphicalConstraint) -> str:
    return json.dumps(constraint_to_dict(gc), ensure_ascii=False)


def constraint_from_json(text: str) -> GraphicalConstraint:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise AlgconError(f"malformed constraint JSON: {e}") from e
    return constraint_from_dict(data)


def render_text(gc: GraphicalConstraint) -> str:
    """
    Зигзаг: узлы A в верхней строке, узлы B в нижней, в порядке обхода
    в глубину; рёбра между соседними по обходу узлами рисуются косыми
    чертами, остальные перечислены ниже.
    """
    graph = gc.to_networkx()
    order: List[str] = []
    roots = list(gc.seeds) + [n.id for n in gc.part_a + gc.part_b]
    for root in roots:
        if root not in order:
            order.extend(v for v in nx.dfs_preorder_nodes(graph, root) if v not in order)

    cells = []
    for node_id in order:
        label = "".join(gc.nodes[node_id].sorted_label)
        mark = "*" if node_id in gc.seeds else ""
        cells.append((node_id, f"{mark}{label}"))

    width = max((len(text) for _, text in cells), default=1) + 2
    top, middle, bottom = [], [], []
    drawn = set()
    for i, (node_id, text) in enumerate(cells):
        upper = graph.nodes[node_id]['part'] == 'A'
        top.append(text.center(width) if upper else " " * width)
        bottom.append(" " * width if upper else text.center(width))
        connector = " " * width
        if i + 1 < len(cells):
            nxt = cells[i + 1][0]
            if graph.has_edge(node_id, nxt):
                connector = ("\\" if upper else "/").center(width)
                drawn.add(frozenset((node_id, nxt)))
        middle.append(connector)

    lines = ["".join(top).rstrip(), "".join(middle).rstrip(), "".join(bottom).rstrip()]
    rest = [f"{a}-{b}" for a, b in sorted(gc.edges) if frozenset((a, b)) not in drawn]
    if rest:
        lines.append("also: " + ", ".join(rest))
    return "\n".join(line for line in lines if line) + "\n"
