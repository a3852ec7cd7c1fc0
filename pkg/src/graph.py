"""
Модуль смешанных графов линейных структурных моделей (LSEM)

Смешанный граф G = (V, D, B): узлы, направленные рёбра (коэффициенты
Lambda) и двунаправленные рёбра (корреляции шумов Omega).
"""
import itertools
import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from string import ascii_lowercase
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

import networkx as nx

from config import DEFAULT_CONFIG, ToolkitConfig
from errors import GraphParseError, UnknownNodeError, UnsupportedSizeError

logger = logging.getLogger(__name__)

Edge = Tuple[str, str]

# состояния пары узлов (i < j): f = i -> j, r = j -> i, b = i <-> j
_PAIR_STATES = [(), ('f',), ('r',), ('b',), ('f', 'r'), ('f', 'b'), ('r', 'b'), ('f', 'r', 'b')]


@dataclass(frozen=True)
class MixedGraph:
    """Смешанный граф; после создания неизменяем"""

    nodes: Tuple[str, ...]
    directed: FrozenSet[Edge]
    bidirected: FrozenSet[Edge]

    def __post_init__(self):
        nodes = tuple(sorted(set(self.nodes)))
        node_set = set(nodes)
        directed = frozenset(tuple(e) for e in self.directed)
        bidirected = frozenset(tuple(sorted(e)) for e in self.bidirected)

        for tail, head in directed | bidirected:
            if tail == head:
                raise GraphParseError(f"self-loop at node '{tail}' is not allowed")
            for node in (tail, head):
                if node not in node_set:
                    raise UnknownNodeError(f"edge endpoint '{node}' is not a node")

        object.__setattr__(self, 'nodes', nodes)
        object.__setattr__(self, 'directed', directed)
        object.__setattr__(self, 'bidirected', bidirected)

    @classmethod
    def from_edges(cls, nodes: Iterable[str], directed: Iterable[Edge] = (),
                   bidirected: Iterable[Edge] = ()) -> "MixedGraph":
        return cls(tuple(nodes), frozenset(directed), frozenset(bidirected))

    @property
    def edge_count(self) -> int:
        return len(self.directed) + len(self.bidirected)

    @cached_property
    def index(self) -> Dict[str, int]:
        """Плотные индексы узлов в порядке сортировки имён"""
        return {v: i for i, v in enumerate(self.nodes)}

    @cached_property
    def _parents(self) -> Dict[str, FrozenSet[str]]:
        result = {v: set() for v in self.nodes}
        for tail, head in self.directed:
            result[head].add(tail)
        return {v: frozenset(s) for v, s in result.items()}

    @cached_property
    def _children(self) -> Dict[str, FrozenSet[str]]:
        result = {v: set() for v in self.nodes}
        for tail, head in self.directed:
            result[tail].add(head)
        return {v: frozenset(s) for v, s in result.items()}

    @cached_property
    def _siblings(self) -> Dict[str, FrozenSet[str]]:
        result = {v: set() for v in self.nodes}
        for a, b in self.bidirected:
            result[a].add(b)
            result[b].add(a)
        return {v: frozenset(s) for v, s in result.items()}

    @cached_property
    def _htr(self) -> Dict[str, FrozenSet[str]]:
        return {v: self._half_trek_bfs(v) for v in self.nodes}

    def _check(self, v: str):
        if v not in self.index:
            raise UnknownNodeError(f"unknown node '{v}'")

    def parents(self, v: str) -> FrozenSet[str]:
        """pa(v) = {w : w -> v в D}"""
        self._check(v)
        return self._parents[v]

    def children(self, v: str) -> FrozenSet[str]:
        self._check(v)
        return self._children[v]

    def siblings(self, v: str) -> FrozenSet[str]:
        """Соседи v по двунаправленным рёбрам"""
        self._check(v)
        return self._siblings[v]

    def half_trek_reachable(self, v: str) -> FrozenSet[str]:
        """
        htr(v): узлы, достижимые из v по полутреку

        Полутрек - направленный путь, первое ребро которого может быть
        двунаправленным. Сам v входит в htr(v) только если в него ведёт
        непустой полутрек (через цикл).
        """
        self._check(v)
        return self._htr[v]

    def _half_trek_bfs(self, v: str) -> FrozenSet[str]:
        # состояние (узел, первый шаг уже сделан); до первого шага - только v
        reached: Set[str] = set()
        queue = deque()
        for w in self._siblings[v] | self._children[v]:
            if w not in reached:
                reached.add(w)
                queue.append(w)
        while queue:
            u = queue.popleft()
            for w in self._children[u]:
                if w not in reached:
                    reached.add(w)
                    queue.append(w)
        return frozenset(reached)

    def to_digraph(self) -> nx.DiGraph:
        """Направленная часть графа в виде networkx.DiGraph"""
        digraph = nx.DiGraph()
        digraph.add_nodes_from(self.nodes)
        digraph.add_edges_from(self.directed)
        return digraph

    def ancestors(self, v: str) -> FrozenSet[str]:
        """Строгие предки v по направленным рёбрам"""
        self._check(v)
        return frozenset(nx.ancestors(self.to_digraph(), v))

    def is_acyclic(self) -> bool:
        return nx.is_directed_acyclic_graph(self.to_digraph())

    def is_bow_free(self) -> bool:
        """Нет пары узлов с направленным и двунаправленным ребром одновременно"""
        return not any(tuple(sorted(e)) in self.bidirected for e in self.directed)

    def is_ancestral(self) -> bool:
        """
        Предковый граф: ацикличен, pa(v) и htr(v) не пересекаются, и нет
        ребра v <-> w, где v - предок w
        """
        if not self.is_acyclic():
            return False
        digraph = self.to_digraph()
        for a, b in self.bidirected:
            if a in nx.ancestors(digraph, b) or b in nx.ancestors(digraph, a):
                return False
        return all(not (self._parents[v] & self._htr[v]) for v in self.nodes)

    def topological_order(self) -> List[str]:
        """Топологический порядок (лексикографически наименьший)"""
        return list(nx.lexicographical_topological_sort(self.to_digraph()))

    def __str__(self) -> str:
        return serialize_graph(self).strip().replace('\n', '; ')


def parse_graph(text: str) -> MixedGraph:
    """
    Разбор текстового файла графа

    Формат: строка `nodes a b c` (первая), затем строки `dir t h` и `bi a b`;
    `#` начинает комментарий.

    Args:
        text: содержимое файла

    Returns:
        Смешанный граф
    """
    nodes: Optional[List[str]] = None
    directed = set()
    bidirected = set()

    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0]

        if nodes is None:
            if keyword != 'nodes' or len(tokens) < 2:
                raise GraphParseError("first line must be 'nodes <id> ...'", number)
            if len(set(tokens[1:])) != len(tokens) - 1:
                raise GraphParseError("duplicate node identifier", number)
            nodes = tokens[1:]
            continue

        if keyword not in ('dir', 'bi') or len(tokens) != 3:
            raise GraphParseError(f"malformed line '{line}'", number)
        a, b = tokens[1], tokens[2]
        for node in (a, b):
            if node not in nodes:
                raise GraphParseError(f"unknown node '{node}'", number)
        if a == b:
            raise GraphParseError(f"self-loop at node '{a}' is not allowed", number)

        if keyword == 'dir':
            directed.add((a, b))
        else:
            bidirected.add(tuple(sorted((a, b))))

    if nodes is None:
        raise GraphParseError("missing 'nodes' line")

    return MixedGraph.from_edges(nodes, directed, bidirected)


def serialize_graph(g: MixedGraph) -> str:
    """Обратное к parse_graph: узлы, затем dir и bi рёбра по порядку"""
    lines = ["nodes " + " ".join(g.nodes)]
    lines.extend(f"dir {t} {h}" for t, h in sorted(g.directed))
    lines.extend(f"bi {a} {b}" for a, b in sorted(g.bidirected))
    return "\n".join(lines) + "\n"


def default_node_names(n: int) -> List[str]:
    """Имена a, b, c, ... (или v0, v1, ... для больших n)"""
    if n <= len(ascii_lowercase):
        return list(ascii_lowercase[:n])
    width = len(str(n - 1))
    return [f"v{i:0{width}d}" for i in range(n)]


def relabel(g: MixedGraph, mapping: Dict[str, str]) -> MixedGraph:
    """Переименование узлов (mapping должен быть биекцией на новые имена)"""
    return MixedGraph.from_edges(
        [mapping[v] for v in g.nodes],
        [(mapping[t], mapping[h]) for t, h in g.directed],
        [(mapping[a], mapping[b]) for a, b in g.bidirected],
    )


def enumerate_graphs(n: int, m: int, allow_bows: bool = True, allow_cycles: bool = True,
                     start: int = 0, stop: Optional[int] = None) -> Iterator[MixedGraph]:
    """
    Перебор всех помеченных смешанных графов с n узлами и m рёбрами

    Args:
        n: число узлов
        m: число рёбер |D| + |B|
        allow_bows: разрешены ли "луки"
        allow_cycles: разрешены ли направленные циклы
        start, stop: диапазон индексов в детерминированном потоке (шардирование)

    Returns:
        Итератор графов, каждый помеченный граф ровно один раз
    """
    names = default_node_names(n)
    pairs = list(itertools.combinations(range(n), 2))
    states = [s for s in _PAIR_STATES
              if (allow_bows or not ('b' in s and len(s) > 1))
              and (allow_cycles or not ('f' in s and 'r' in s))]
    max_per_pair = max(len(s) for s in states)

    def assign(position: int, remaining: int, chosen: list) -> Iterator[list]:
        if position == len(pairs):
            if remaining == 0:
                yield chosen
            return
        if remaining > max_per_pair * (len(pairs) - position):
            return
        for state in states:
            if len(state) <= remaining:
                chosen.append(state)
                yield from assign(position + 1, remaining - len(state), chosen)
                chosen.pop()

    def build(chosen: list) -> MixedGraph:
        directed = []
        bidirected = []
        for (i, j), state in zip(pairs, chosen):
            if 'f' in state:
                directed.append((names[i], names[j]))
            if 'r' in state:
                directed.append((names[j], names[i]))
            if 'b' in state:
                bidirected.append((names[i], names[j]))
        return MixedGraph.from_edges(names, directed, bidirected)

    def stream() -> Iterator[MixedGraph]:
        for chosen in assign(0, m, []):
            g = build(chosen)
            if allow_cycles or g.is_acyclic():
                yield g

    return itertools.islice(stream(), start, stop)


def canonical_form(g: MixedGraph, config: ToolkitConfig = DEFAULT_CONFIG) -> str:
    """
    Каноническая строка графа: минимум сериализации по всем n! перестановкам

    Два графа получают одинаковую строку тогда и только тогда, когда
    они изоморфны (D сохраняется как упорядоченные пары, B - как неупорядоченные).
    """
    n = len(g.nodes)
    if n > config.permutation_budget:
        raise UnsupportedSizeError(
            f"canonical_form supports at most {config.permutation_budget} nodes, got {n}"
        )

    idx = g.index
    directed = [(idx[t], idx[h]) for t, h in g.directed]
    bidirected = [(idx[a], idx[b]) for a, b in g.bidirected]

    best = None
    for perm in itertools.permutations(range(n)):
        key = (
            tuple(sorted((perm[t], perm[h]) for t, h in directed)),
            tuple(sorted(tuple(sorted((perm[a], perm[b]))) for a, b in bidirected)),
        )
        if best is None or key < best:
            best = key

    dir_part = ",".join(f"{t}>{h}" for t, h in best[0])
    bi_part = ",".join(f"{a}-{b}" for a, b in best[1])
    return f"n={n};d={dir_part};b={bi_part}"
