"""
Модуль критерия полутреков (HTC)

Поиск семейств HTC-идентифицирующих множеств Y = (Y_v)_v с порядком
идентификации, их проверка и список пар v, w, дающих рациональные
ограничения.
"""
import itertools
import json
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

import networkx as nx
from networkx.algorithms.flow import maximum_flow_value

from config import DEFAULT_CONFIG, ToolkitConfig
from errors import FamilyError
from graph import MixedGraph

logger = logging.getLogger(__name__)

_SOURCE = ('source',)
_SINK = ('sink',)


@dataclass(frozen=True)
class IdentifyingFamily:
    """Семейство Y_v и порядок, в котором идентифицируются столбцы Lambda"""

    sets: Dict[str, FrozenSet[str]]
    order: Tuple[str, ...]

    def key(self) -> tuple:
        return (tuple(sorted((v, tuple(sorted(ys))) for v, ys in self.sets.items())), self.order)

    def to_dict(self) -> dict:
        return {
            'order': list(self.order),
            'sets': {v: sorted(self.sets[v]) for v in sorted(self.sets)},
        }


def family_to_json(fam: IdentifyingFamily) -> str:
    return json.dumps(fam.to_dict(), ensure_ascii=False)


def family_from_json(text: str) -> IdentifyingFamily:
    """Чтение семейства из JSON `{"order": [...], "sets": {...}}`"""
    try:
        data = json.loads(text)
        sets = {v: frozenset(ys) for v, ys in data['sets'].items()}
        order = tuple(data['order'])
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise FamilyError(f"malformed family JSON: {e}") from e
    return IdentifyingFamily(sets, order)


def _flow_network(g: MixedGraph, sources: Iterable[str], targets: Iterable[str]) -> nx.DiGraph:
    # каждый узел расщеплён на левую (L) и правую (R) копию с пропускной способностью 1
    net = nx.DiGraph()
    for u in g.nodes:
        net.add_edge(('L', u, 'in'), ('L', u, 'out'), capacity=1)
        net.add_edge(('R', u, 'in'), ('R', u, 'out'), capacity=1)
        net.add_edge(('L', u, 'out'), ('R', u, 'in'), capacity=1)
    for a, b in g.bidirected:
        net.add_edge(('L', a, 'out'), ('R', b, 'in'), capacity=1)
        net.add_edge(('L', b, 'out'), ('R', a, 'in'), capacity=1)
    for tail, head in g.directed:
        net.add_edge(('R', tail, 'out'), ('R', head, 'in'), capacity=1)
    for s in sources:
        net.add_edge(_SOURCE, ('L', s, 'in'), capacity=1)
    for p in targets:
        net.add_edge(('R', p, 'out'), _SINK, capacity=1)
    return net


def half_trek_system_exists(g: MixedGraph, sources: Iterable[str], targets: Iterable[str]) -> bool:
    """
    Существует ли система полутреков из sources в targets без
    пересечений по сторонам (проверка через максимальный поток)
    """
    sources = sorted(set(sources))
    targets = sorted(set(targets))
    if not targets:
        return True
    if len(sources) < len(targets):
        return False
    net = _flow_network(g, sources, targets)
    return maximum_flow_value(net, _SOURCE, _SINK) == len(targets)


def _allowed_nodes(g: MixedGraph, v: str, solved: Set[str]) -> List[str]:
    forbidden = {v} | set(g.siblings(v))
    htr = g.half_trek_reachable(v)
    return [w for w in g.nodes if w not in forbidden and (w in solved or w not in htr)]


def _admissible_sets(g: MixedGraph, v: str, allowed: List[str]) -> Iterator[FrozenSet[str]]:
    """Допустимые Y_v из allowed: сначала pa(v), затем лексикографически"""
    parents = g.parents(v)
    k = len(parents)
    if k == 0:
        yield frozenset()
        return
    if len(allowed) < k or not half_trek_system_exists(g, allowed, parents):
        return

    allowed_set = set(allowed)
    if parents <= allowed_set:
        yield frozenset(parents)
    for combo in itertools.combinations(allowed, k):
        candidate = frozenset(combo)
        if candidate == parents:
            continue
        if half_trek_system_exists(g, candidate, parents):
            yield candidate


def find_identifying_family(g: MixedGraph) -> Optional[IdentifyingFamily]:
    """
    Поиск HTC-идентифицирующего семейства

    Узлы решаются раундами: в каждом раунде берутся все узлы, для которых
    уже есть допустимое Y_v (узлы из htr(v) должны быть решены раньше).
    Затем каждое Y_v по возможности заменяется на pa(v), если семейство
    остаётся корректным. Порядок - жадный: берётся первый по имени узел,
    все htr-зависимости которого уже идентифицированы.

    Args:
        g: смешанный граф

    Returns:
        Семейство или None, если граф не HTC-идентифицируем
    """
    sets: Dict[str, FrozenSet[str]] = {}
    solved: Set[str] = set()
    unsolved = set(g.nodes)

    while unsolved:
        newly = []
        for v in sorted(unsolved):
            choice = next(_admissible_sets(g, v, _allowed_nodes(g, v, solved)), None)
            if choice is not None:
                newly.append((v, choice))
        if not newly:
            logger.debug("HTC stuck with unsolved nodes %s", sorted(unsolved))
            return None
        for v, choice in newly:
            sets[v] = choice
            solved.add(v)
            unsolved.discard(v)

    for v in g.nodes:
        parents = g.parents(v)
        if sets[v] == parents or parents & ({v} | g.siblings(v)):
            continue
        trial = dict(sets)
        trial[v] = frozenset(parents)
        if _dependency_order(g, trial) is not None:
            sets = trial

    order = _dependency_order(g, sets)
    return IdentifyingFamily(sets, order)


def is_htc_identifiable(g: MixedGraph) -> bool:
    return find_identifying_family(g) is not None


def validate_family(g: MixedGraph, fam: IdentifyingFamily) -> bool:
    """
    Проверка всех условий HTC для семейства

    Returns:
        True, если размеры, запреты, порядок и системы полутреков в порядке
    """
    if set(fam.sets) != set(g.nodes):
        raise FamilyError(
            f"family keys {sorted(fam.sets)} do not match graph nodes {list(g.nodes)}"
        )
    if sorted(fam.order) != list(g.nodes):
        return False

    position = {v: i for i, v in enumerate(fam.order)}
    for v in g.nodes:
        ys = fam.sets[v]
        parents = g.parents(v)
        if len(ys) != len(parents):
            return False
        if ys & ({v} | g.siblings(v)):
            return False
        if any(position[y] >= position[v] for y in ys & g.half_trek_reachable(v)):
            return False
        if not half_trek_system_exists(g, ys, parents):
            return False
    return True


def constraint_pairs(g: MixedGraph, fam: IdentifyingFamily) -> List[Tuple[str, str]]:
    """Пары v < w без v <-> w, с v не из Y_w и w не из Y_v"""
    pairs = []
    for v, w in itertools.combinations(g.nodes, 2):
        if (v, w) in g.bidirected:
            continue
        if v in fam.sets[w] or w in fam.sets[v]:
            continue
        pairs.append((v, w))
    return pairs


def _dependency_order(g: MixedGraph, sets: Dict[str, FrozenSet[str]]) -> Optional[Tuple[str, ...]]:
    deps = nx.DiGraph()
    deps.add_nodes_from(g.nodes)
    for v in g.nodes:
        for y in sets[v] & g.half_trek_reachable(v):
            deps.add_edge(y, v)
    if not nx.is_directed_acyclic_graph(deps):
        return None
    return tuple(nx.lexicographical_topological_sort(deps))


def enumerate_identifying_families(g: MixedGraph, limit: int = 1,
                                   config: ToolkitConfig = DEFAULT_CONFIG) -> Iterator[IdentifyingFamily]:
    """
    Перебор различных HTC-идентифицирующих семейств

    Args:
        g: смешанный граф
        limit: максимальное число семейств
        config: family_candidate_cap ограничивает кандидатов на узел

    Returns:
        Итератор корректных семейств в детерминированном порядке
    """
    if limit < 1:
        raise FamilyError("limit must be at least 1")

    candidates = []
    for v in g.nodes:
        allowed = [w for w in g.nodes if w != v and w not in g.siblings(v)]
        options = list(itertools.islice(_admissible_sets(g, v, allowed), config.family_candidate_cap))
        if not options:
            return
        candidates.append(options)

    emitted = 0
    for combo in itertools.product(*candidates):
        sets = dict(zip(g.nodes, combo))
        order = _dependency_order(g, sets)
        if order is None:
            continue
        yield IdentifyingFamily(sets, order)
        emitted += 1
        if emitted >= limit:
            return
