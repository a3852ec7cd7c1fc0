"""
Построение графических ограничений по HTC-идентифицирующему семейству

Два узла-семени {v} и {w} соединяются ребром и раскрываются: метка {x}
заменяется на {x} + pa(x), к узлу присоединяются листья {y} для y из Y_x,
и листья с y из htr(x) раскрываются рекурсивно. В конце ограничение
приводится к нормальной форме.
"""
import logging
from typing import Dict, List, Optional, Set, Tuple

from constraint import ConstraintNode, GraphicalConstraint, normal_form
from errors import FamilyError, IdentificationRecursionError, TrivialFactorSignal
from graph import MixedGraph
from htc import IdentifyingFamily, constraint_pairs, validate_family

logger = logging.getLogger(__name__)


class _TreeBuilder:
    """Растущее дерево ограничения с раскрытием узлов"""

    def __init__(self, g: MixedGraph, fam: IdentifyingFamily):
        self.g = g
        self.fam = fam
        self.position = {v: i for i, v in enumerate(fam.order)}
        self.labels: Dict[str, Set[str]] = {}
        self.in_a: Dict[str, bool] = {}
        self.edges: List[Tuple[str, str]] = []
        self.trace: List[str] = []
        self._counter = 0

    def add_node(self, label: str, part_a: bool, parent: Optional[str] = None) -> str:
        self._counter += 1
        node_id = f"t{self._counter}"
        self.labels[node_id] = {label}
        self.in_a[node_id] = part_a
        if parent is not None:
            self.edges.append((parent, node_id))
        return node_id

    def expand(self, node_id: str, var: str, bound: Optional[int] = None):
        position = self.position[var]
        if bound is not None and position >= bound:
            logger.warning("identification guard tripped at node %s (label %s)", node_id, var)
            raise IdentificationRecursionError(
                f"expanding '{var}' does not follow the identification order {list(self.fam.order)}"
            )

        parents = self.g.parents(var)
        self.labels[node_id] = {var} | set(parents)
        if parents:
            self.trace.append(var)
        logger.debug("expand %s: label %s, Y=%s", node_id, sorted(self.labels[node_id]),
                     sorted(self.fam.sets[var]))

        htr = self.g.half_trek_reachable(var)
        children = [(y, self.add_node(y, not self.in_a[node_id], node_id)) for y in sorted(self.fam.sets[var])]
        for y, child in children:
            if y in htr:
                self.expand(child, y, position)

    def build(self, seeds: Tuple[str, ...]) -> GraphicalConstraint:
        part_a = tuple(ConstraintNode(i, frozenset(lbl)) for i, lbl in self.labels.items() if self.in_a[i])
        part_b = tuple(ConstraintNode(i, frozenset(lbl)) for i, lbl in self.labels.items() if not self.in_a[i])
        return normal_form(GraphicalConstraint(part_a, part_b, frozenset(self.edges), seeds))


def _check_family(g: MixedGraph, fam: IdentifyingFamily):
    if not validate_family(g, fam):
        raise FamilyError("family is not HTC-identifying for this graph")


def _construct(g: MixedGraph, fam: IdentifyingFamily, pair: Tuple[str, str]) -> Tuple[GraphicalConstraint, List[str]]:
    v, w = sorted(pair)
    if (v, w) not in constraint_pairs(g, fam):
        raise FamilyError(f"pair {{{v},{w}}} does not yield a rational constraint")

    builder = _TreeBuilder(g, fam)
    t1 = builder.add_node(v, True)
    t2 = builder.add_node(w, False, t1)
    builder.expand(t1, v)
    builder.expand(t2, w)
    return builder.build((t1, t2)), builder.trace


def derive_constraint(g: MixedGraph, fam: IdentifyingFamily, pair: Tuple[str, str]) -> GraphicalConstraint:
    """
    Графическое ограничение для пары {v, w}

    Args:
        g: HTC-идентифицируемый граф
        fam: корректное семейство для g
        pair: пара из constraint_pairs(g, fam)

    Returns:
        Ограничение в нормальной форме; семя меньшего узла пары - в доле A
    """
    _check_family(g, fam)
    return _construct(g, fam, pair)[0]


def expansion_trace(g: MixedGraph, fam: IdentifyingFamily, pair: Tuple[str, str]) -> List[str]:
    """Переменные узлов с непустым pa, раскрытых при построении (в порядке раскрытия)"""
    _check_family(g, fam)
    return _construct(g, fam, pair)[1]


def derive_all(g: MixedGraph, fam: IdentifyingFamily) -> List[GraphicalConstraint]:
    _check_family(g, fam)
    result = []
    for pair in constraint_pairs(g, fam):
        gc, _ = _construct(g, fam, pair)
        result.append(gc)
    logger.info("derived %d constraints for %s", len(result), g)
    return result


def a_minor_constraint(g: MixedGraph, fam: IdentifyingFamily, v: str) -> GraphicalConstraint:
    """
    Ограничение, представляющее |A^(v)|: один узел {v} раскрывается,
    затем v удаляется из его метки

    Raises:
        TrivialFactorSignal: pa(v) пусто, |A^(v)| = 1
    """
    _check_family(g, fam)
    if not g.parents(v):
        raise TrivialFactorSignal(f"pa({v}) is empty: |A^({v})| is the empty determinant 1")

    builder = _TreeBuilder(g, fam)
    root = builder.add_node(v, True)
    builder.expand(root, v)
    builder.labels[root].discard(v)
    return builder.build((root,))


def a_minor_constraints(g: MixedGraph, fam: IdentifyingFamily,
                        nodes: List[str]) -> List[GraphicalConstraint]:
    """Ограничения |A^(x)| для списка узлов (узлы без родителей пропускаются)"""
    return [a_minor_constraint(g, fam, x) for x in nodes if g.parents(x)]
