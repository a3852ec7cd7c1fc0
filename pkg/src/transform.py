"""
Преобразование графических ограничений-деревьев

Тройка (central, left, right): left и right - соседи central из одной доли.
X = left & right, A = left - right, B = right - left. Условия: каждое
поддерево right (не через central) имеет копию у left, вес ребра
central-left равен |A| и A непусто. Результат: ребро central-left
удаляется, метка left становится X, метка right - X + A + B. Определитель
сохраняется с точностью до знака и распадается в произведение
определителей компонент.
"""
import logging
from collections import Counter
from typing import List, Optional, Tuple

from classify import peel_principal_minors
from config import DEFAULT_CONFIG, ToolkitConfig
from constraint import (
    ConstraintNode,
    GraphicalConstraint,
    canonical_key,
    components,
    constraint_fingerprint,
    constraint_polynomial,
    edge_weight,
    is_degenerate,
    node_sort_key,
    normal_form,
)
from errors import (
    DegenerateConstraintError,
    ExpansionCapError,
    InvalidTransformationError,
    NonTreeConstraintError,
)
from graph import MixedGraph
from oracle import derive_seed, sample_covariance_mod_p, vanishes_mod_p
from poly import equal_up_to_sign

logger = logging.getLogger(__name__)

Triple = Tuple[str, str, str]

_CHECK_SEEDS = (0, 1)
_CORE_POINTS = 3
_CORE_HITS = 2


def _subtree_code(gc: GraphicalConstraint, node: str, parent: str) -> str:
    # каноническая запись помеченного корневого поддерева
    children = sorted(_subtree_code(gc, c, node) for c in gc.neighbours(node) if c != parent)
    return "(" + ",".join(gc.nodes[node].sorted_label) + "|" + "".join(children) + ")"


def _hanging_subtrees(gc: GraphicalConstraint, node: str, central: str) -> Counter:
    return Counter(_subtree_code(gc, c, node) for c in gc.neighbours(node) if c != central)


def _require_tree(gc: GraphicalConstraint, config: ToolkitConfig):
    if not gc.is_tree():
        raise NonTreeConstraintError("transformations apply only to tree-shaped constraints")
    if is_degenerate(gc, config):
        raise DegenerateConstraintError("constraint determinant is identically zero")


def find_transformations(gc: GraphicalConstraint, config: ToolkitConfig = DEFAULT_CONFIG) -> List[Triple]:
    """
    Все применимые тройки (central, left, right)

    Returns:
        Тройки в порядке естественной сортировки идентификаторов
    """
    _require_tree(gc, config)

    found = []
    for central in gc.nodes:
        neighbours = sorted(gc.neighbours(central), key=node_sort_key)
        for left in neighbours:
            for right in neighbours:
                if left == right:
                    continue
                l_label = gc.nodes[left].label
                r_label = gc.nodes[right].label
                a_part = l_label - r_label
                if not a_part:
                    continue
                if edge_weight(gc, (central, left)) != len(a_part):
                    continue
                at_left = _hanging_subtrees(gc, left, central)
                at_right = _hanging_subtrees(gc, right, central)
                if any(at_left[code] < count for code, count in at_right.items()):
                    continue
                found.append((central, left, right))

    found.sort(key=lambda t: tuple(node_sort_key(x) for x in t))
    logger.debug("%d transformation candidates", len(found))
    return found


def _rewrite(gc: GraphicalConstraint, triple: Triple) -> GraphicalConstraint:
    central, left, right = triple
    l_label = gc.nodes[left].label
    r_label = gc.nodes[right].label
    shared = l_label & r_label

    edges = {e for e in gc.edges if set(e) != {central, left}}
    if not shared:
        # пустая метка: узел left исчезает, его поддеревья становятся компонентами
        edges = {e for e in edges if left not in e}

    def rebuild(nodes):
        out = []
        for n in nodes:
            if n.id == left:
                if shared:
                    out.append(ConstraintNode(left, shared))
            elif n.id == right:
                out.append(ConstraintNode(right, l_label | r_label))
            else:
                out.append(n)
        return tuple(out)

    part_a, part_b = rebuild(gc.part_a), rebuild(gc.part_b)
    kept = {n.id for n in part_a + part_b}
    seeds = tuple(s for s in gc.seeds if s in kept)
    return GraphicalConstraint(part_a, part_b, frozenset(edges), seeds)


def _fingerprint_product(pieces: List[GraphicalConstraint], seed: int, config: ToolkitConfig):
    product = None
    for piece in pieces:
        fp = constraint_fingerprint(piece, seed, config)
        product = fp if product is None else product * fp
    return product


def apply_transformation(gc: GraphicalConstraint, triple: Triple,
                         config: ToolkitConfig = DEFAULT_CONFIG) -> GraphicalConstraint:
    """
    Применение преобразования с проверкой по отпечатку

    Returns:
        Несвязное ограничение; произведение определителей его компонент
        равно исходному определителю с точностью до знака

    Raises:
        InvalidTransformationError: тройка не применима или проверка не прошла
    """
    if tuple(triple) not in find_transformations(gc, config):
        raise InvalidTransformationError(f"triple {tuple(triple)} does not satisfy the preconditions")

    result = _rewrite(gc, tuple(triple))
    pieces = components(result)
    for piece in pieces:
        if not piece.is_square:
            logger.warning("transformation %s produced a non-square component", triple)
            raise InvalidTransformationError(
                f"component {sorted(piece.nodes)} is {piece.row_slots}x{piece.col_slots}"
            )

    # две независимые серии точек
    for seed in _CHECK_SEEDS:
        product = _fingerprint_product(pieces, seed, config)
        if not equal_up_to_sign(constraint_fingerprint(gc, seed, config), product):
            logger.warning("transformation %s does not preserve the determinant (seed %d)", triple, seed)
            raise InvalidTransformationError(f"transformation {triple} changed the represented polynomial")

    logger.debug("applied transformation central=%s left=%s right=%s", *triple)
    return normal_form(result)


def _candidates(gc: GraphicalConstraint, config: ToolkitConfig) -> List[Triple]:
    if not gc.is_square or not gc.is_tree():
        return []
    try:
        return find_transformations(gc, config)
    except DegenerateConstraintError:
        return []


def is_minor_product(gc: GraphicalConstraint, config: ToolkitConfig = DEFAULT_CONFIG) -> bool:
    """Определитель - произведение главных миноров (после деления остаётся константа)"""
    try:
        det = constraint_polynomial(gc, config)
    except ExpansionCapError:
        return False
    if det.is_zero():
        return False
    return peel_principal_minors(det, config=config)[0].degree() == 0


def _model_points(g: MixedGraph, seed: int, config: ToolkitConfig) -> List[dict]:
    return [sample_covariance_mod_p(g, derive_seed(seed, 'core', k), config) for k in range(_CORE_POINTS)]


def _vanishes_on_model(gc: GraphicalConstraint, points: List[dict], config: ToolkitConfig) -> bool:
    hits = sum(1 for point in points if vanishes_mod_p(gc, point, config.prime))
    return hits >= _CORE_HITS


def _split_core(original: GraphicalConstraint, pieces: List[GraphicalConstraint], config: ToolkitConfig,
                points: Optional[List[dict]]) -> Tuple[GraphicalConstraint, List[GraphicalConstraint]]:
    if len(pieces) == 1:
        return pieces[0], []

    if points is not None:
        candidates = [p for p in pieces if _vanishes_on_model(p, points, config)]
    else:
        candidates = [p for p in pieces if not is_minor_product(p, config)]
    if not candidates:
        logger.warning("no component qualifies as the core, keeping the constraint whole")
        return original, []

    core = None
    if original.seeds:
        core = next((p for p in candidates if all(s in p.nodes for s in original.seeds)), None)
    if core is None:
        # на модели - наименьшая обращающаяся в ноль компонента, без модели - наибольшая
        if points is not None:
            core = min(candidates, key=lambda p: (p.dimension, canonical_key(p)))
        else:
            core = max(candidates, key=lambda p: (p.dimension, canonical_key(p)))
    factors = [p for p in pieces if p is not core]
    return core, factors


def simplify(gc: GraphicalConstraint, config: ToolkitConfig = DEFAULT_CONFIG, g: Optional[MixedGraph] = None,
             seed: int = 0) -> Tuple[GraphicalConstraint, List[GraphicalConstraint]]:
    """
    Жадное применение преобразований до неподвижной точки

    Args:
        gc: ограничение
        g: граф модели; если задан, ядро - компонента, обращающаяся в ноль
            на модельных выборках mod p
        seed: seed модельных выборок

    Returns:
        (ядро, отщеплённые множители). Без графа ядро выбирается среди
        компонент, не являющихся произведением главных миноров. Если
        подходящей компоненты нет, ядро - исходное ограничение.
    """
    pending = [gc]
    done: List[GraphicalConstraint] = []
    while pending:
        piece = pending.pop(0)
        candidates = _candidates(piece, config)
        if not candidates:
            done.append(piece)
            continue
        pending = components(apply_transformation(piece, candidates[0], config)) + pending

    points = _model_points(g, seed, config) if g is not None and len(done) > 1 else None
    core, factors = _split_core(gc, done, config, points)
    if factors:
        logger.info("simplify stripped %d factor(s)", len(factors))
    return core, factors


def simplify_all_orders(gc: GraphicalConstraint, config: ToolkitConfig = DEFAULT_CONFIG,
                        limit: int = 32, g: Optional[MixedGraph] = None,
                        seed: int = 0) -> List[Tuple[GraphicalConstraint, List[GraphicalConstraint]]]:
    """
    Все различные неподвижные точки при разных порядках применения

    Каждое преобразование удаляет ребро, поэтому перебор конечен.
    """
    points = _model_points(g, seed, config) if g is not None else None
    results = []
    seen = set()
    stack = [((gc,), ())]
    while stack and len(results) < limit:
        pending, done = stack.pop()
        if not pending:
            key = tuple(sorted(canonical_key(p) for p in done))
            if key not in seen:
                seen.add(key)
                results.append(_split_core(gc, list(done), config, points))
            continue
        piece, rest = pending[0], pending[1:]
        candidates = _candidates(piece, config)
        if not candidates:
            stack.append((rest, done + (piece,)))
            continue
        for triple in reversed(candidates):
            split = tuple(components(apply_transformation(piece, triple, config)))
            stack.append((split + rest, done))
    return results
