"""
Модуль сертификатов для идеалов, порождённых графическими ограничениями

PD-примарность: после деления на все главные миноры Sigma остаётся ядро,
совпадающее с минимальным известным ограничением класса. I-примарность:
каждое |A^(v)| раскрытых узлов содержит моном из одних диагональных sigma_vv.
Вердикты надёжны, но неполны: "unknown" - честный ответ.
"""
import itertools
import logging
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

from config import DEFAULT_CONFIG, ToolkitConfig
from constraint import GraphicalConstraint, build_matrix, constraint_polynomial
from construct import a_minor_constraint, expansion_trace
from errors import AlgconError, ExpansionCapError, HomogeneityError
from graph import MixedGraph
from htc import IdentifyingFamily
from poly import (
    Fingerprint,
    PatternMatrix,
    Polynomial,
    det_expand,
    diagonal_monomial,
    divide_exact,
    equal_up_to_scalar,
    fingerprint,
    sigma,
)

logger = logging.getLogger(__name__)

CERTIFIED = 'certified'
REFUTED = 'refuted-by-residual'
UNKNOWN = 'unknown'


def principal_minor_poly(variables: Sequence[str], config: ToolkitConfig = DEFAULT_CONFIG) -> Polynomial:
    """Определитель Sigma, ограниченной на variables"""
    return _principal_minor(tuple(sorted(set(variables))), config)


@lru_cache(maxsize=1024)
def _principal_minor(variables: Tuple[str, ...], config: ToolkitConfig) -> Polynomial:
    if not variables:
        raise AlgconError("principal minor needs at least one variable")
    slots = tuple(('minor', v) for v in variables)
    entries = tuple(tuple(sigma(v, w) for w in variables) for v in variables)
    return det_expand(PatternMatrix(slots, slots, entries), config)


def peel_principal_minors(p: Polynomial, variables: Optional[Sequence[str]] = None,
                          config: ToolkitConfig = DEFAULT_CONFIG) -> Tuple[Polynomial, List[Tuple[Tuple[str, ...], int]]]:
    """
    Деление на главные миноры до неподвижной точки

    Args:
        p: ненулевой многочлен
        variables: переменные, по подмножествам которых берутся миноры
            (по умолчанию - встречающиеся в p)

    Returns:
        (ядро, журнал [(переменные минора, кратность)]),
        p = ядро * произведение миноров в степенях кратностей
    """
    if p.is_zero():
        raise AlgconError("cannot peel the zero polynomial")

    variables = sorted(set(p.nodes() if variables is None else variables))
    subsets = [s for k in range(1, min(len(variables), config.expansion_cap) + 1)
               for s in itertools.combinations(variables, k)]

    core = p
    counts: Dict[Tuple[str, ...], int] = {}
    changed = True
    while changed and core.degree() > 0:
        changed = False
        present = set(core.nodes())
        for subset in subsets:
            if not set(subset) <= present or len(subset) > core.degree():
                continue
            minor = _principal_minor(subset, config)
            quotient = divide_exact(core, minor)
            while quotient is not None:
                core = quotient
                counts[subset] = counts.get(subset, 0) + 1
                changed = True
                quotient = divide_exact(core, minor) if core.degree() > 0 else None
            if changed:
                break

    peeled = [(subset, counts[subset]) for subset in subsets if subset in counts]
    if peeled:
        logger.debug("peeled principal minors %s", peeled)
    return core, peeled


def _constant_quotient(p: Polynomial, q: Polynomial) -> bool:
    h = divide_exact(p, q)
    return h is not None and not h.is_zero() and h.degree() == 0


def certify_core(core: Polynomial, core_ref: Union[Polynomial, Fingerprint],
                 config: ToolkitConfig = DEFAULT_CONFIG) -> Dict[str, object]:
    """Сравнение очищенного ядра с эталоном класса"""
    if isinstance(core_ref, Fingerprint):
        own = fingerprint(core, core_ref.seed, config)
        verdict = CERTIFIED if equal_up_to_scalar(own, core_ref) else UNKNOWN
        return {'verdict': verdict, 'residual': None}

    if core_ref.is_zero():
        raise AlgconError("reference core must be nonzero")
    if _constant_quotient(core, core_ref):
        return {'verdict': CERTIFIED, 'residual': None}
    residual = divide_exact(core, core_ref)
    if residual is not None and residual.degree() > 0:
        return {'verdict': REFUTED, 'residual': residual.canonical_sign().to_text()}
    return {'verdict': UNKNOWN, 'residual': None}


def pd_primary_certificate(gc_raw: GraphicalConstraint, core_ref: Union[Polynomial, Fingerprint],
                           config: ToolkitConfig = DEFAULT_CONFIG) -> Dict[str, object]:
    """
    PD-сертификат для выхода алгоритма построения

    Returns:
        Словарь: verdict (certified / refuted-by-residual / unknown),
        peeled (журнал миноров), core (текст ядра), residual
    """
    try:
        raw = constraint_polynomial(gc_raw, config)
    except ExpansionCapError:
        if isinstance(core_ref, Fingerprint):
            own = fingerprint(build_matrix(gc_raw), core_ref.seed, config)
            verdict = CERTIFIED if equal_up_to_scalar(own, core_ref) else UNKNOWN
        else:
            verdict = UNKNOWN
        logger.debug("constraint too large to expand, fingerprint verdict %s", verdict)
        return {'verdict': verdict, 'peeled': [], 'core': None, 'residual': None}

    if raw.is_zero():
        return {'verdict': UNKNOWN, 'peeled': [], 'core': None, 'residual': None}

    core, peeled = peel_principal_minors(raw, config=config)
    result = certify_core(core, core_ref, config)
    if result['verdict'] == REFUTED:
        logger.warning("non-minor spurious factor %s remains after peeling", result['residual'])
    return {
        'verdict': result['verdict'],
        'peeled': [[list(s), k] for s, k in peeled],
        'core': core.canonical_sign().to_text(),
        'residual': result['residual'],
    }


def i_primary_certificate(gc_raw: GraphicalConstraint, fam: IdentifyingFamily, g: MixedGraph,
                          pair: Optional[Tuple[str, str]] = None,
                          config: ToolkitConfig = DEFAULT_CONFIG) -> Dict[str, object]:
    """
    I-сертификат: у каждого |A^(v)| раскрытых узлов есть диагональный моном

    Если пара не указана, проверяются все узлы с непустым pa(v)
    (более строгая проверка).
    """
    nodes = expansion_trace(g, fam, pair) if pair is not None else [v for v in g.nodes if g.parents(v)]
    witnesses = {}
    for v in dict.fromkeys(nodes):
        try:
            minor = constraint_polynomial(a_minor_constraint(g, fam, v), config)
            found = diagonal_monomial(minor) if not minor.is_zero() else None
        except (ExpansionCapError, HomogeneityError) as e:
            logger.debug("no I-primary witness for %s: %s", v, e)
            found = None
        if found is None:
            return {'verdict': UNKNOWN, 'witnesses': witnesses, 'failed_node': v}
        mono, coef = found
        witnesses[v] = Polynomial({mono: coef}).to_text()
    return {'verdict': CERTIFIED, 'witnesses': witnesses, 'failed_node': None}
