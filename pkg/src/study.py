"""
Модуль переписи классов алгебраической эквивалентности

Перебираются смешанные графы, изоморфные отбрасываются, для каждого
представителя строятся ограничения по всем найденным семействам,
упрощаются и очищаются от главных миноров. Классы - совпадающие
сигнатуры ядер (отпечатки с точностью до переименования переменных),
подтверждённые перекрёстным обращением в ноль.
"""
import itertools
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from classify import CERTIFIED, REFUTED, UNKNOWN, certify_core, i_primary_certificate, peel_principal_minors
from config import DEFAULT_CONFIG, ToolkitConfig
from constraint import (
    GraphicalConstraint,
    constraint_fingerprint,
    constraint_from_dict,
    constraint_polynomial,
    constraint_to_dict,
    relabel_variables,
    satisfies,
)
from construct import derive_all
from errors import ExpansionCapError, UnsupportedSizeError
from graph import MixedGraph, canonical_form, enumerate_graphs, parse_graph, relabel, serialize_graph
from htc import (
    IdentifyingFamily,
    constraint_pairs,
    enumerate_identifying_families,
    find_identifying_family,
)
from oracle import (
    covariance,
    derive_seed,
    expected_constraint_count,
    sample_covariance_mod_p,
    sample_parameters,
    vanishes_mod_p,
)
from poly import Polynomial, fingerprint, parse_polynomial
from search import find_vanishing_constraints
from transform import simplify, simplify_all_orders

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# строки таблицы: (примарная форма, PD-примарная форма)
TABLE_ROWS = [('tree', 'tree'), ('nontree', 'tree'), ('none', 'tree'), ('?', 'tree'), ('?', '?')]

_AGREEMENT_SAMPLES = 3


# --- анализ одного графа ----------------------------------------------------

def _families(g: MixedGraph, config: ToolkitConfig) -> List[IdentifyingFamily]:
    default = find_identifying_family(g)
    if default is None:
        return []
    result = [default]
    for fam in enumerate_identifying_families(g, limit=config.family_candidate_cap, config=config):
        if fam.key() != default.key():
            result.append(fam)
    return result


def _core_entries(g: MixedGraph, fam: IdentifyingFamily, config: ToolkitConfig) -> List[Dict[str, Any]]:
    entries = []
    for pair, raw in zip(constraint_pairs(g, fam), derive_all(g, fam)):
        core, _ = simplify(raw, config, g)
        try:
            det = constraint_polynomial(core, config)
        except ExpansionCapError:
            det = None
        peeled = peel_principal_minors(det, config=config)[0] if det is not None and not det.is_zero() else None
        entries.append({
            'pair': pair,
            'raw': raw,
            'core': core,
            'det': det,
            'poly': peeled,
            'degree': peeled.degree() if peeled is not None else core.dimension,
        })
    return entries


def _relabeled_fingerprints(entries: Sequence[Dict[str, Any]], mapping: Dict[str, str],
                            seed: int, config: ToolkitConfig) -> Tuple[Tuple[int, ...], ...]:
    prints = []
    for entry in entries:
        if entry['poly'] is not None:
            fp = fingerprint(entry['poly'].relabel(mapping), seed, config)
        else:
            fp = constraint_fingerprint(relabel_variables(entry['core'], mapping), seed, config)
        prints.append(fp.normalized())
    return tuple(sorted(prints))


def _canonical_signature(nodes: Sequence[str], entries: Sequence[Dict[str, Any]], seed: int,
                         config: ToolkitConfig) -> Tuple[tuple, Dict[str, str]]:
    if len(nodes) > config.permutation_budget:
        raise UnsupportedSizeError(f"signatures support at most {config.permutation_budget} nodes")
    best, best_mapping = None, None
    for perm in itertools.permutations(nodes):
        mapping = dict(zip(nodes, perm))
        sig = _relabeled_fingerprints(entries, mapping, seed, config)
        if best is None or sig < best:
            best, best_mapping = sig, mapping
    return best, best_mapping


def _best_family(g: MixedGraph, config: ToolkitConfig,
                 families: Optional[List[IdentifyingFamily]] = None):
    best = None
    for fam in (_families(g, config) if families is None else families):
        entries = _core_entries(g, fam, config)
        total = sum(e['degree'] for e in entries)
        if best is None or total < best[0]:
            best = (total, fam, entries)
    return best


def class_signature(g: MixedGraph, seed: int = 0, config: ToolkitConfig = DEFAULT_CONFIG) -> tuple:
    """
    Сигнатура класса графа

    Для HTC-идентифицируемого графа - отсортированные нормированные
    отпечатки ядер (семейство с минимальной суммарной степенью), минимум
    по переименованиям переменных; иначе метка non-HTC и каноническая форма.
    """
    best = _best_family(g, config)
    if best is None:
        return ('non-HTC', canonical_form(g, config))
    sig, _ = _canonical_signature(g.nodes, best[2], seed, config)
    return ('HTC', sig)


def analyze_graph(g: MixedGraph, seed: int = 0, config: ToolkitConfig = DEFAULT_CONFIG,
                  required_count: Optional[int] = None) -> Dict[str, Any]:
    """
    Запись переписи для одного представителя (сериализуема в JSON)

    Все многочлены и ограничения записываются в канонических именах
    переменных (mapping).
    """
    record: Dict[str, Any] = {
        'canonical': canonical_form(g, config),
        'graph': serialize_graph(g),
        'constraint_count': expected_constraint_count(g, seed, config),
        'violations': [],
    }
    if required_count is not None and record['constraint_count'] != required_count:
        record['skipped'] = True
        return record

    families = _families(g, config)
    best = _best_family(g, config, families)
    identity = {v: v for v in g.nodes}
    if best is None:
        record.update(htc=False, mapping=identity, signature=None, best=[], default=None, families=[])
        return record

    _, fam, entries = best
    sig, mapping = _canonical_signature(g.nodes, entries, seed, config)
    default = find_identifying_family(g)
    raw = derive_all(g, default)
    i_verdicts = [i_primary_certificate(gc, default, g, pair, config)['verdict']
                  for pair, gc in zip(constraint_pairs(g, default), raw)]

    for entry in entries:
        if entry['det'] is not None and entry['det'].is_zero():
            record['violations'].append(f"degenerate constraint for pair {entry['pair']}")

    record.update(
        htc=True,
        mapping=mapping,
        signature=[list(x) for x in sig],
        best=[{
            'pair': list(e['pair']),
            'core': constraint_to_dict(relabel_variables(e['core'], mapping)),
            'det': e['det'].relabel(mapping).to_text() if e['det'] is not None else None,
            'poly': e['poly'].relabel(mapping).to_text() if e['poly'] is not None else None,
            'degree': e['degree'],
            'tree': e['core'].is_tree(),
        } for e in entries],
        default={
            'family': default.to_dict(),
            'raw': [constraint_to_dict(relabel_variables(gc, mapping)) for gc in raw],
            'i_primary': CERTIFIED if all(v == CERTIFIED for v in i_verdicts) else UNKNOWN,
        },
        families=[{
            'family': f.to_dict(),
            'raw': [constraint_to_dict(relabel_variables(gc, mapping)) for gc in derive_all(g, f)],
        } for f in families],
    )
    return record


def _analyze_task(args) -> Dict[str, Any]:
    text, seed, config, required = args
    return analyze_graph(parse_graph(text), seed, config, required)


# --- перекрёстные проверки ----------------------------------------------

def _default_constraints(g: MixedGraph) -> List[GraphicalConstraint]:
    fam = find_identifying_family(g)
    return derive_all(g, fam) if fam is not None else []


def cross_vanishing(g1: MixedGraph, g2: MixedGraph, samples: int = 10, seed: int = 0,
                    config: ToolkitConfig = DEFAULT_CONFIG) -> bool:
    """
    Модельные Sigma каждого графа точно удовлетворяют ограничениям другого

    Графы должны использовать одни и те же имена переменных.
    """
    c1 = _default_constraints(g1)
    c2 = _default_constraints(g2)
    for s in range(samples):
        sigma2 = covariance(sample_parameters(g2, derive_seed(seed, 'cross', 2, s), config))
        if not all(satisfies(gc, sigma2) for gc in c1):
            return False
        sigma1 = covariance(sample_parameters(g1, derive_seed(seed, 'cross', 1, s), config))
        if not all(satisfies(gc, sigma1) for gc in c2):
            return False
    return True


def _vanish_on(constraints: Sequence[GraphicalConstraint], g: MixedGraph, seed: int,
               config: ToolkitConfig) -> bool:
    for s in range(_AGREEMENT_SAMPLES):
        point = sample_covariance_mod_p(g, derive_seed(seed, 'agree', s), config)
        if not all(vanishes_mod_p(gc, point, config.prime) for gc in constraints):
            return False
    return True


def _record_graph(record: Dict[str, Any]) -> MixedGraph:
    return relabel(parse_graph(record['graph']), record['mapping'])


# --- классы ------------------------------------------------------------------

class _CensusClass:
    """Класс переписи: представители и эталонные ядра"""

    def __init__(self, status: str, count: int, key=None):
        self.status = status
        self.count = count
        self.key = key
        self.members: List[Dict[str, Any]] = []
        self.cores: List[Dict[str, Any]] = []
        self.evidence = 'signature'

    def constraints(self) -> List[GraphicalConstraint]:
        return [constraint_from_dict(c['core']) for c in self.cores]

    def refresh_cores(self):
        # эталон - ядра участника с минимальной суммарной степенью
        htc_members = [m for m in self.members if m.get('htc')]
        if htc_members:
            best = min(htc_members, key=lambda m: (sum(e['degree'] for e in m['best']), m['canonical']))
            self.cores = best['best']

    def first_graph(self) -> MixedGraph:
        return _record_graph(self.members[0])


def _models_agree(a: _CensusClass, b: _CensusClass, seed: int, config: ToolkitConfig) -> bool:
    ga, gb = a.first_graph(), b.first_graph()
    ca, cb = a.constraints(), b.constraints()
    names = list(gb.nodes)
    for perm in itertools.permutations(names):
        mapping = dict(zip(names, perm))
        if not _vanish_on(ca, relabel(gb, mapping), seed, config):
            continue
        if _vanish_on([relabel_variables(c, mapping) for c in cb], ga, seed, config):
            return True
    return False


def _attaches(cls: _CensusClass, g: MixedGraph, seed: int, config: ToolkitConfig) -> bool:
    constraints = cls.constraints()
    if not constraints:
        return True
    names = list(g.nodes)
    return any(_vanish_on(constraints, relabel(g, dict(zip(names, perm))), seed, config)
               for perm in itertools.permutations(names))


def _searched_cores(g: MixedGraph, count: int, seed: int, config: ToolkitConfig) -> List[Dict[str, Any]]:
    found = find_vanishing_constraints(g, seed=seed, limit=count, config=config)
    if len(found) < count:
        return []
    cores = []
    for gc in found:
        try:
            det = constraint_polynomial(gc, config)
            poly = peel_principal_minors(det, config=config)[0]
        except ExpansionCapError:
            det = poly = None
        cores.append({
            'pair': None,
            'core': constraint_to_dict(gc),
            'det': det.to_text() if det is not None else None,
            'poly': poly.to_text() if poly is not None else None,
            'degree': poly.degree() if poly is not None else gc.dimension,
            'tree': gc.is_tree(),
        })
    return cores


def _group(records: List[Dict[str, Any]], seed: int, config: ToolkitConfig,
           resolve_non_htc: bool) -> List[_CensusClass]:
    classes: List[_CensusClass] = []
    by_key: Dict[tuple, _CensusClass] = {}
    saturated: Optional[_CensusClass] = None

    for rec in records:
        if rec['constraint_count'] == 0:
            if saturated is None:
                saturated = _CensusClass('htc' if rec.get('htc') else 'attached', 0, ('saturated',))
                classes.append(saturated)
            saturated.members.append(rec)
            continue
        if not rec.get('htc'):
            continue
        key = tuple(tuple(x) for x in rec['signature'])
        if key not in by_key:
            by_key[key] = _CensusClass('htc', rec['constraint_count'], key)
            classes.append(by_key[key])
        by_key[key].members.append(rec)

    for cls in classes:
        cls.refresh_cores()

    # классы с разными сигнатурами, но совпадающими моделями
    merged: List[_CensusClass] = []
    for cls in classes:
        target = None
        if cls.key != ('saturated',):
            target = next((m for m in merged if m.key != ('saturated',) and m.count == cls.count
                           and _models_agree(m, cls, seed, config)), None)
        if target is None:
            merged.append(cls)
        else:
            logger.info("merging fingerprint classes with agreeing models")
            target.members.extend(cls.members)
            target.evidence = 'cross-vanishing'
            target.refresh_cores()
    classes = merged

    for rec in records:
        if rec.get('htc') or rec['constraint_count'] == 0:
            continue
        g = parse_graph(rec['graph'])
        home = next((c for c in classes if c.count == rec['constraint_count'] and c.cores
                     and _attaches(c, g, seed, config)), None)
        if home is not None:
            home.members.append(rec)
            continue
        cls = _CensusClass('unresolved', rec['constraint_count'])
        cls.members.append(rec)
        if resolve_non_htc:
            cores = _searched_cores(g, rec['constraint_count'], seed, config)
            if cores:
                cls.status = 'searched'
                cls.cores = cores
        classes.append(cls)

    classes.sort(key=lambda c: (c.count, min(m['canonical'] for m in c.members)))
    return classes


def _pd_verdict(gc: GraphicalConstraint, refs: List[Polynomial], mappings: List[Dict[str, str]],
                config: ToolkitConfig) -> str:
    if not refs:
        return UNKNOWN
    try:
        det = constraint_polynomial(gc, config)
    except ExpansionCapError:
        return UNKNOWN
    if det.is_zero():
        return UNKNOWN
    core, _ = peel_principal_minors(det, config=config)
    verdicts = set()
    for mapping in mappings:
        moved = core.relabel(mapping)
        for ref in refs:
            verdict = certify_core(moved, ref, config)['verdict']
            if verdict == CERTIFIED:
                return CERTIFIED
            verdicts.add(verdict)
    return REFUTED if REFUTED in verdicts else UNKNOWN


def _simplified_verdict(gc: GraphicalConstraint, refs: List[Polynomial], mappings: List[Dict[str, str]],
                        config: ToolkitConfig, g: Optional[MixedGraph] = None) -> str:
    verdict = _pd_verdict(simplify(gc, config, g)[0], refs, mappings, config)
    if verdict == CERTIFIED:
        return verdict
    for core, _ in simplify_all_orders(gc, config, g=g):
        if _pd_verdict(core, refs, mappings, config) == CERTIFIED:
            return CERTIFIED
    return verdict


def _member_mappings(cls: _CensusClass, rec: Dict[str, Any]) -> List[Dict[str, str]]:
    # участники одного класса сигнатур уже записаны в согласованных именах
    names = parse_graph(rec['graph']).nodes
    if cls.evidence == 'signature' and rec.get('htc'):
        return [{v: v for v in names}]
    return [dict(zip(names, perm)) for perm in itertools.permutations(names)]


def _class_row(cls: _CensusClass, index: int, config: ToolkitConfig, cross_samples: int,
               seed: int) -> Tuple[Dict[str, Any], List[str]]:
    violations = []
    refs = [parse_polynomial(c['poly']) for c in cls.cores if c.get('poly')]

    raw_bad = simplified_bad = 0
    i_primary = UNKNOWN
    for rec in cls.members:
        violations.extend(rec.get('violations', []))
        default = rec.get('default')
        if not default:
            continue
        # выходы алгоритма для всех найденных семейств участника
        raw = [constraint_from_dict(d) for f in (rec.get('families') or [default]) for d in f['raw']]
        mappings = _member_mappings(cls, rec)
        bad = [gc for gc in raw if _pd_verdict(gc, refs, mappings, config) != CERTIFIED]
        if bad:
            raw_bad += 1
            g = _record_graph(rec)
            if any(_simplified_verdict(gc, refs, mappings, config, g) != CERTIFIED for gc in bad):
                simplified_bad += 1
        if default['i_primary'] == CERTIFIED:
            i_primary = CERTIFIED

    if cls.evidence == 'signature' and cross_samples > 0:
        htc_members = [m for m in cls.members if m.get('htc')]
        for rec in htc_members[1:]:
            if not cross_vanishing(_record_graph(htc_members[0]), _record_graph(rec), cross_samples, seed, config):
                violations.append(f"cross-vanishing fails between {htc_members[0]['canonical']} "
                                  f"and {rec['canonical']}")

    primary_form, pd_form, tree = _forms(cls, refs, config)
    row = {
        'id': f"C{index:03d}",
        'status': cls.status,
        'evidence': cls.evidence,
        'members': len(cls.members),
        'htc_members': sum(1 for m in cls.members if m.get('htc')),
        'graphs': sorted(m['canonical'] for m in cls.members),
        'constraint_count': cls.count,
        'degrees': [c['degree'] for c in cls.cores],
        'best_constraints': [c['core'] for c in cls.cores],
        'best_polynomials': [c['poly'] for c in cls.cores],
        'tree': tree,
        'raw_not_pd_members': raw_bad,
        'simplified_not_pd_members': simplified_bad,
        'i_primary': i_primary,
        'primary_form': primary_form,
        'pd_primary_form': pd_form,
    }
    return row, violations


def _forms(cls: _CensusClass, refs: List[Polynomial], config: ToolkitConfig) -> Tuple[str, str, Optional[bool]]:
    if not cls.count:
        return 'n/a', 'n/a', None
    if not cls.cores:
        return '?', '?', None

    tree = all(c['tree'] for c in cls.cores)
    pd_form = 'tree' if tree else 'nontree'

    # примарная форма: определитель ограничения равен эталону без множителей
    candidates = [c for rec in cls.members for c in rec.get('best', [])] + list(cls.cores)
    primary = set()
    for c in candidates:
        if c.get('det') is None:
            continue
        det = parse_polynomial(c['det'])
        if any(certify_core(det, ref, config)['verdict'] == CERTIFIED for ref in refs):
            primary.add('tree' if c['tree'] else 'nontree')
    primary_form = 'tree' if 'tree' in primary else ('nontree' if primary else '?')
    return primary_form, pd_form, tree


# --- перепись ----------------------------------------------------------------

def _edge_range(n: int, m: int, edges_mode: str, allow_bows: bool, allow_cycles: bool) -> Iterable[int]:
    if edges_mode == 'exact':
        return [m]
    if edges_mode != 'at-least':
        raise ValueError(f"unknown edges mode '{edges_mode}'")
    per_pair = 1 + int(allow_cycles) + int(allow_bows)
    return range(m, n * (n - 1) // 2 * per_pair + 1)


def _load_checkpoint(path: Optional[str]) -> Dict[str, Dict[str, Any]]:
    if not path or not os.path.exists(path):
        return {}
    records = {}
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            line = line.strip()
            if line:
                rec = json.loads(line)
                records[rec['canonical']] = rec
    logger.info("resumed %d records from %s", len(records), path)
    return records


def census(n: int, m: int, edges_mode: str = 'exact', allow_bows: bool = False, allow_cycles: bool = False,
           one_constraint: bool = False, seed: int = 0, threads: int = 1, checkpoint: Optional[str] = None,
           max_graphs: Optional[int] = None, resolve_non_htc: bool = False, cross_samples: int = 10,
           config: ToolkitConfig = DEFAULT_CONFIG) -> Dict[str, Any]:
    """
    Перепись классов эквивалентности

    Args:
        n: число узлов
        m: число рёбер (или минимум при edges_mode='at-least')
        allow_bows, allow_cycles: допустимые графы
        one_constraint: только классы, задающие одно ограничение
        threads: число процессов для анализа представителей
        checkpoint: файл JSON lines для возобновления
        max_graphs: бюджет представителей (частичный отчёт при превышении)
        resolve_non_htc: искать ограничения для не-HTC графов перебором
        cross_samples: число сэмплов при проверке классов

    Returns:
        Отчёт: параметры, покрытие, классы, сводка, таблица, нарушения
    """
    if n > config.permutation_budget:
        raise UnsupportedSizeError(f"census supports at most {config.permutation_budget} nodes, got {n}")

    representatives: Dict[str, MixedGraph] = {}
    enumerated = 0
    for edges in _edge_range(n, m, edges_mode, allow_bows, allow_cycles):
        for g in enumerate_graphs(n, edges, allow_bows, allow_cycles):
            enumerated += 1
            representatives.setdefault(canonical_form(g, config), g)
    logger.info("enumerated %d graphs, %d up to isomorphism", enumerated, len(representatives))

    keys = sorted(representatives)
    if max_graphs is not None:
        keys = keys[:max_graphs]

    records = _load_checkpoint(checkpoint)
    required = 1 if one_constraint else None
    # пропущенные фильтром записи пересчитываются, если фильтр снят
    todo = [k for k in keys if k not in records or (records[k].get('skipped') and required is None)]
    tasks = [(serialize_graph(representatives[k]), seed, config, required) for k in todo]

    sink = open(checkpoint, 'a', encoding='utf-8') if checkpoint else None
    try:
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                results = pool.map(_analyze_task, tasks, chunksize=8)
                for rec in results:
                    records[rec['canonical']] = rec
                    if sink:
                        sink.write(json.dumps(rec, ensure_ascii=False) + "\n")
                        sink.flush()
        else:
            for task in tasks:
                rec = _analyze_task(task)
                records[rec['canonical']] = rec
                if sink:
                    sink.write(json.dumps(rec, ensure_ascii=False) + "\n")
                    sink.flush()
    finally:
        if sink:
            sink.close()

    analyzed = [records[k] for k in keys if k in records]
    kept = [r for r in analyzed if not r.get('skipped')]
    if one_constraint:
        kept = [r for r in kept if r['constraint_count'] == 1]

    classes = _group(kept, seed, config, resolve_non_htc)
    rows, violations = [], []
    for i, cls in enumerate(classes, 1):
        row, found = _class_row(cls, i, config, cross_samples, seed)
        rows.append(row)
        violations.extend(found)

    if violations:
        logger.warning("census found %d invariant violations", len(violations))

    return {
        'schema_version': SCHEMA_VERSION,
        'parameters': {
            'nodes': n, 'edges': m, 'edges_mode': edges_mode, 'bows': allow_bows, 'cycles': allow_cycles,
            'one_constraint': one_constraint, 'seed': seed,
        },
        'coverage': {
            'graphs_enumerated': enumerated,
            'representatives': len(representatives),
            'analyzed': len(analyzed),
            'complete': len(analyzed) == len(representatives),
        },
        'classes': rows,
        'summary': _summary(rows),
        'table': _table(rows),
        'invariant_violations': violations,
    }


def _summary(rows: List[Dict[str, Any]]) -> Dict[str, int]:
    return {
        'class_count': len(rows),
        'raw_not_pd_classes': sum(1 for r in rows if r['raw_not_pd_members']),
        'simplified_not_pd_classes': sum(1 for r in rows if r['simplified_not_pd_members']),
        'non_htc_classes': sum(1 for r in rows if r['htc_members'] == 0),
        'unresolved_classes': sum(1 for r in rows if r['status'] == 'unresolved'),
    }


def _table(rows: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    counts: Dict[Tuple[str, str], int] = {key: 0 for key in TABLE_ROWS}
    for r in rows:
        key = (r['primary_form'], r['pd_primary_form'])
        counts[key] = counts.get(key, 0) + 1
    return [{'primary': p, 'pd_primary': d, 'count': c} for (p, d), c in counts.items()]
