"""
Главный модуль CLI algcon: графические ограничения линейных SEM
"""
import sys
import io

# Исправление кодировки для Windows
if sys.platform == 'win32':
    try:
        sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding='utf-8')
        sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding='utf-8')
    except Exception:
        pass  # Если не получилось - используем стандартную кодировку

import argparse
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from classify import UNKNOWN, i_primary_certificate, pd_primary_certificate, peel_principal_minors
from config import DEFAULT_CONFIG, ToolkitConfig, load_config
from constraint import (
    constraint_fingerprint,
    constraint_from_json,
    constraint_polynomial,
    constraint_to_dict,
    constraint_to_json,
    read_covariance,
    render_text,
    satisfies,
)
from construct import a_minor_constraint, derive_constraint
from errors import AlgconError, ExpansionCapError, TrivialFactorSignal
from graph import MixedGraph, canonical_form, parse_graph
from htc import IdentifyingFamily, constraint_pairs, family_from_json, find_identifying_family, validate_family
from oracle import expected_constraint_count, vanishing_battery
from poly import parse_polynomial
from report_generator import ReportGenerator, validate_report
from search import find_vanishing_constraints, match_target
from study import census
from transform import simplify, simplify_all_orders

logger = logging.getLogger(__name__)


def safe_print(text):
    """Безопасный вывод с поддержкой эмодзи для Windows"""
    try:
        print(text)
    except UnicodeEncodeError:
        # Если консоль не поддерживает Unicode - убираем эмодзи
        clean_text = text.encode('ascii', 'ignore').decode('ascii')
        print(clean_text)


def _read(path: str) -> str:
    with open(path, 'r', encoding='utf-8') as f:
        return f.read()


def _load_graph(path: str) -> MixedGraph:
    return parse_graph(_read(path))


def _load_family(g: MixedGraph, path: Optional[str]) -> Optional[IdentifyingFamily]:
    if path:
        fam = family_from_json(_read(path))
        if not validate_family(g, fam):
            raise ValueError(f"family in {path} does not satisfy the half-trek criterion for this graph")
        return fam
    return find_identifying_family(g)


def _parse_pair(text: str) -> Tuple[str, str]:
    parts = [p.strip() for p in text.split(',')]
    if len(parts) != 2 or not all(parts):
        raise ValueError(f"pair must look like 'v,w', got '{text}'")
    return parts[0], parts[1]


def _polynomial_text(gc, config: ToolkitConfig) -> Optional[str]:
    try:
        return constraint_polynomial(gc, config).to_text()
    except ExpansionCapError:
        return None


def graph_summary(g: MixedGraph, config: ToolkitConfig = DEFAULT_CONFIG, seed: int = 0,
                  trials: Optional[int] = None) -> Dict[str, Any]:
    """
    Сводка по графу: предикаты, htr, семейство, выведенные ограничения

    Args:
        g: смешанный граф
        trials: размер батареи проверок (None - без батареи)
    """
    fam = find_identifying_family(g)
    constraints = []
    if fam is not None:
        for pair in constraint_pairs(g, fam):
            gc = derive_constraint(g, fam, pair)
            item = {
                'pair': list(pair),
                'constraint': constraint_to_dict(gc),
                'drawing': render_text(gc),
                'polynomial': _polynomial_text(gc, config),
            }
            if trials:
                item['battery'] = vanishing_battery(gc, g, trials, seed, config)
            constraints.append(item)

    return {
        'canonical': canonical_form(g, config),
        'nodes': list(g.nodes),
        'directed': [f"{t}->{h}" for t, h in sorted(g.directed)],
        'bidirected': [f"{a}<->{b}" for a, b in sorted(g.bidirected)],
        'acyclic': g.is_acyclic(),
        'bow_free': g.is_bow_free(),
        'ancestral': g.is_ancestral(),
        'htr': {v: sorted(g.half_trek_reachable(v)) for v in g.nodes},
        'htc': fam is not None,
        'family': fam.to_dict() if fam is not None else None,
        'constraint_count': expected_constraint_count(g, seed, config),
        'constraints': constraints,
    }


# --- подкоманды ---------------------------------------------------------------

def cmd_graph(args, config: ToolkitConfig) -> int:
    summary = graph_summary(_load_graph(args.graph), config, args.seed, args.trials)
    if args.format == 'text':
        safe_print(ReportGenerator.generate_constraint_report(summary))
    else:
        for item in summary['constraints']:
            item.pop('drawing')
        print(json.dumps(summary, indent=2, ensure_ascii=False))
    failed = [c for c in summary['constraints'] if c.get('battery') and c['battery']['model_failures']]
    return 1 if failed else 0


def cmd_derive(args, config: ToolkitConfig) -> int:
    g = _load_graph(args.graph)
    fam = _load_family(g, args.family)
    if fam is None:
        safe_print("⚠️  Graph is not HTC-identifiable: nothing to derive")
        return 0

    if args.a_minor:
        try:
            gc = a_minor_constraint(g, fam, args.a_minor)
        except TrivialFactorSignal as e:
            safe_print(f"ℹ️  {e}")
            return 0
        constraints = [gc]
    else:
        pairs = [_parse_pair(args.pair)] if args.pair else constraint_pairs(g, fam)
        constraints = [derive_constraint(g, fam, pair) for pair in pairs]

    for gc in constraints:
        if args.format == 'text':
            safe_print(render_text(gc))
        else:
            print(constraint_to_json(gc))
    return 0


def cmd_verify(args, config: ToolkitConfig) -> int:
    g = _load_graph(args.graph)
    gc = constraint_from_json(_read(args.constraint))
    if args.covariance:
        sigma = read_covariance(_read(args.covariance))
        result = {'covariance': args.covariance, 'satisfied': satisfies(gc, sigma)}
        print(json.dumps(result, ensure_ascii=False))
        return 0

    battery = vanishing_battery(gc, g, args.trials, args.seed, config)
    print(json.dumps(battery, indent=2, ensure_ascii=False))
    return 1 if battery['model_failures'] else 0


def cmd_transform(args, config: ToolkitConfig) -> int:
    gc = constraint_from_json(_read(args.constraint))
    g = _load_graph(args.graph) if args.graph else None
    if args.all_orders:
        results = simplify_all_orders(gc, config, g=g, seed=args.seed)
    else:
        results = [simplify(gc, config, g, args.seed)]
    for core, factors in results:
        print(json.dumps({
            'core': constraint_to_dict(core),
            'factors': [constraint_to_dict(f) for f in factors],
        }, ensure_ascii=False))
        if args.format == 'text':
            safe_print(render_text(core))
    return 0


def _core_reference(gc, config: ToolkitConfig, seed: int):
    """Эталон ядра: очищенный многочлен, отпечаток (больше expansion_cap) или None"""
    try:
        det = constraint_polynomial(gc, config)
    except ExpansionCapError:
        logger.info("core exceeds expansion_cap, using its fingerprint as the reference")
        return constraint_fingerprint(gc, seed, config)
    try:
        return peel_principal_minors(det, config=config)[0]
    except AlgconError as e:
        logger.warning("no reference core: %s", e)
        return None


def cmd_classify(args, config: ToolkitConfig) -> int:
    g = _load_graph(args.graph)
    fam = _load_family(g, args.family)
    if fam is None:
        safe_print("⚠️  Graph is not HTC-identifiable: nothing to classify")
        return 0

    fixed_ref = _core_reference(constraint_from_json(_read(args.core)), config, args.seed) if args.core else None

    for pair in constraint_pairs(g, fam):
        raw = derive_constraint(g, fam, pair)
        if args.core:
            ref = fixed_ref
        else:
            core, _ = simplify(raw, config, g, args.seed)
            ref = _core_reference(core, config, args.seed)
        pd_primary = pd_primary_certificate(raw, ref, config) if ref is not None else {'verdict': UNKNOWN}
        result = {
            'pair': list(pair),
            'pd_primary': pd_primary,
            'i_primary': i_primary_certificate(raw, fam, g, pair, config),
        }
        print(json.dumps(result, ensure_ascii=False))
    return 0


def cmd_search(args, config: ToolkitConfig) -> int:
    if args.graph:
        found = find_vanishing_constraints(_load_graph(args.graph), args.max_nodes, args.max_slots,
                                           seed=args.seed, limit=args.limit, trees_only=args.trees_only,
                                           config=config)
    else:
        if not args.target or not args.vars:
            raise ValueError("search needs --graph, or --target together with --vars")
        target = parse_polynomial(_read(args.target))
        variables = [v.strip() for v in args.vars.split(',') if v.strip()]
        found = match_target(target, variables, args.max_nodes, args.max_slots, args.mode,
                             args.trees_only, args.seed, config)

    for gc in found:
        if args.format == 'text':
            safe_print(render_text(gc))
        else:
            print(constraint_to_json(gc))
    if not found:
        safe_print("⚠️  No matching constraint within the search bounds")
    return 0


def cmd_census(args, config: ToolkitConfig) -> int:
    safe_print(f"🔍 Census: {args.nodes} nodes, edges {args.edges} ({args.edges_mode})")
    safe_print("=" * 70)

    report = census(
        args.nodes, args.edges, edges_mode=args.edges_mode, allow_bows=args.bows, allow_cycles=args.cycles,
        one_constraint=args.one_constraint, seed=args.seed, threads=args.threads, checkpoint=args.checkpoint,
        max_graphs=args.max_graphs, resolve_non_htc=args.resolve_non_htc, config=config,
    )
    problems = validate_report(report)
    if problems:
        report['invariant_violations'].extend(f"schema: {p}" for p in problems)

    output_format = args.format or 'text'
    output_dir = Path(args.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    base_name = f"census_n{args.nodes}_m{args.edges}"

    if output_format in ['text', 'all']:
        text = ReportGenerator.generate_text_report(report)
        safe_print(text)
        txt_path = output_dir / f"{base_name}.txt"
        txt_path.write_text(text, encoding='utf-8')
        safe_print(f"\n💾 Text report saved: {txt_path}")

    if output_format in ['json', 'all']:
        json_path = output_dir / f"{base_name}.json"
        json_path.write_text(ReportGenerator.generate_json_report(report), encoding='utf-8')
        safe_print(f"💾 JSON report saved: {json_path}")

    if output_format in ['markdown', 'all']:
        md_path = output_dir / f"{base_name}.md"
        md_path.write_text(ReportGenerator.generate_markdown_report(report), encoding='utf-8')
        safe_print(f"💾 Markdown report saved: {md_path}")

    if report['invariant_violations']:
        safe_print(f"❌ {len(report['invariant_violations'])} invariant violation(s)")
        return 1
    return 0


COMMANDS = {
    'graph': cmd_graph,
    'derive': cmd_derive,
    'verify': cmd_verify,
    'transform': cmd_transform,
    'classify': cmd_classify,
    'search': cmd_search,
    'census': cmd_census,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='algcon',
        description='algcon - graphical constraints of linear structural equation models'
    )
    parser.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    parser.add_argument('--threads', type=int, default=1, help='Worker processes for census (default: 1)')
    parser.add_argument(
        '--format',
        type=str,
        choices=['text', 'json', 'markdown', 'all'],
        default=None,
        help='Output format (default: json for constraints, text for reports)'
    )
    parser.add_argument('--config', type=str, help='JSON file overriding toolkit constants')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v for INFO, -vv for DEBUG')

    sub = parser.add_subparsers(dest='command')

    p = sub.add_parser('graph', help='Graph summary: predicates, family, constraints')
    p.add_argument('--graph', required=True, help='Graph file')
    p.add_argument('--trials', type=int, default=None, help='Also run a vanishing battery of this size')

    p = sub.add_parser('derive', help='Derive graphical constraints')
    p.add_argument('--graph', required=True, help='Graph file')
    p.add_argument('--family', help='Identifying family JSON')
    p.add_argument('--pair', help="Constraint pair 'v,w'")
    p.add_argument('--a-minor', dest='a_minor', help='Emit the constraint representing |A^(v)| instead')

    p = sub.add_parser('verify', help='Check a constraint against model and off-model samples')
    p.add_argument('--graph', required=True, help='Graph file')
    p.add_argument('--constraint', required=True, help='Constraint JSON')
    p.add_argument('--trials', type=int, default=None, help='Battery size (default: from config)')
    p.add_argument('--covariance', help='Evaluate one covariance file instead of a battery')

    p = sub.add_parser('transform', help='Simplify a tree-shaped constraint')
    p.add_argument('--constraint', required=True, help='Constraint JSON')
    p.add_argument('--all-orders', dest='all_orders', action='store_true',
                   help='Report every distinct fixed point')
    p.add_argument('--graph', help='Model graph: the core is the component vanishing on its samples')

    p = sub.add_parser('classify', help='PD-primary and I-primary certificates')
    p.add_argument('--graph', required=True, help='Graph file')
    p.add_argument('--family', help='Identifying family JSON')
    p.add_argument('--core', help='Reference core constraint JSON')

    p = sub.add_parser('search', help='Brute-force search for graphical constraints')
    p.add_argument('--target', help='Polynomial file')
    p.add_argument('--vars', help='Comma-separated model variables')
    p.add_argument('--graph', help='Search constraints vanishing on this graph instead')
    p.add_argument('--max-slots', dest='max_slots', type=int, default=None)
    p.add_argument('--max-nodes', dest='max_nodes', type=int, default=None)
    p.add_argument('--trees-only', dest='trees_only', action='store_true')
    p.add_argument('--mode', choices=['exact', 'up-to-scalar'], default='up-to-scalar')
    p.add_argument('--limit', type=int, default=None, help='Stop after this many constraints')

    p = sub.add_parser('census', help='Census of algebraic equivalence classes')
    p.add_argument('--nodes', type=int, required=True)
    p.add_argument('--edges', type=int, required=True)
    p.add_argument('--edges-mode', dest='edges_mode', choices=['exact', 'at-least'], default='exact')
    p.add_argument('--bows', action='store_true', help='Allow bows')
    p.add_argument('--cycles', action='store_true', help='Allow directed cycles')
    p.add_argument('--one-constraint', dest='one_constraint', action='store_true')
    p.add_argument('--checkpoint', help='JSON lines file for resuming')
    p.add_argument('--max-graphs', dest='max_graphs', type=int, default=None,
                   help='Analyze at most this many graphs (partial report)')
    p.add_argument('--resolve-non-htc', dest='resolve_non_htc', action='store_true',
                   help='Search constraints for graphs without an identifying family')
    p.add_argument('--output-dir', dest='output_dir', default='reports',
                   help='Output directory for reports (default: reports)')

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Главная функция CLI"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        safe_print("\n❌ Error: Please specify a subcommand")
        return 1

    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')

    try:
        config = load_config(args.config) if args.config else DEFAULT_CONFIG
        if args.format is None and args.command in ('graph',):
            args.format = 'text'
        return COMMANDS[args.command](args, config)
    except FileNotFoundError as e:
        safe_print(f"❌ Error: File not found: {e.filename}")
        return 1
    except ValueError as e:
        safe_print(f"❌ Error: {e}")
        return 1


if __name__ == '__main__':
    sys.exit(main())
