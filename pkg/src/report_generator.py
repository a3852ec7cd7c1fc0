"""
Модуль генерации отчётов переписи и отчётов по одному графу
"""
import json
from datetime import datetime
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List

import jsonschema
import pandas as pd

SCHEMA_PATH = Path(__file__).with_name('census_report.schema.json')


@lru_cache(maxsize=1)
def report_schema() -> Dict[str, Any]:
    """JSON Schema отчёта переписи"""
    with open(SCHEMA_PATH, 'r', encoding='utf-8') as f:
        return json.load(f)


def _error_path(error: jsonschema.ValidationError) -> str:
    path = "report"
    for part in error.absolute_path:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path


def validate_report(report: Dict[str, Any]) -> List[str]:
    """
    Проверка отчёта переписи по JSON Schema

    Returns:
        Список расхождений вида "report.path: сообщение" (пустой - отчёт корректен)
    """
    validator = jsonschema.Draft7Validator(report_schema())
    return sorted(f"{_error_path(e)}: {e.message}" for e in validator.iter_errors(report))


class ReportGenerator:
    """Класс для генерации отчётов в разных форматах"""

    @staticmethod
    def table_frame(report: Dict[str, Any]) -> pd.DataFrame:
        """Таблица классов по (примарной, PD-примарной) форме со строкой total"""
        frame = pd.DataFrame(report['table'], columns=['primary', 'pd_primary', 'count'])
        total = pd.DataFrame([{'primary': 'total', 'pd_primary': '', 'count': int(frame['count'].sum())}])
        return pd.concat([frame, total], ignore_index=True)

    @staticmethod
    def classes_frame(report: Dict[str, Any]) -> pd.DataFrame:
        """Одна строка на класс: основные колонки для просмотра"""
        columns = ['id', 'status', 'members', 'constraint_count', 'degrees', 'tree',
                   'raw_not_pd_members', 'simplified_not_pd_members', 'i_primary',
                   'primary_form', 'pd_primary_form']
        rows = [{c: row.get(c) for c in columns} for row in report['classes']]
        return pd.DataFrame(rows, columns=columns)

    @staticmethod
    def generate_text_report(report: Dict[str, Any]) -> str:
        """
        Генерация текстового отчёта переписи

        Args:
            report: результат study.census

        Returns:
            Отчёт в текстовом формате; таблица повторяет строки
            (примарная форма, PD-примарная форма) и завершается строкой total
        """
        params = report['parameters']
        coverage = report['coverage']
        summary = report['summary']

        lines = []
        lines.append("=" * 70)
        lines.append("📊 EQUIVALENCE CLASS CENSUS")
        lines.append("=" * 70)
        lines.append(f"Nodes: {params['nodes']}   Edges: {params['edges']} ({params['edges_mode']})")
        lines.append(f"Bows: {'yes' if params['bows'] else 'no'}   "
                     f"Cycles: {'yes' if params['cycles'] else 'no'}   "
                     f"One constraint: {'yes' if params['one_constraint'] else 'no'}")
        lines.append(f"Seed: {params['seed']}")
        lines.append(f"Date: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
        lines.append("=" * 70)
        lines.append("")

        lines.append("🔎 Coverage:")
        lines.append(f"  Graphs enumerated:    {coverage['graphs_enumerated']}")
        lines.append(f"  Up to isomorphism:    {coverage['representatives']}")
        lines.append(f"  Analyzed:             {coverage['analyzed']}")
        if coverage['complete']:
            lines.append("  ✅ Complete census")
        else:
            lines.append("  ⚠️  Partial census: graph budget exhausted")
        lines.append("")

        lines.append("📈 Fingerprint classes:")
        lines.append(ReportGenerator.table_frame(report).to_string(index=False))
        lines.append("")

        lines.append("📝 Summary:")
        lines.append(f"  Classes:                         {summary['class_count']}")
        lines.append(f"  Raw output not PD-certified:     {summary['raw_not_pd_classes']}")
        lines.append(f"  After simplify not PD-certified: {summary['simplified_not_pd_classes']}")
        lines.append(f"  Without HTC members:             {summary['non_htc_classes']}")
        lines.append(f"  Unresolved:                      {summary['unresolved_classes']}")
        lines.append("")

        if report['classes']:
            lines.append("🧩 Classes:")
            lines.append(ReportGenerator.classes_frame(report).to_string(index=False))
            lines.append("")

        violations = report['invariant_violations']
        if violations:
            lines.append(f"❌ {len(violations)} invariant violation(s):")
            for v in violations:
                lines.append(f"  • {v}")
        else:
            lines.append("✅ All invariant checks passed")
        lines.append("")
        lines.append("=" * 70)

        return "\n".join(lines)

    @staticmethod
    def generate_json_report(report: Dict[str, Any]) -> str:
        """Генерация JSON отчёта (без потерь)"""
        return json.dumps(report, indent=2, ensure_ascii=False)

    @staticmethod
    def generate_markdown_report(report: Dict[str, Any]) -> str:
        """
        Генерация Markdown отчёта

        Args:
            report: результат study.census

        Returns:
            Отчёт в Markdown формате
        """
        params = report['parameters']
        lines = []
        lines.append(f"# Census: {params['nodes']} nodes, {params['edges']} edges ({params['edges_mode']})")
        lines.append("")
        lines.append(f"**Date:** {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
        lines.append("")

        lines.append("## 📈 Fingerprint Classes")
        lines.append("")
        lines.append("| Primary | PD-primary | Classes |")
        lines.append("|---------|------------|---------|")
        for _, row in ReportGenerator.table_frame(report).iterrows():
            lines.append(f"| {row['primary']} | {row['pd_primary']} | {row['count']} |")
        lines.append("")

        lines.append("## 🧩 Classes")
        lines.append("")
        lines.append("| Class | Members | Degrees | Raw not PD | Simplified not PD | I-primary |")
        lines.append("|-------|---------|---------|------------|-------------------|-----------|")
        for row in report['classes']:
            degrees = ", ".join(str(d) for d in row['degrees']) or "-"
            lines.append(f"| {row['id']} | {row['members']} | {degrees} | {row['raw_not_pd_members']} "
                         f"| {row['simplified_not_pd_members']} | {row['i_primary']} |")
        lines.append("")

        if report['invariant_violations']:
            lines.append("## ❌ Invariant Violations")
            lines.append("")
            for v in report['invariant_violations']:
                lines.append(f"- {v}")
            lines.append("")

        return "\n".join(lines)

    @staticmethod
    def generate_constraint_report(summary: Dict[str, Any]) -> str:
        """
        Текстовый отчёт по одному графу

        Args:
            summary: словарь graph / family / constraints / battery
                (см. main.graph_summary)
        """
        lines = []
        lines.append("=" * 70)
        lines.append(f"🔍 GRAPH: {summary['canonical']}")
        lines.append("=" * 70)
        lines.append(f"Nodes: {', '.join(summary['nodes'])}")
        lines.append(f"Directed:   {', '.join(summary['directed']) or '-'}")
        lines.append(f"Bidirected: {', '.join(summary['bidirected']) or '-'}")
        lines.append(f"Acyclic: {summary['acyclic']}   Bow-free: {summary['bow_free']}   "
                     f"Ancestral: {summary['ancestral']}")
        lines.append("")

        if summary['family'] is None:
            lines.append("⚠️  Not HTC-identifiable: no identifying family found")
        else:
            lines.append("✅ HTC-identifiable")
            for v, ys in summary['family']['sets'].items():
                lines.append(f"  Y_{v} = {{{', '.join(ys)}}}")
        lines.append("")

        for item in summary.get('constraints', []):
            lines.append(f"🧩 Constraint for pair {item['pair']}:")
            lines.append(item['drawing'])
            if item.get('polynomial'):
                lines.append(f"  det = {item['polynomial']}")
            battery = item.get('battery')
            if battery:
                lines.append(f"  Model samples passed:    {battery['model_pass']}/{battery['trials']}")
                lines.append(f"  Off-model rejected:      {battery['offmodel_reject']}/{battery['trials']}")
            lines.append("")

        lines.append("=" * 70)
        return "\n".join(lines)
