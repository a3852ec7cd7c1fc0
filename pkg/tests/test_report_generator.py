"""
Тесты для модуля report_generator
"""
import copy
import json

import pytest

from graph import parse_graph
from main import graph_summary
from report_generator import ReportGenerator, validate_report


@pytest.fixture
def sample_report():
    """Примерный отчёт переписи для тестирования"""
    return {
        'schema_version': 1,
        'parameters': {
            'nodes': 2, 'edges': 0, 'edges_mode': 'at-least', 'bows': False, 'cycles': False,
            'one_constraint': False, 'seed': 0,
        },
        'coverage': {'graphs_enumerated': 4, 'representatives': 3, 'analyzed': 3, 'complete': True},
        'classes': [
            {
                'id': 'C001', 'status': 'htc', 'evidence': 'signature', 'members': 2, 'htc_members': 2,
                'graphs': ['n=2;d=0>1;b=', 'n=2;d=;b=0-1'], 'constraint_count': 0, 'degrees': [],
                'best_constraints': [], 'best_polynomials': [], 'tree': None,
                'raw_not_pd_members': 0, 'simplified_not_pd_members': 0, 'i_primary': 'certified',
                'primary_form': 'n/a', 'pd_primary_form': 'n/a',
            },
            {
                'id': 'C002', 'status': 'htc', 'evidence': 'signature', 'members': 1, 'htc_members': 1,
                'graphs': ['n=2;d=;b='], 'constraint_count': 1, 'degrees': [1],
                'best_constraints': [{'partA': [{'id': 't1', 'label': ['a']}],
                                      'partB': [{'id': 't2', 'label': ['b']}],
                                      'edges': [['t1', 't2']]}],
                'best_polynomials': ['+1 s[a,b]'], 'tree': True,
                'raw_not_pd_members': 0, 'simplified_not_pd_members': 0, 'i_primary': 'certified',
                'primary_form': 'tree', 'pd_primary_form': 'tree',
            },
        ],
        'summary': {
            'class_count': 2, 'raw_not_pd_classes': 0, 'simplified_not_pd_classes': 0,
            'non_htc_classes': 0, 'unresolved_classes': 0,
        },
        'table': [
            {'primary': 'tree', 'pd_primary': 'tree', 'count': 1},
            {'primary': 'nontree', 'pd_primary': 'tree', 'count': 0},
            {'primary': 'n/a', 'pd_primary': 'n/a', 'count': 1},
        ],
        'invariant_violations': [],
    }


def test_validate_report(sample_report):
    """Тест: корректный отчёт проходит проверку схемы"""
    assert validate_report(sample_report) == []


def test_validate_report_errors(sample_report):
    """Тест: пропущенные ключи и неверные типы"""
    broken = copy.deepcopy(sample_report)
    del broken['summary']
    broken['parameters']['nodes'] = True
    broken['classes'][1]['degrees'] = 1
    errors = validate_report(broken)
    assert "report: 'summary' is a required property" in errors
    assert "report.parameters.nodes: True is not of type 'integer'" in errors
    assert "report.classes[1].degrees: 1 is not of type 'array'" in errors
    assert len(errors) == 3


def test_validate_report_enums_and_extra_keys(sample_report):
    """Тест: неизвестные значения перечислений и лишние ключи отклоняются"""
    broken = copy.deepcopy(sample_report)
    broken['classes'][0]['status'] = 'guessed'
    broken['table'][0]['primary'] = 'forest'
    broken['coverage']['extra'] = 1
    errors = validate_report(broken)
    assert len(errors) == 3
    assert any(e.startswith("report.classes[0].status: 'guessed' is not one of") for e in errors)
    assert any(e.startswith("report.table[0].primary: 'forest' is not one of") for e in errors)
    assert any(e.startswith("report.coverage: Additional properties are not allowed") for e in errors)

    missing_tree = copy.deepcopy(sample_report)
    del missing_tree['classes'][1]['tree']
    assert validate_report(missing_tree) == ["report.classes[1]: 'tree' is a required property"]


def test_table_frame_total(sample_report):
    """Тест: строка total равна сумме строк таблицы"""
    frame = ReportGenerator.table_frame(sample_report)
    assert len(frame) == 4
    total = frame.iloc[-1]
    assert total['primary'] == 'total'
    assert total['count'] == 2


def test_generate_text_report(sample_report):
    """Тест: генерация текстового отчёта"""
    report = ReportGenerator.generate_text_report(sample_report)

    assert isinstance(report, str)
    assert 'EQUIVALENCE CLASS CENSUS' in report
    assert 'Complete census' in report
    assert 'total' in report
    assert 'C002' in report
    assert 'All invariant checks passed' in report


def test_text_report_violations(sample_report):
    """Тест: нарушения попадают в отчёт"""
    sample_report['invariant_violations'] = ['cross-vanishing fails between x and y']
    sample_report['coverage']['complete'] = False
    report = ReportGenerator.generate_text_report(sample_report)
    assert '1 invariant violation(s)' in report
    assert 'cross-vanishing fails between x and y' in report
    assert 'Partial census' in report


def test_generate_json_report(sample_report):
    """Тест: JSON отчёт без потерь"""
    report = ReportGenerator.generate_json_report(sample_report)
    assert json.loads(report) == sample_report


def test_generate_markdown_report(sample_report):
    """Тест: генерация Markdown отчёта"""
    report = ReportGenerator.generate_markdown_report(sample_report)

    assert isinstance(report, str)
    assert '# Census: 2 nodes, 0 edges (at-least)' in report
    assert '| Primary | PD-primary | Classes |' in report
    assert '| total |  | 2 |' in report
    assert '| C002 | 1 | 1 |' in report
    assert 'Invariant Violations' not in report


def test_generate_constraint_report(worked_graph):
    """Тест: отчёт по одному графу"""
    summary = graph_summary(worked_graph, trials=5)
    report = ReportGenerator.generate_constraint_report(summary)
    assert 'HTC-identifiable' in report
    assert "Constraint for pair ['c', 'd']" in report
    assert 'Model samples passed:    5/5' in report


def test_constraint_report_non_htc():
    """Тест: граф без идентифицирующего семейства"""
    summary = graph_summary(parse_graph("nodes a b\ndir a b\nbi a b\n"))
    report = ReportGenerator.generate_constraint_report(summary)
    assert 'Not HTC-identifiable' in report
