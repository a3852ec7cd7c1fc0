"""
Тесты для CLI (main)
"""
import json

import pytest

from config import DEFAULT_CONFIG
from constraint import constraint_from_dict, constraint_from_json, constraint_to_json, make_constraint
from construct import derive_constraint
from graph import serialize_graph
from htc import constraint_pairs
from main import main
from oracle import sample_covariance_mod_p, vanishes_mod_p


@pytest.fixture
def worked_path(tmp_path, worked_graph):
    path = tmp_path / "worked_graph.txt"
    path.write_text(serialize_graph(worked_graph), encoding='utf-8')
    return str(path)


def json_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.startswith('{')]


def test_no_command(capsys):
    """Тест: запуск без подкоманды"""
    assert main([]) == 1
    assert "Please specify a subcommand" in capsys.readouterr().out


def test_graph_command(capsys, worked_path):
    """Тест: текстовая сводка по графу"""
    assert main(['graph', '--graph', worked_path]) == 0
    out = capsys.readouterr().out
    assert "HTC-identifiable" in out
    assert "Y_d = {b}" in out


def test_graph_command_json(capsys, worked_path):
    """Тест: сводка по графу в JSON с батареей"""
    assert main(['--format', 'json', 'graph', '--graph', worked_path, '--trials', '3']) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary['htc'] is True
    assert summary['constraint_count'] == 1
    assert summary['constraints'][0]['battery']['model_pass'] == 3


def test_derive(capsys, worked_path, worked_constraint):
    """Тест: вывод ограничения в JSON"""
    assert main(['derive', '--graph', worked_path]) == 0
    lines = [line for line in capsys.readouterr().out.splitlines() if line.startswith('{')]
    assert len(lines) == 1
    assert constraint_from_json(lines[0]) == worked_constraint


def test_derive_a_minor(capsys, worked_path):
    """Тест: ограничение |A^(v)| и пустой определитель"""
    assert main(['derive', '--graph', worked_path, '--a-minor', 'a']) == 0
    assert "pa(a) is empty" in capsys.readouterr().out

    assert main(['derive', '--graph', worked_path, '--a-minor', 'd']) == 0
    data = json_lines(capsys.readouterr().out)[0]
    assert data['partA'][0]['label'] == ['a', 'b']


def test_derive_bad_pair(capsys, worked_path):
    """Тест: пара без ограничения"""
    assert main(['derive', '--graph', worked_path, '--pair', 'a,b']) == 1
    assert "❌ Error" in capsys.readouterr().out
    assert main(['derive', '--graph', worked_path, '--pair', 'abc']) == 1


def test_missing_file(capsys):
    """Тест: файл графа не найден"""
    assert main(['derive', '--graph', 'no_such_graph.txt']) == 1
    assert "File not found" in capsys.readouterr().out


def test_verify(capsys, tmp_path, worked_path, worked_constraint):
    """Тест: батарея и проверка одной ковариационной матрицы"""
    constraint_path = tmp_path / "worked_constraint.json"
    constraint_path.write_text(constraint_to_json(worked_constraint), encoding='utf-8')

    assert main(['verify', '--graph', worked_path, '--constraint', str(constraint_path), '--trials', '5']) == 0
    battery = json.loads(capsys.readouterr().out)
    assert battery['model_pass'] == 5

    cov_path = tmp_path / "identity.cov"
    cov_path.write_text("a b c d\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n", encoding='utf-8')
    assert main(['verify', '--graph', worked_path, '--constraint', str(constraint_path),
                 '--covariance', str(cov_path)]) == 0
    assert json_lines(capsys.readouterr().out)[0]['satisfied'] is True


def test_transform(capsys, tmp_path, split_example):
    """Тест: упрощение отщепляет один множитель"""
    path = tmp_path / "split.json"
    path.write_text(constraint_to_json(split_example), encoding='utf-8')
    assert main(['transform', '--constraint', str(path)]) == 0
    result = json_lines(capsys.readouterr().out)
    assert len(result) == 1
    assert len(result[0]['factors']) == 1


def test_classify(capsys, worked_path):
    """Тест: сертификаты для разобранного примера"""
    assert main(['classify', '--graph', worked_path]) == 0
    result = json_lines(capsys.readouterr().out)[0]
    assert result['pair'] == ['c', 'd']
    assert result['pd_primary']['verdict'] == 'certified'
    assert result['i_primary']['verdict'] == 'certified'


def test_classify_large_core_and_zero_reference(capsys, tmp_path, worked_path):
    """Тест: ядро больше expansion_cap и нулевой эталон дают вердикт, а не ошибку"""
    config = tmp_path / "config.json"
    config.write_text('{"expansion_cap": 2}', encoding='utf-8')
    assert main(['--config', str(config), 'classify', '--graph', worked_path]) == 0
    result = json_lines(capsys.readouterr().out)[0]
    assert result['pair'] == ['c', 'd']
    assert result['pd_primary']['verdict'] in ('certified', 'unknown')
    assert result['i_primary']['verdict'] in ('certified', 'unknown')

    zero = make_constraint([('t1', 'ab'), ('t3', 'd')], [('t2', 'c'), ('t4', 'ef')],
                           [('t1', 't2'), ('t3', 't2'), ('t3', 't4')])
    core = tmp_path / "zero.json"
    core.write_text(constraint_to_json(zero), encoding='utf-8')
    assert main(['classify', '--graph', worked_path, '--core', str(core)]) == 0
    result = json_lines(capsys.readouterr().out)[0]
    assert result['pd_primary'] == {'verdict': 'unknown'}


def test_transform_with_graph(capsys, tmp_path, factor_graph, factor_family):
    """Тест: с графом модели ядро обращается в ноль на модельных выборках"""
    raw = derive_constraint(factor_graph, factor_family,
                            next(p for p in constraint_pairs(factor_graph, factor_family) if set(p) == {'a', 'c'}))
    path = tmp_path / "raw.json"
    path.write_text(constraint_to_json(raw), encoding='utf-8')
    graph = tmp_path / "graph.txt"
    graph.write_text(serialize_graph(factor_graph), encoding='utf-8')
    assert main(['transform', '--constraint', str(path), '--graph', str(graph)]) == 0
    result = json_lines(capsys.readouterr().out)[0]
    core = constraint_from_dict(result['core'])
    assert vanishes_mod_p(core, sample_covariance_mod_p(factor_graph, 3), DEFAULT_CONFIG.prime)


def test_search(capsys, tmp_path):
    """Тест: поиск ограничения по многочлену"""
    target = tmp_path / "target.txt"
    target.write_text("+1 s[a,b]\n", encoding='utf-8')
    assert main(['search', '--target', str(target), '--vars', 'a,b', '--max-nodes', '2', '--max-slots', '1']) == 0
    assert len(json_lines(capsys.readouterr().out)) == 1

    assert main(['search', '--vars', 'a,b']) == 1


def test_census(capsys, tmp_path):
    """Тест: перепись с сохранением всех форматов"""
    code = main(['--format', 'all', 'census', '--nodes', '2', '--edges', '0', '--edges-mode', 'at-least',
                 '--output-dir', str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "EQUIVALENCE CLASS CENSUS" in out
    for suffix in ('txt', 'json', 'md'):
        assert (tmp_path / f"census_n2_m0.{suffix}").exists()
    report = json.loads((tmp_path / "census_n2_m0.json").read_text(encoding='utf-8'))
    assert report['summary']['class_count'] == 2


def test_bad_config(capsys, tmp_path, worked_path):
    """Тест: неизвестный ключ в файле настроек"""
    path = tmp_path / "config.json"
    path.write_text('{"colour": 1}', encoding='utf-8')
    assert main(['--config', str(path), 'derive', '--graph', worked_path]) == 1
    assert "Unknown config keys: colour" in capsys.readouterr().out
