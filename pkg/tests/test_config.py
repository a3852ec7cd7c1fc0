"""
Тесты для модуля config
"""
import json

import pytest

from config import DEFAULT_CONFIG, load_config
from errors import AlgconError


def test_defaults():
    """Тест: значения по умолчанию"""
    assert DEFAULT_CONFIG.prime == 2 ** 61 - 1
    assert DEFAULT_CONFIG.prime > 2 ** 31
    assert DEFAULT_CONFIG.fingerprint_points == 16
    assert DEFAULT_CONFIG.expansion_cap == 8
    assert DEFAULT_CONFIG.trials == 25


def test_with_overrides_ignores_none():
    """Тест: None не заменяет значение"""
    config = DEFAULT_CONFIG.with_overrides(trials=5, expansion_cap=None)
    assert config.trials == 5
    assert config.expansion_cap == DEFAULT_CONFIG.expansion_cap
    assert DEFAULT_CONFIG.trials == 25


def test_load_config(tmp_path):
    """Тест: загрузка переопределений из JSON"""
    path = tmp_path / "config.json"
    path.write_text(json.dumps({'trials': 7, 'search_max_slots': 4}), encoding='utf-8')
    config = load_config(str(path))
    assert config.trials == 7
    assert config.search_max_slots == 4
    assert config.to_dict()['prime'] == DEFAULT_CONFIG.prime


def test_load_config_rejects_unknown_keys(tmp_path):
    """Тест: неизвестный ключ"""
    path = tmp_path / "config.json"
    path.write_text(json.dumps({'trails': 7}), encoding='utf-8')
    with pytest.raises(AlgconError):
        load_config(str(path))


def test_load_config_rejects_small_prime(tmp_path):
    """Тест: простое должно быть больше 2^31"""
    for prime in (101, 2 ** 31 - 1):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({'prime': prime}), encoding='utf-8')
        with pytest.raises(AlgconError):
            load_config(str(path))

    path.write_text(json.dumps({'prime': 2 ** 61 - 1}), encoding='utf-8')
    assert load_config(str(path)).prime == 2 ** 61 - 1


def test_load_config_rejects_non_object(tmp_path):
    """Тест: JSON не объект"""
    path = tmp_path / "config.json"
    path.write_text("[1, 2]", encoding='utf-8')
    with pytest.raises(AlgconError):
        load_config(str(path))
