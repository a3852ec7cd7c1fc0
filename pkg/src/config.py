"""
Модуль настроек инструментария algcon
"""
import json
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict

from errors import AlgconError


@dataclass(frozen=True)
class ToolkitConfig:
    """Все настраиваемые константы в одном месте"""

    # 2^61 - 1, простое Мерсенна
    prime: int = 2305843009213693951
    fingerprint_points: int = 16
    expansion_cap: int = 8
    permutation_budget: int = 7
    rational_grid: int = 16
    rational_denominator: int = 8
    resample_budget: int = 100
    trials: int = 25
    family_candidate_cap: int = 64
    search_max_slots: int = 6
    search_max_nodes: int = 5

    def with_overrides(self, **overrides: Any) -> "ToolkitConfig":
        """Копия настроек с заменой отдельных полей (None игнорируется)"""
        values = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **values)

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_CONFIG = ToolkitConfig()


def load_config(path: str) -> ToolkitConfig:
    """
    Загрузка настроек из JSON файла

    Args:
        path: путь к JSON объекту с переопределениями

    Returns:
        Настройки: значения по умолчанию, заменённые значениями из файла
    """
    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)

    if not isinstance(data, dict):
        raise AlgconError(f"Config {Path(path).name} must be a JSON object")

    known = {f.name for f in fields(ToolkitConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise AlgconError(f"Unknown config keys: {', '.join(unknown)}")

    if data.get('prime', DEFAULT_CONFIG.prime) <= 2 ** 31:
        raise AlgconError("Fingerprint prime must exceed 2^31")
    if data.get('fingerprint_points', DEFAULT_CONFIG.fingerprint_points) < 8:
        raise AlgconError("Fingerprints need at least 8 evaluation points")

    return DEFAULT_CONFIG.with_overrides(**data)
