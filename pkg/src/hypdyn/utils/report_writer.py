# hypdyn/utils/report_writer.py
"""
Запись трасс (CSV) и отчётов (JSON).

В CSV числа печатаются с 17 значащими цифрами, в JSON через json.dumps; порядок
полей фиксирован порядком вставки, неконечные значения в JSON записываются как null.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import is_dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def to_jsonable(obj: Any) -> Any:
    """Приводит numpy-типы, комплексные числа, пути и объекты с as_dict() к JSON-структурам."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(float(obj.real)), to_jsonable(float(obj.imag))]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in items]
    if hasattr(obj, "as_dict"):
        return to_jsonable(obj.as_dict())
    if is_dataclass(obj):
        raise TypeError(f"dataclass {type(obj).__name__} has no as_dict()")
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    return json.dumps(to_jsonable(obj), indent=indent, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path: Path, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8")
    logger.info("wrote %s", path)
    return path


def _csv_cell(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v) if math.isfinite(v) else str(float(v)).lower()
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(v) for v in row])
    logger.info("wrote %s", path)
    return path


def spec_hash(path: Path) -> str:
    """SHA-256 текста файла башни."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
