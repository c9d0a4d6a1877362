# hypdyn/config/settings.py
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict

from dotenv import load_dotenv

from hypdyn.errors import ConfigurationError

# Переменные окружения читаются из .env один раз при импорте модуля.
load_dotenv()


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError as e:
        raise ConfigurationError(f"{name}={raw!r} is not a number") from e


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigurationError(f"{name}={raw!r} is not an integer") from e


@dataclass(frozen=True, slots=True)
class Tolerances:
    """
    Набор допусков классификации.

    Атрибуты:
        iso (float): порог изометричности шага, 1 − λ_n < iso. HYPDYN_TOL_ISO.
        zero (float): расстояние, считающееся нулём на горизонте. HYPDYN_TOL_ZERO.
        const (float): допуск «в итоге постоянной» последовательности. HYPDYN_TOL_CONST.
        thin (float): порог тонкой части (константа Маргулиса). HYPDYN_TOL_THIN.
        divergence (float): порог расходимости частичных сумм Σ(1 − λ_n). HYPDYN_TOL_DIVERGENCE.
        tail_ratio (float): запас суммируемости подогнанного отношения q < 1 − tail_ratio.
        monotone_slack (float): допуск монотонности d_{n+1} ≤ d_n + slack.
        e_pair (float): совпадение образов пары (множество E).

    Порядок zero > const > iso > 0 проверяется при создании.
    """
    iso:            float = field(default_factory=lambda: _env_float("HYPDYN_TOL_ISO", 1e-12))
    zero:           float = field(default_factory=lambda: _env_float("HYPDYN_TOL_ZERO", 1e-6))
    const:          float = field(default_factory=lambda: _env_float("HYPDYN_TOL_CONST", 1e-9))
    thin:           float = field(default_factory=lambda: _env_float("HYPDYN_TOL_THIN", 0.2))
    divergence:     float = field(default_factory=lambda: _env_float("HYPDYN_TOL_DIVERGENCE", 50.0))
    tail_ratio:     float = field(default_factory=lambda: _env_float("HYPDYN_TOL_TAIL_RATIO", 1e-3))
    monotone_slack: float = field(default_factory=lambda: _env_float("HYPDYN_TOL_MONOTONE_SLACK", 1e-10))
    e_pair:         float = field(default_factory=lambda: _env_float("HYPDYN_TOL_E_PAIR", 1e-12))

    def __post_init__(self) -> None:
        if not (self.zero > self.const > self.iso > 0):
            raise ConfigurationError(
                f"tolerances must satisfy zero > const > iso > 0 "
                f"(got zero={self.zero}, const={self.const}, iso={self.iso})"
            )
        if self.thin <= 0 or self.divergence <= 0:
            raise ConfigurationError("thin and divergence thresholds must be positive")
        if not (0 < self.tail_ratio < 1):
            raise ConfigurationError("tail_ratio must lie in (0, 1)")

    @classmethod
    def from_env(cls) -> "Tolerances":
        """Создаёт набор допусков из переменных окружения (или значений по умолчанию)."""
        return cls()

    def with_overrides(self, **overrides: float) -> "Tolerances":
        """Возвращает проверенную копию с заменёнными полями; None-значения игнорируются."""
        clean = {k: float(v) for k, v in overrides.items() if v is not None}
        unknown = set(clean) - set(self.as_dict())
        if unknown:
            raise ConfigurationError(f"unknown tolerance keys: {sorted(unknown)}")
        return replace(self, **clean)

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True, slots=True)
class TraceSettings:
    """Параметры вычисления трасс башни."""
    horizon:          int   = field(default_factory=lambda: _env_int("HYPDYN_HORIZON", 64))
    horizon_cap:      int   = 4096
    boundary_guard:   float = 1e-10
    boundary_samples: int   = 64
    fd_step:          float = 1e-6
    fd_rtol:          float = 1e-6
    modality_samples: int   = field(default_factory=lambda: _env_int("HYPDYN_MODALITY_SAMPLES", 24))
    seed:             int   = field(default_factory=lambda: _env_int("HYPDYN_SEED", 20240611))

    def __post_init__(self) -> None:
        if self.horizon < 0:
            raise ConfigurationError("horizon must be non-negative")
        if self.horizon > self.horizon_cap:
            raise ConfigurationError(f"horizon {self.horizon} exceeds cap {self.horizon_cap}")

    @classmethod
    def from_env(cls) -> "TraceSettings":
        return cls()


@dataclass(frozen=True, slots=True)
class BlaschkeSettings:
    """Параметры построения модельной башни Бляшке."""
    samples:              int   = field(default_factory=lambda: _env_int("HYPDYN_BLASCHKE_SAMPLES", 512))
    refine_spacing:       float = 1e-2
    max_samples:          int   = 8192
    radius_margin:        float = 1e-3
    parameter_margin:     float = 1e-3
    branch_margin_factor: float = 10.0
    levels_cap:           int   = 8
    gap:                  float = 1e-9

    @classmethod
    def from_env(cls) -> "BlaschkeSettings":
        return cls()


@dataclass(frozen=True, slots=True)
class StoreConfig:
    """
    Конфигурация хранилища запусков (SQLAlchemy).

    Атрибуты:
        url (str): строка подключения SQLAlchemy. HYPDYN_DB_URL, по умолчанию локальный SQLite.
        enabled (bool): писать ли запуски в хранилище. HYPDYN_STORE ("1"/"0").
    """
    url:     str  = field(default_factory=lambda: os.getenv("HYPDYN_DB_URL", "sqlite:///hypdyn_runs.sqlite3"))
    enabled: bool = field(default_factory=lambda: os.getenv("HYPDYN_STORE", "0") in {"1", "true", "yes"})

    @property
    def is_sqlite(self) -> bool:
        return self.url.startswith("sqlite")

    @classmethod
    def from_env(cls) -> "StoreConfig":
        return cls()


def effective_settings(tolerances: Tolerances, trace: TraceSettings) -> Dict[str, Any]:
    """Словарь действующих настроек, встраиваемый в отчёты."""
    return {"tolerances": tolerances.as_dict(), "horizon": trace.horizon, "seed": trace.seed}
