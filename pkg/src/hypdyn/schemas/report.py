# schemas/report.py
from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Set

from pydantic import BaseModel, Field, field_validator, model_validator

from hypdyn.config.settings import Tolerances
from hypdyn.errors import ConfigurationError

SCHEMA_VERSION = "hypdyn/1"
EMIT_KINDS = ("csv", "json", "svg")


class ExperimentConfig(BaseModel):
    """
    Pydantic модель конфигурации одного запуска CLI.
    """
    command: Literal["trace", "classify", "blaschke", "foliation", "report"]
    tower: Optional[Path] = Field(None, description="Путь к JSON-описанию башни")
    horizon: Optional[int] = Field(None, ge=0, le=4096, description="Горизонт (по умолчанию из башни)")
    levels: Optional[int] = Field(None, ge=0, description="Уровни модели Бляшке")
    eps: Optional[float] = Field(None, gt=0.0, description="Порог тонкой части для поглощающих колец")
    tolerances: Dict[str, float] = Field(default_factory=dict, description="Переопределения допусков")
    out: Path = Field(Path("hypdyn_out"), description="Каталог результатов")
    emit: Set[str] = Field(default_factory=lambda: {"json"})

    @field_validator("emit")
    @classmethod
    def _known_emit(cls, v: Set[str]) -> Set[str]:
        unknown = set(v) - set(EMIT_KINDS)
        if unknown:
            raise ValueError(f"unknown emit kinds: {sorted(unknown)}")
        return v

    @model_validator(mode="after")
    def _ordered_tolerances(self) -> "ExperimentConfig":
        try:
            self.effective_tolerances()
        except ConfigurationError as e:
            raise ValueError(str(e)) from e
        return self

    def effective_tolerances(self) -> Tolerances:
        return Tolerances.from_env().with_overrides(**self.tolerances)

    model_config = {
        "json_schema_extra": {
            "example": {
                "command": "classify",
                "tower": "data/towers/power_annulus.json",
                "horizon": 64,
                "tolerances": {"zero": 1e-6},
                "out": "hypdyn_out",
                "emit": ["json", "svg"],
            }
        }
    }


class Report(BaseModel):
    """Конверт JSON-отчёта: версия схемы, команда, действующие настройки, результат."""
    schema_: str = Field(SCHEMA_VERSION, alias="schema")
    command: str
    tower: Optional[str] = None
    settings: Dict[str, Any] = Field(default_factory=dict)
    result: Dict[str, Any] = Field(default_factory=dict)
    exit_code: int = 0

    model_config = {"populate_by_name": True}

    def as_dict(self) -> Dict[str, Any]:
        return self.model_dump(by_alias=True)


class LevelRecord(BaseModel):
    level: int = Field(..., ge=0)
    a: float = Field(..., gt=0.0, lt=1.0)
    r: float = Field(..., gt=0.0, lt=1.0)
    eps: float = Field(..., gt=0.0)
    critical_point: float
    critical_value: float
    clearance: Dict[str, float]


class ComponentRecord(BaseModel):
    origin: str
    created: int
    inside: List[float]
    samples: int
    boundary: List[List[float]]


class RegionCell(BaseModel):
    k: int = Field(..., ge=0)
    n: int = Field(..., ge=0)
    components: List[ComponentRecord]


class RegionTable(BaseModel):
    """Pydantic модель JSON-таблицы множеств A_k^n модели Бляшке."""
    schema_: str = Field(SCHEMA_VERSION, alias="schema")
    kind: Literal["blaschke_regions"] = "blaschke_regions"
    levels: List[LevelRecord]
    regions: List[RegionCell]
    log: List[str] = Field(default_factory=list)
    stopped: Optional[str] = None

    model_config = {"populate_by_name": True}

    @model_validator(mode="after")
    def _increasing_radii(self) -> "RegionTable":
        radii = [lvl.r for lvl in self.levels]
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("radii r_m must increase strictly")
        return self
