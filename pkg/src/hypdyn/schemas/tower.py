# schemas/tower.py
"""
JSON-описание башни и его разбор в TowerSpec.

Пример:
    {
      "name": "scaling_half",
      "horizon": 64,
      "expected_row": 1,
      "surface": {"kind": "disc"},
      "map": {"family": "scaling", "params": {"c": 0.5}},
      "base_point": [0.0, 0.0],
      "tracked_pairs": [[[0.0, 0.0], [0.5, 0.0]]]
    }

Параметры отображений: число, пара [re, im] или расписание
{"schedule": "one_minus_power", "base": 4}.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, ValidationError, field_validator

from hypdyn.errors import TowerSpecError
from hypdyn.tower.spec import (
    AnnulusGrowthRule,
    AnnulusImageRule,
    CompositeRule,
    Constant,
    DiscRule,
    FamilyRule,
    Geometric,
    ListSchedule,
    MapRule,
    OneMinusInverseSquare,
    OneMinusPower,
    QuotientRule,
    Schedule,
    SurfaceRule,
    SwitchRule,
    TowerSpec,
    annulus_core_point,
)

logger = logging.getLogger(__name__)

Point = Tuple[float, float]


def _complex(p: Point) -> complex:
    return complex(p[0], p[1])


# ---------------------------------------------------------------------------
#  Расписания
# ---------------------------------------------------------------------------

class ConstantSchedule(BaseModel):
    schedule: Literal["constant"]
    value: Union[float, Point]


class OneMinusPowerSchedule(BaseModel):
    schedule: Literal["one_minus_power"]
    base: float = Field(..., gt=1.0, description="λ_k = 1 − base^(−k)")


class OneMinusInverseSquareSchedule(BaseModel):
    schedule: Literal["one_minus_inverse_square"]
    offset: float = Field(2.0, ge=1.5)


class GeometricSchedule(BaseModel):
    schedule: Literal["geometric"]
    start: float
    ratio: float = Field(..., gt=0.0)


class ListScheduleModel(BaseModel):
    schedule: Literal["list"]
    values: List[Union[float, Point]] = Field(..., min_length=1)


ScheduleModel = Annotated[
    Union[ConstantSchedule, OneMinusPowerSchedule, OneMinusInverseSquareSchedule, GeometricSchedule,
          ListScheduleModel],
    Field(discriminator="schedule"),
]
ParamValue = Union[float, Point, ScheduleModel]


def _scalar(v: Union[float, Point]) -> complex | float:
    return _complex(v) if isinstance(v, (tuple, list)) else float(v)


def to_schedule(v: ParamValue) -> Schedule:
    if isinstance(v, (int, float, tuple, list)):
        return Constant(_scalar(v))
    if isinstance(v, ConstantSchedule):
        return Constant(_scalar(v.value))
    if isinstance(v, OneMinusPowerSchedule):
        return OneMinusPower(v.base)
    if isinstance(v, OneMinusInverseSquareSchedule):
        return OneMinusInverseSquare(v.offset)
    if isinstance(v, GeometricSchedule):
        return Geometric(v.start, v.ratio)
    return ListSchedule(tuple(_scalar(x) for x in v.values))


# ---------------------------------------------------------------------------
#  Отображения
# ---------------------------------------------------------------------------

class FamilyMap(BaseModel):
    family: Literal["scaling", "rotation", "blaschke2", "power", "mobius"]
    params: Dict[str, ParamValue] = Field(default_factory=dict)


class CompositeMap(BaseModel):
    family: Literal["composite"]
    parts: List["MapModel"] = Field(..., min_length=1, description="Применяются слева направо")


class SwitchMap(BaseModel):
    family: Literal["switch"]
    at: int = Field(..., ge=0)
    before: "MapModel"
    after: "MapModel"


MapModel = Annotated[Union[FamilyMap, CompositeMap, SwitchMap], Field(discriminator="family")]
CompositeMap.model_rebuild()
SwitchMap.model_rebuild()


def to_map_rule(m: Union[FamilyMap, CompositeMap, SwitchMap]) -> MapRule:
    if isinstance(m, CompositeMap):
        return CompositeRule(tuple(to_map_rule(p) for p in m.parts))
    if isinstance(m, SwitchMap):
        return SwitchRule(m.at, to_map_rule(m.before), to_map_rule(m.after))
    return FamilyRule(m.family, {k: to_schedule(v) for k, v in m.params.items()})


# ---------------------------------------------------------------------------
#  Поверхности
# ---------------------------------------------------------------------------

class DiscSurfaceModel(BaseModel):
    kind: Literal["disc"]


class AnnulusSurfaceModel(BaseModel):
    kind: Literal["round_annulus"]
    log_inner: float = Field(..., gt=0.0, description="log(1/r) внутреннего радиуса уровня 0")
    growth: Union[float, Literal["image"]] = Field(1.0, description="Множитель log(1/r) за уровень или 'image'")

    @field_validator("growth")
    @classmethod
    def _positive_growth(cls, v):
        if v != "image" and not v > 0:
            raise ValueError("growth must be positive or 'image'")
        return v


class QuotientSurfaceModel(BaseModel):
    kind: Literal["cyclic_quotient"]
    lengths: ParamValue = Field(..., description="Длины переноса ℓ_n (или сдвиги для параболических)")
    axis: Tuple[Point, Point] = ((-1.0, 0.0), (1.0, 0.0))
    parabolic_point: Optional[Point] = None


class BlaschkeSurfaceModel(BaseModel):
    kind: Literal["blaschke_model"]
    levels: int = Field(6, ge=0, le=8)
    witnesses: int = Field(2, ge=0, le=8)


SurfaceModelSpec = Annotated[
    Union[DiscSurfaceModel, AnnulusSurfaceModel, QuotientSurfaceModel, BlaschkeSurfaceModel],
    Field(discriminator="kind"),
]


# ---------------------------------------------------------------------------
#  Башня
# ---------------------------------------------------------------------------

class TowerFile(BaseModel):
    """Pydantic модель JSON-файла башни."""
    name: str = Field(..., min_length=1)
    description: str = ""
    horizon: int = Field(64, ge=0, le=4096)
    expected_row: Optional[int] = Field(None, ge=1, le=6)
    surface: SurfaceModelSpec
    map: Optional[MapModel] = None
    base_point: Union[Point, Literal["annulus_core"]] = (0.0, 0.0)
    tracked_pairs: List[Tuple[Point, Point]] = Field(default_factory=list)

    model_config = {
        "json_schema_extra": {
            "example": {
                "name": "power_annulus",
                "horizon": 64,
                "expected_row": 6,
                "surface": {"kind": "round_annulus", "log_inner": 6.283185307179586, "growth": 2},
                "map": {"family": "power", "params": {"degree": 2}},
                "base_point": "annulus_core",
            }
        }
    }

    def surface_rule(self, maps: Optional[MapRule]) -> SurfaceRule:
        s = self.surface
        if isinstance(s, DiscSurfaceModel):
            return DiscRule()
        if isinstance(s, AnnulusSurfaceModel):
            if s.growth == "image":
                return AnnulusImageRule(s.log_inner, maps)
            return AnnulusGrowthRule(s.log_inner, float(s.growth))
        if isinstance(s, QuotientSurfaceModel):
            point = None if s.parabolic_point is None else _complex(s.parabolic_point)
            return QuotientRule(to_schedule(s.lengths), (_complex(s.axis[0]), _complex(s.axis[1])), point)
        raise TowerSpecError("blaschke_model towers are built by the model constructor", "surface")

    def to_tower(self) -> TowerSpec:
        if isinstance(self.surface, BlaschkeSurfaceModel):
            from hypdyn.blaschke.model import build_model_tower, model_tower_spec

            state = build_model_tower(self.surface.levels)
            spec = model_tower_spec(state, self.surface.witnesses)
            spec.name = self.name
            spec.description = self.description or spec.description
            if self.expected_row is not None:
                spec.expected_row = self.expected_row
            spec.tracked_pairs = spec.tracked_pairs + [(_complex(x), _complex(y)) for x, y in self.tracked_pairs]
            return spec
        if self.map is None:
            raise TowerSpecError("a map rule is required for this surface kind", "map")
        maps = to_map_rule(self.map)
        try:
            maps(0)
        except TypeError as e:
            raise TowerSpecError(f"bad map parameters: {e}", "map.params") from e
        surfaces = self.surface_rule(maps)
        tower = TowerSpec(surfaces=surfaces, maps=maps, horizon=self.horizon, name=self.name,
                          description=self.description, expected_row=self.expected_row,
                          tracked_pairs=[(_complex(x), _complex(y)) for x, y in self.tracked_pairs])
        if self.base_point == "annulus_core":
            s0 = tower.surface_at(0)
            if not s0.annulus_type or not hasattr(s0, "log_inner"):
                raise TowerSpecError("annulus_core base point needs a round annulus surface", "base_point")
            tower.base_point = annulus_core_point(s0)
        else:
            tower.base_point = _complex(self.base_point)
        return tower


def _position(loc: Tuple) -> str:
    return ".".join(str(part) for part in loc) or "<root>"


def parse_tower(text: str, source: str = "<string>") -> TowerSpec:
    """Разбирает JSON башни. Ошибки: TowerSpecError с позицией (строка/столбец или JSON-путь)."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise TowerSpecError(f"{source}: {e.msg}", f"line {e.lineno}, column {e.colno}") from e
    try:
        model = TowerFile.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        raise TowerSpecError(f"{source}: {first['msg']}", _position(first["loc"])) from e
    try:
        return model.to_tower()
    except TowerSpecError as e:
        raise TowerSpecError(f"{source}: {e.message}", e.position) from e
    except ValueError as e:
        raise TowerSpecError(f"{source}: {e}", "map") from e


def load_tower(path: str | Path) -> TowerSpec:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"tower file not found: {path}")
    logger.debug("loading tower from %s", path)
    return parse_tower(path.read_text(encoding="utf-8"), str(path))


def shipped_towers() -> List[Path]:
    """Пути к примерам башен, поставляемым с пакетом."""
    return sorted((Path(__file__).resolve().parent.parent / "data" / "towers").glob("*.json"))
