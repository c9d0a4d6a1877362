# hypdyn/tower/spec.py
"""
TowerSpec: правило, задающее для каждого уровня n поверхность S_n и отображение
S_n → S_{n+1}, плюс базовая точка и отслеживаемые пары на S_0.
"""
from __future__ import annotations

import cmath
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from hypdyn.errors import MapDomainError, TowerSpecError
from hypdyn.geometry.disc import MobiusDisc, axis_chart
from hypdyn.geometry.surfaces import CyclicQuotient, DiscSurface, RoundAnnulus, SurfaceModel
from hypdyn.tower.maps import (
    Blaschke2,
    Composite,
    MapElement,
    MobiusMap,
    Power,
    Rotation,
    Scaling,
)

logger = logging.getLogger(__name__)

HORIZON_CAP = 4096
UNIT_TOL = 1e-15


# ---------------------------------------------------------------------------
#  Расписания параметров
# ---------------------------------------------------------------------------

class Schedule(ABC):
    """Значение параметра на уровне n (n: индекс отображения map_at(n))."""

    @abstractmethod
    def value(self, n: int) -> complex | float: ...

    def unimodular(self, n: int) -> bool:
        """|value(n)| = 1 по определению расписания, а не после округления."""
        return False

    def __call__(self, n: int):
        return self.value(n)


def _declared_unit(v: complex | float) -> bool:
    return abs(abs(complex(v)) - 1.0) <= UNIT_TOL


@dataclass(frozen=True, slots=True)
class Constant(Schedule):
    v: complex | float

    def value(self, n: int):
        return self.v

    def unimodular(self, n: int) -> bool:
        return _declared_unit(self.v)


@dataclass(frozen=True, slots=True)
class OneMinusPower(Schedule):
    """1 − base^{−(n+1)}: λ_k = 1 − base^{−k} для k = n + 1. Никогда не равно 1."""
    base: float

    def value(self, n: int) -> float:
        return 1.0 - self.base ** (-(n + 1))


@dataclass(frozen=True, slots=True)
class OneMinusInverseSquare(Schedule):
    """1 − 1/(n + offset)²."""
    offset: float = 2.0

    def value(self, n: int) -> float:
        return 1.0 - 1.0 / (n + self.offset) ** 2


@dataclass(frozen=True, slots=True)
class Geometric(Schedule):
    start: float
    ratio: float

    def value(self, n: int) -> float:
        return self.start * self.ratio ** n

    def unimodular(self, n: int) -> bool:
        return self.ratio == 1.0 and _declared_unit(self.start)


@dataclass(frozen=True, slots=True)
class ListSchedule(Schedule):
    """Явный список значений; после конца списка повторяется последнее."""
    values: Tuple[Any, ...]

    def value(self, n: int):
        return self.values[min(n, len(self.values) - 1)]

    def unimodular(self, n: int) -> bool:
        return _declared_unit(self.value(n))


# ---------------------------------------------------------------------------
#  Правила отображений
# ---------------------------------------------------------------------------

class MapRule(ABC):
    @abstractmethod
    def __call__(self, n: int) -> MapElement: ...

    @abstractmethod
    def describe(self) -> dict: ...


_FAMILIES: Dict[str, Callable[..., MapElement]] = {
    "scaling": lambda c: Scaling(c),
    "rotation": lambda theta: Rotation(float(theta)),
    "blaschke2": lambda a: Blaschke2(float(a)),
    "power": lambda degree, post_scale=1.0: Power(int(degree), post_scale),
    "mobius": lambda rotation=1.0, center=0j: MobiusMap(MobiusDisc(rotation, center)),
}

# параметр, модуль которого решает, является ли отображение накрытием
_MODULUS_PARAMS: Dict[str, str] = {"scaling": "c", "power": "post_scale"}


@dataclass(frozen=True)
class FamilyRule(MapRule):
    family: str
    params: Dict[str, Schedule]

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise TowerSpecError(f"unknown map family {self.family!r}")

    def __call__(self, n: int) -> MapElement:
        element = _FAMILIES[self.family](**{k: s(n) for k, s in self.params.items()})
        key = _MODULUS_PARAMS.get(self.family)
        if key in self.params:
            element = replace(element, modulus_one=self.params[key].unimodular(n))
        return element

    def describe(self) -> dict:
        return {"family": self.family, "params": {k: repr(s) for k, s in self.params.items()}}


@dataclass(frozen=True)
class CompositeRule(MapRule):
    parts: Tuple[MapRule, ...]

    def __call__(self, n: int) -> MapElement:
        return Composite(tuple(p(n) for p in self.parts))

    def describe(self) -> dict:
        return {"family": "composite", "parts": [p.describe() for p in self.parts]}


@dataclass(frozen=True)
class SwitchRule(MapRule):
    """before(n) для n < at, иначе after(n)."""
    at: int
    before: MapRule
    after: MapRule

    def __call__(self, n: int) -> MapElement:
        return self.before(n) if n < self.at else self.after(n)

    def describe(self) -> dict:
        return {"family": "switch", "at": self.at, "before": self.before.describe(),
                "after": self.after.describe()}


@dataclass(frozen=True)
class FixedRule(MapRule):
    """Явная последовательность отображений (например, из построенной модели)."""
    maps: Tuple[MapElement, ...]

    def __call__(self, n: int) -> MapElement:
        if n >= len(self.maps):
            raise MapDomainError(f"no map defined at level {n} (have {len(self.maps)})")
        return self.maps[n]

    def describe(self) -> dict:
        return {"family": "fixed", "count": len(self.maps)}


# ---------------------------------------------------------------------------
#  Правила поверхностей
# ---------------------------------------------------------------------------

class SurfaceRule(ABC):
    @abstractmethod
    def __call__(self, n: int) -> SurfaceModel: ...

    @abstractmethod
    def describe(self) -> dict: ...


@dataclass(frozen=True)
class DiscRule(SurfaceRule):
    def __call__(self, n: int) -> SurfaceModel:
        return DiscSurface()

    def describe(self) -> dict:
        return {"kind": "disc"}


@dataclass(frozen=True)
class AnnulusGrowthRule(SurfaceRule):
    """L_n = L_0·degreeⁿ (кольца r_n = r_0^{degreeⁿ})."""
    log_inner: float
    degree: float = 1.0

    def __call__(self, n: int) -> SurfaceModel:
        return RoundAnnulus(self.log_inner * self.degree ** n)

    def describe(self) -> dict:
        return {"kind": "round_annulus", "log_inner": self.log_inner, "growth": self.degree}


@dataclass
class AnnulusImageRule(SurfaceRule):
    """
    Кольца, продолжаемые образами: для мономиального u ↦ d·u + β образ A(L) лежит
    в A(L′) с L′ = d·L − Re β (требуется Re β ≤ 0).
    """
    log_inner: float
    maps: MapRule
    _cache: List[float] = field(default_factory=list, repr=False)

    def __call__(self, n: int) -> SurfaceModel:
        if not self._cache:
            self._cache.append(self.log_inner)
        while len(self._cache) <= n:
            k = len(self._cache) - 1
            form = self.maps(k).log_form()
            if form is None:
                raise MapDomainError(f"map at level {k} is not monomial; image annulus undefined")
            d, beta = form
            if beta.real > 1e-15:
                raise MapDomainError(f"map at level {k} expands the outer boundary (|s| > 1)")
            self._cache.append(d * self._cache[-1] - min(beta.real, 0.0))
        return RoundAnnulus(self._cache[n])

    def describe(self) -> dict:
        return {"kind": "round_annulus", "log_inner": self.log_inner, "growth": "image"}


@dataclass(frozen=True)
class QuotientRule(SurfaceRule):
    """
    Циклические факторы с общей осью: гиперболические (длины ℓ_n) или
    параболические (сдвиги τ_n в точке p).
    """
    lengths: Schedule
    axis: Tuple[complex, complex] = (-1.0 + 0j, 1.0 + 0j)
    parabolic_point: Optional[complex] = None

    def chart(self) -> MobiusDisc:
        return axis_chart(self.axis[0], self.axis[1])

    def __call__(self, n: int) -> SurfaceModel:
        value = float(self.lengths(n))
        if self.parabolic_point is not None:
            return CyclicQuotient.parabolic(self.parabolic_point, value)
        return CyclicQuotient.hyperbolic(self.chart(), value)

    def describe(self) -> dict:
        if self.parabolic_point is not None:
            return {"kind": "cyclic_quotient", "generator": "parabolic"}
        return {"kind": "cyclic_quotient", "generator": "hyperbolic"}


# ---------------------------------------------------------------------------
#  TowerSpec
# ---------------------------------------------------------------------------

@dataclass
class TowerSpec:
    surfaces: SurfaceRule
    maps: MapRule
    base_point: complex = 0j
    tracked_pairs: List[Tuple[complex, complex]] = field(default_factory=list)
    horizon: int = 64
    name: str = ""
    description: str = ""
    expected_row: Optional[int] = None
    _surface_cache: Dict[int, SurfaceModel] = field(default_factory=dict, repr=False)
    _map_cache: Dict[int, MapElement] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not 0 <= self.horizon <= HORIZON_CAP:
            raise TowerSpecError(f"horizon must lie in [0, {HORIZON_CAP}], got {self.horizon}", "horizon")
        self.base_point = complex(self.base_point)
        self.tracked_pairs = [(complex(x), complex(y)) for x, y in self.tracked_pairs]

    def surface_at(self, n: int) -> SurfaceModel:
        if n not in self._surface_cache:
            self._surface_cache[n] = self.surfaces(n)
        return self._surface_cache[n]

    def map_at(self, n: int) -> MapElement:
        if n not in self._map_cache:
            self._map_cache[n] = self.maps(n)
        return self._map_cache[n]

    def with_horizon(self, horizon: int) -> "TowerSpec":
        return TowerSpec(surfaces=self.surfaces, maps=self.maps, base_point=self.base_point,
                         tracked_pairs=list(self.tracked_pairs), horizon=horizon, name=self.name,
                         description=self.description, expected_row=self.expected_row)

    def with_points(self, base: Optional[complex] = None,
                    pairs: Optional[Sequence[Tuple[complex, complex]]] = None) -> "TowerSpec":
        spec = self.with_horizon(self.horizon)
        if base is not None:
            spec.base_point = complex(base)
        if pairs is not None:
            spec.tracked_pairs = [(complex(x), complex(y)) for x, y in pairs]
        spec._surface_cache = self._surface_cache
        spec._map_cache = self._map_cache
        return spec

    def covering_tail_start(self, upto: Optional[int] = None) -> Optional[int]:
        """Наименьшее N, начиная с которого все отображения до горизонта являются объявленными накрытиями."""
        H = self.horizon if upto is None else upto
        start = None
        for n in range(H - 1, -1, -1):
            if self.map_at(n).is_covering(self.surface_at(n), self.surface_at(n + 1)):
                start = n
            else:
                break
        return start

    def describe(self) -> dict:
        return {"name": self.name, "surfaces": self.surfaces.describe(), "maps": self.maps.describe(),
                "base": [self.base_point.real, self.base_point.imag], "horizon": self.horizon,
                "pairs": len(self.tracked_pairs)}


def on_circle(radius_log: float, angle: float) -> complex:
    """Точка кольца по log|a| и аргументу."""
    return cmath.exp(complex(radius_log, angle))


def annulus_core_point(surface: RoundAnnulus, angle: float = 0.0) -> complex:
    return on_circle(-0.5 * surface.log_inner, angle)
