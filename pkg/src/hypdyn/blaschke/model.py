# hypdyn/blaschke/model.py
"""
Модельная башня Бляшке: индуктивный выбор a_m, r_m, ε_m, таблица множеств A_k^n,
области U_n = 𝔻 \\ ⋃ A_n^m (усечённые на h), проверка инвариантов построения,
сертифицированные оценки плотности и сдвинутая башня T_n(z) = z + 4n.

Таблица хранит A_k^n для 0 ≤ k ≤ n + 1, n ≤ m_max:
    A_{m+1}^m = D(v_m, ε_m) ∪ b_m(A_m^{m−1}),
    A_m^m     = A_m^{m−1} ∪ {σ_m(A)} ∪ b_m⁻¹(D(v_m, ε_m)),
    A_k^m     = A_k^{m−1} ∪ b_k⁻¹(новые компоненты A_{k+1}^m),  k < m,
где σ_m(z) есть второй корень b_m(ζ) = b_m(z).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from more_itertools import pairwise
from scipy.integrate import quad
from scipy.spatial import cKDTree

from hypdyn.blaschke.product import BlaschkeDeg2
from hypdyn.blaschke.regions import (
    RegionSet,
    chain_residual,
    circle_polyline,
    component_preimage,
    disc_component,
    is_simple,
    region_disjoint,
    region_preimage,
    region_pushforward,
    sibling_component,
    spacing,
    winding_number,
)
from hypdyn.config.settings import BlaschkeSettings
from hypdyn.errors import BranchAmbiguityError, ConfigurationError, DomainError, InjectivityError, MarginExhausted
from hypdyn.geometry.disc import BOUNDARY_BAND, disc_density, disc_distance
from hypdyn.geometry.surfaces import SurfaceModel
from hypdyn.tower.maps import Blaschke2
from hypdyn.tower.spec import FixedRule, SurfaceRule, TowerSpec

logger = logging.getLogger(__name__)

GRID_START = 1.0 / 16.0
GRID_FINEST = 2.0 ** -48
RESIDUAL_TOL = 1e-10
COVERING_TARGETS = 200
PARAMETER_TRIES = 64
LOCAL_PAIR = (0j, 0.02 + 0j)
TRANSLATION = 4.0


# ---------------------------------------------------------------------------
#  Состояние построения
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class LevelParameters:
    level: int
    a: float
    r: float
    eps: float
    critical_point: float
    critical_value: float
    clearance: Tuple[float, float, float]  # до b(∂D(0, r)), до b(A_m^{m−1}), до ∂𝔻

    def as_dict(self) -> dict:
        return {"level": self.level, "a": self.a, "r": self.r, "eps": self.eps,
                "critical_point": self.critical_point, "critical_value": self.critical_value,
                "clearance": {"circle": self.clearance[0], "regions": self.clearance[1],
                              "boundary": self.clearance[2]}}


@dataclass
class ModelTowerState:
    """Построенные уровни 0..m_max и таблица A_k^n."""
    settings: BlaschkeSettings
    levels: List[LevelParameters] = field(default_factory=list)
    regions: Dict[Tuple[int, int], RegionSet] = field(default_factory=dict)
    log: List[str] = field(default_factory=list)
    stopped: Optional[str] = None

    @property
    def built(self) -> int:
        """Последний полностью построенный уровень (−1, если нет ни одного)."""
        return len(self.levels) - 1

    def product(self, m: int) -> BlaschkeDeg2:
        return BlaschkeDeg2(self.levels[m].a)

    def region(self, k: int, n: int) -> RegionSet:
        if (k, n) not in self.regions:
            raise DomainError(f"A_{k}^{n} is not part of the built table (levels 0..{self.built})")
        return self.regions[(k, n)]

    def cells(self) -> Iterator[Tuple[int, int]]:
        for n in range(self.built + 1):
            for k in range(n + 2):
                yield k, n

    def note(self, message: str, *args) -> None:
        text = message % args if args else message
        self.log.append(text)
        logger.info(text)

    def as_dict(self) -> dict:
        return {
            "schema": "hypdyn/1",
            "kind": "blaschke_regions",
            "levels": [p.as_dict() for p in self.levels],
            "regions": [{"k": k, "n": n, **self.regions[(k, n)].as_dict()} for k, n in self.cells()],
            "log": list(self.log),
            "stopped": self.stopped,
        }


def _grid_pick(target: float) -> Tuple[float, float]:
    if not 0.0 < target < 1.0:
        raise ConfigurationError(f"critical point target must lie in (0, 1), got {target}")
    # |c_a| = t ⇔ a = 2t/(1 + t²)
    threshold = 2.0 * target / (1.0 + target * target)
    step = GRID_START
    while step >= GRID_FINEST:
        k = math.floor(threshold / step) + 1
        while k * step < 1.0:
            a = k * step
            if abs(BlaschkeDeg2(a).critical_point) > target:
                return a, step
            k += 1
        step /= 2.0
    raise MarginExhausted(f"no dyadic parameter places the critical point beyond {target!r}", -1)


def choose_parameter(target: float) -> float:
    """Наименьшее значение на двоичной сетке (от шага 1/16) с |c_a| > target."""
    return _grid_pick(target)[0]


def parameter_candidates(target: float, limit: int = PARAMETER_TRIES) -> Iterator[float]:
    """choose_parameter(target) и следующие за ним значения той же сетки, не более limit штук."""
    a, step = _grid_pick(target)
    for _ in range(limit):
        if a >= 1.0:
            return
        yield a
        a += step


def _clearance(b: BlaschkeDeg2, r: float, images: RegionSet, samples: int) -> Tuple[float, float, float]:
    v = complex(b.critical_value)
    ring = b(circle_polyline(0j, r, samples))
    ring_gap = float(np.abs(ring - v).min()) - spacing(np.append(ring, ring[0]))
    region_gap = math.inf
    if len(images):
        region_gap = float(images.boundary_distance(v)) - images.max_spacing
    return ring_gap, region_gap, 1.0 - abs(v)


def _build_level(state: ModelTowerState, m: int) -> None:
    s = state.settings
    prev = state.regions.get((m, m - 1), RegionSet([], m, m - 1))
    if m == 0:
        r = 0.5
    else:
        r_prev = state.levels[m - 1].r
        r = max(prev.max_modulus + s.radius_margin, 0.5 * (1.0 + r_prev))
        if r >= 1.0 - s.radius_margin:
            raise MarginExhausted(f"regions reach |z| = {prev.max_modulus:.6g}; no room for r_{m}", m)
    # v_a лежит у образа окружности, пока c_a близко к −r: идём по сетке дальше,
    # пока зазор не превысит шаг выборки
    for a in parameter_candidates(r + s.parameter_margin):
        b = BlaschkeDeg2(a)
        c, v = b.critical_point, b.critical_value
        images = region_pushforward(b, prev, radius=r, settings=s, created=m)
        gaps = _clearance(b, r, images, s.samples)
        eps = 0.5 * min(gaps)
        if eps > 0.0:
            break
        state.note("level %d: a = %.17g leaves no clearance for v = %.6g; next grid value", m, a, v)
    else:
        raise MarginExhausted(f"no grid parameter clears the critical value at level {m}", m)
    if gaps[1] < gaps[0]:
        state.note("level %d: eps limited by b(A_%d^%d) rather than b(∂D(0, r))", m, m, m - 1)

    disc = disc_component(v, eps, created=m, settings=s)
    state.regions[(m + 1, m)] = RegionSet([disc] + images.components, m + 1, m)

    fresh = [sibling_component(b, comp, m, s) for comp in prev]
    fresh += component_preimage(b, disc, 0, s, created=m)
    state.regions[(m, m)] = RegionSet(prev.components + fresh, m, m)

    added = RegionSet(fresh, m, m)
    for k in range(m - 1, -1, -1):
        added = region_preimage(state.product(k), added, s, created=m)
        added.k = k
        state.regions[(k, m)] = state.regions[(k, m - 1)].union(added.components, n=m)

    state.levels.append(LevelParameters(m, a, r, eps, c, v, gaps))
    state.note("level %d: a = %.17g, r = %.17g, eps = %.6g, |A_%d^%d| = %d",
               m, a, r, eps, m, m, len(state.regions[(m, m)]))


def build_model_tower(levels: int, settings: Optional[BlaschkeSettings] = None) -> ModelTowerState:
    """
    Строит уровни 0..levels. При исчерпании запаса бросает MarginExhausted,
    в атрибуте state которого лежит частично построенное состояние.
    """
    settings = settings or BlaschkeSettings.from_env()
    if levels < 0:
        raise ConfigurationError(f"levels must be non-negative, got {levels}")
    if levels > settings.levels_cap:
        raise ConfigurationError(f"levels {levels} exceed the cap {settings.levels_cap}")
    state = ModelTowerState(settings)
    for m in range(levels + 1):
        try:
            _build_level(state, m)
        except (MarginExhausted, BranchAmbiguityError, InjectivityError) as e:
            state.stopped = f"level {m}: {e}"
            # незавершённый уровень не оставляет записей в таблице
            for key in [key for key in state.regions if key[1] >= m]:
                del state.regions[key]
            logger.warning("model build stopped at level %d: %s", m, e)
            raise MarginExhausted(state.stopped, m, state) from e
    return state


# ---------------------------------------------------------------------------
#  U_n и оценки плотности
# ---------------------------------------------------------------------------

def _check_truncation(state: ModelTowerState, n: int, h: int) -> None:
    if not 0 <= h <= state.built:
        raise DomainError(f"truncation {h} exceeds the built levels 0..{state.built}")
    if not 0 <= n <= h + 1:
        raise DomainError(f"U_{n} needs truncation h ≥ {n - 1}, got {h}")


def point_in_U(state: ModelTowerState, n: int, z: complex, truncation: int) -> bool:
    """z ∈ 𝔻 \\ A_n^h: усечённое (сверху) приближение принадлежности U_n."""
    _check_truncation(state, n, truncation)
    z = complex(z)
    if not abs(z) < 1.0:
        return False
    return not state.region(n, truncation).contains(z)


@dataclass(frozen=True, eq=False)
class DensityBounds:
    """
    Нижняя и верхняя оценки плотности области U ⊂ 𝔻, из которой выброшены holes;
    остальные выброшенные множества лежат вне D(0, cert_radius).
    """
    holes: Optional[RegionSet]
    cert_radius: float = 1.0

    @cached_property
    def _hole_points(self) -> np.ndarray:
        return np.array(self.holes.interior_points() if self.holes else [], dtype=complex)

    @cached_property
    def _slack(self) -> float:
        return self.holes.max_spacing if self.holes else 0.0

    @cached_property
    def _origin_radius(self) -> float:
        return self.free_radius(0j)

    def free_radius(self, z: complex) -> float:
        """R с D(z, R) ⊂ U (≤ 0, если такого диска нет)."""
        z = complex(z)
        R = self.cert_radius - abs(z)
        if self.holes and len(self.holes):
            if self.holes.contains(z):
                return 0.0
            R = min(R, float(self.holes.boundary_distance(z)) - self._slack)
        return R

    def lower(self, z: complex) -> float:
        z = complex(z)
        rho = disc_density(z)
        p = self._hole_points
        if len(p):
            phi = (z - p) / (1.0 - np.conj(p) * z)
            size = np.abs(phi)
            dphi = (1.0 - np.abs(p) ** 2) / np.abs(1.0 - np.conj(p) * z) ** 2
            rho = max(rho, float((dphi / (size * np.log(1.0 / size))).max()))
        return rho

    def upper(self, z: complex) -> float:
        z = complex(z)
        R = self.free_radius(z)
        if not R > 0.0:
            raise DomainError(f"{z} is within sample resolution of the domain boundary")
        best = 2.0 / R
        R0 = self._origin_radius
        if abs(z) < R0:
            best = min(best, 2.0 * R0 / (R0 * R0 - abs(z) ** 2))
        return best


@dataclass(frozen=True, slots=True)
class IsometryBracket:
    lo: float
    hi: float

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo


def isometry_bracket(f, derivative, src: DensityBounds, dst: DensityBounds, z: complex) -> IsometryBracket:
    """Вилка для ρ_dst(f z)|f′(z)|/ρ_src(z) по оценкам плотностей обеих областей."""
    w = complex(f(z))
    d = abs(complex(derivative(z)))
    return IsometryBracket(dst.lower(w) * d / src.upper(z), dst.upper(w) * d / src.lower(z))


def density_bounds(state: ModelTowerState, n: int, truncation: int) -> DensityBounds:
    _check_truncation(state, n, truncation)
    return DensityBounds(state.region(n, truncation), state.levels[truncation].r)


def local_isometry_bracket(state: ModelTowerState, n: int, z: complex,
                           truncation: Optional[int] = None) -> IsometryBracket:
    """Сертифицированная вилка для искажения накрытия b_n: U_n → U_{n+1} в точке z (истинное значение 1)."""
    h = state.built if truncation is None else truncation
    if n > h:
        raise DomainError(f"bracket at level {n} needs truncation ≥ {n}, got {h}")
    b = state.product(n)
    return isometry_bracket(b, b.derivative, density_bounds(state, n, h), density_bounds(state, n + 1, h), z)


# ---------------------------------------------------------------------------
#  Поверхность: усечённая область U_n
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TruncatedPlanarDomain(SurfaceModel):
    """U_n, усечённая на уровне h; представители суть точки самой области."""
    state: ModelTowerState
    level: int
    truncation: int

    kind = "planar_domain"
    exact_metric = False

    def __post_init__(self) -> None:
        _check_truncation(self.state, self.level, self.truncation)

    @cached_property
    def bounds(self) -> DensityBounds:
        return density_bounds(self.state, self.level, self.truncation)

    def contains(self, rep: complex) -> bool:
        return abs(rep) <= 1.0 - BOUNDARY_BAND and point_in_U(self.state, self.level, rep, self.truncation)

    def lift(self, rep: complex) -> complex:
        if not self.contains(rep):
            raise DomainError(f"{rep} is not a point of the truncated U_{self.level}")
        return complex(rep)

    def project(self, z: complex) -> complex:
        return complex(z)

    def density(self, rep: complex) -> float:
        return self.bounds.lower(rep)

    def density_bracket(self, rep: complex) -> Tuple[float, float]:
        return self.bounds.lower(rep), self.bounds.upper(rep)

    def lift_distance(self, zx: complex, zy: complex) -> float:
        return self.distance_bracket(zx, zy)[0]

    def distance_bracket(self, x: complex, y: complex) -> Tuple[float, float]:
        """[d_𝔻(x, y), ∫ρ_hi по отрезку]; ∞, если отрезок не лежит в области."""
        x, y = complex(x), complex(y)
        lo = disc_distance(x, y)
        if x == y:
            return 0.0, 0.0
        along = x + (y - x) * np.linspace(0.0, 1.0, 65)
        if any(self.bounds.free_radius(p) <= 0.0 for p in along):
            return lo, math.inf
        length = abs(y - x)
        try:
            hi, _ = quad(lambda t: self.bounds.upper(x + t * (y - x)) * length, 0.0, 1.0, limit=100)
        except DomainError:
            return lo, math.inf
        return lo, max(lo, hi)

    def lift_injectivity(self, z: complex) -> float:
        # нетривиальная петля покидает D(z, R), а ρ_U ≥ ρ_𝔻 ≥ 2
        return 2.0 * max(self.bounds.free_radius(z), 0.0)

    def sample_points(self, count: int) -> List[complex]:
        radius = 0.95 * self.state.levels[self.truncation].r
        out: List[complex] = []
        rings = max(2, int(math.sqrt(count)) + 1)
        for i in range(rings):
            rho = radius * (i + 0.5) / rings
            for t in np.linspace(0.0, 2.0 * math.pi, 2 * rings, endpoint=False):
                z = complex(rho * np.exp(1j * (t + 0.37 * i)))
                if self.contains(z) and self.bounds.free_radius(z) > 0:
                    out.append(z)
        return out[:count]

    def describe(self) -> dict:
        return {"kind": self.kind, "level": self.level, "truncation": self.truncation,
                "holes": len(self.state.region(self.level, self.truncation))}


@dataclass(frozen=True)
class ModelDomainRule(SurfaceRule):
    state: ModelTowerState
    truncation: int

    def __call__(self, n: int) -> SurfaceModel:
        return TruncatedPlanarDomain(self.state, n, self.truncation)

    def describe(self) -> dict:
        return {"kind": "planar_domain", "truncation": self.truncation, "levels": self.state.built}


# ---------------------------------------------------------------------------
#  Башня для классификации
# ---------------------------------------------------------------------------

def _pull_to_level_zero(state: ModelTowerState, level: int, z: complex, h: int) -> Optional[complex]:
    """Прообраз z с уровня level на уровне 0, выбирая ветвь внутри усечённых U_k."""
    for k in range(level - 1, -1, -1):
        roots = state.product(k).preimages(z)
        good = [complex(w) for w in roots if abs(w) < 1.0 - 1e-6 and point_in_U(state, k, w, h)]
        if not good:
            return None
        z = min(good, key=abs)
    return z


def witness_pairs(state: ModelTowerState, count: int = 2) -> List[Tuple[complex, complex]]:
    """
    Пары уровня 0, образы которых на уровне H − 1 лежат в разных ветвях b_{H−1}⁻¹
    над близкими точками: расстояние строго падает на последнем шаге.
    """
    h = state.built
    b = state.product(h)
    pairs: List[Tuple[complex, complex]] = []
    angles = np.linspace(0.0, 2.0 * math.pi, 12, endpoint=False)
    for phi in angles:
        q = 0.05 * complex(np.exp(1j * phi))
        if not point_in_U(state, h + 1, q, h):
            continue
        p1 = min(b.preimages(q), key=lambda w: abs(w - q))
        for psi in angles:
            q2 = q + 0.02 * complex(np.exp(1j * (psi + 0.5 * phi)))
            if not point_in_U(state, h + 1, q2, h):
                continue
            p2 = max(b.preimages(q2), key=lambda w: abs(w - q2))
            x, y = _pull_to_level_zero(state, h, complex(p1), h), _pull_to_level_zero(state, h, complex(p2), h)
            if x is not None and y is not None:
                pairs.append((x, y))
                break
        if len(pairs) >= count:
            break
    if len(pairs) < count:
        logger.warning("only %d of %d witness pairs found", len(pairs), count)
    return pairs


def model_tower_spec(state: ModelTowerState, witnesses: int = 2) -> TowerSpec:
    """Башня U_0 → U_1 → … → U_{m+1} с отображениями b_n для классификации."""
    if state.built < 0:
        raise DomainError("model tower has no built levels")
    h = state.built
    maps = FixedRule(tuple(Blaschke2(p.a) for p in state.levels))
    return TowerSpec(
        surfaces=ModelDomainRule(state, h), maps=maps, base_point=0j,
        tracked_pairs=[LOCAL_PAIR] + witness_pairs(state, witnesses), horizon=h + 1,
        name="blaschke_model",
        description="degree-2 Blaschke covering tower on truncated planar domains",
        expected_row=5,
    )


# ---------------------------------------------------------------------------
#  Сдвинутая башня
# ---------------------------------------------------------------------------

@dataclass
class TranslatedLevel:
    level: int
    offset: float
    a: Optional[float]
    holes: List[np.ndarray]

    def as_dict(self) -> dict:
        return {"level": self.level, "offset": self.offset, "a": self.a,
                "holes": [[[z.real, z.imag] for z in poly] for poly in self.holes]}


@dataclass
class TranslatedTower:
    """K_n = T_n(U_n) с T_n(z) = z + 4n и f_n = T_{n+1} ∘ b_n ∘ T_n⁻¹."""
    state: ModelTowerState
    levels: List[TranslatedLevel]
    in_disc: TowerSpec

    def f(self, n: int, z: complex) -> complex:
        return complex(self.state.product(n)(z - TRANSLATION * n)) + TRANSLATION * (n + 1)

    def in_compact(self, n: int, z: complex) -> bool:
        return point_in_U(self.state, n, complex(z) - TRANSLATION * n, self.state.built)

    def as_dict(self) -> dict:
        return {"schema": "hypdyn/1", "kind": "translated_tower", "translation": TRANSLATION,
                "levels": [lvl.as_dict() for lvl in self.levels]}


def translate_tower(state: ModelTowerState) -> TranslatedTower:
    h = state.built
    levels = []
    for n in range(h + 2):
        offset = TRANSLATION * n
        holes = [c.points + offset for c in state.region(n, h)]
        a = state.levels[n].a if n <= h else None
        levels.append(TranslatedLevel(n, offset, a, holes))
    return TranslatedTower(state, levels, model_tower_spec(state))


# ---------------------------------------------------------------------------
#  Проверка инвариантов
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class InvariantCheck:
    name: str
    level: int
    ok: bool
    value: float = math.nan
    detail: str = ""
    truncation: Optional[int] = None
    geometry: Optional[dict] = None

    def as_dict(self) -> dict:
        out = {"name": self.name, "level": self.level, "ok": self.ok, "value": self.value, "detail": self.detail}
        if self.truncation is not None:
            out["truncation"] = self.truncation
        if self.geometry is not None:
            out["geometry"] = self.geometry
        return out


@dataclass
class ModelVerification:
    checks: List[InvariantCheck] = field(default_factory=list)
    resolution_limited: bool = True

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> List[InvariantCheck]:
        return [c for c in self.checks if not c.ok]

    def add(self, name: str, level: int, ok: bool, value: float = math.nan, detail: str = "",
            truncation: Optional[int] = None, geometry: Optional[dict] = None) -> bool:
        self.checks.append(InvariantCheck(name, level, bool(ok), float(value), detail, truncation, geometry))
        return bool(ok)

    def summary(self) -> Dict[str, bool]:
        out: Dict[str, bool] = {}
        for c in self.checks:
            out[c.name] = out.get(c.name, True) and c.ok
        return out

    def as_dict(self) -> dict:
        return {"passed": self.passed, "resolution_limited": self.resolution_limited, "summary": self.summary(),
                "checks": len(self.checks), "failures": [c.as_dict() for c in self.failures]}


def _check_injectivity(state: ModelTowerState, m: int, report: ModelVerification) -> None:
    p = state.levels[m]
    b = state.product(m)
    report.add("critical_beyond_radius", m, abs(p.critical_point) > p.r, abs(p.critical_point) - p.r)
    radii = np.linspace(0.0, p.r, 24)[1:]
    grid = np.concatenate([[0j], (radii[:, None] * np.exp(2j * math.pi * np.arange(64) / 64)[None, :]).ravel()])
    images = b(grid)
    d, _ = cKDTree(np.column_stack([images.real, images.imag])).query(
        np.column_stack([images.real, images.imag]), k=2)
    separation = float(d[:, 1].min())
    report.add("injective_grid", m, separation > 1e-12, separation)
    ring = b(circle_polyline(0j, p.r, 2048))
    targets = images[:: max(1, len(images) // 64)]
    counts = winding_number(np.append(ring, ring[0]), targets)
    report.add("argument_principle", m, bool((counts == 1).all()), float(np.abs(counts - 1).max()),
               "" if (counts == 1).all() else f"{int((counts != 1).sum())} targets with preimage count ≠ 1")


def _check_membership(state: ModelTowerState, k: int, n: int, report: ModelVerification) -> None:
    R = state.region(k, n)
    where = R.component_of(0j)
    report.add("zero_outside", k, where is None, truncation=n,
               detail="" if where is None else f"0 lies in component {where}",
               geometry=None if where is None else R.components[where].as_dict())
    if k <= n:
        c = state.levels[k].critical_point
        report.add("critical_inside", k, R.contains(c), c, truncation=n)


def _check_geometry(state: ModelTowerState, k: int, n: int, report: ModelVerification) -> None:
    R = state.region(k, n)
    gap = state.settings.gap
    bad = [i for i, c in enumerate(R.components) if not (c.closed and is_simple(c.points))]
    report.add("simple_closed", k, not bad, len(bad), truncation=n,
               detail="" if not bad else f"components {bad[:5]} are open or self-intersecting",
               geometry=None if not bad else R.components[bad[0]].as_dict())
    overlaps = region_disjoint(R, gap)
    report.add("disjoint", k, not overlaps, len(overlaps), truncation=n,
               detail="" if not overlaps else f"overlapping components {overlaps[:5]}")


def _check_containment(state: ModelTowerState, k: int, n: int, report: ModelVerification) -> None:
    src, dst = state.region(k, n), state.region(k + 1, n)
    b = state.product(k)
    tol = src.max_spacing + dst.max_spacing + 1e-9
    forward = 0.0
    for comp in src:
        forward = max(forward, float(np.max(dst.boundary_distance(b(comp.points[:-1])))))
    inner = all(dst.contains(b(comp.inside)) for comp in src)
    report.add("forward_containment", k, forward <= tol and inner, forward, truncation=n,
               detail="" if inner else "an interior point maps outside A_{k+1}^n")
    backward = 0.0
    for comp in dst:
        r1, r2 = b.preimages(comp.points[:-1])
        backward = max(backward, float(np.max(src.boundary_distance(np.concatenate([r1, r2])))))
    report.add("backward_containment", k, backward <= tol, backward, truncation=n)


def _check_new_components(state: ModelTowerState, m: int, report: ModelVerification) -> None:
    r_prev = state.levels[m - 1].r
    worst = math.inf
    for k in range(m + 1):
        for comp in state.region(k, m):
            if comp.created == m:
                worst = min(worst, float(np.abs(comp.points).min()))
    report.add("new_outside_disc", m, worst > r_prev, worst - r_prev)


def _random_in_U(state: ModelTowerState, n: int, h: int, rng: np.random.Generator, count: int) -> List[complex]:
    R = state.region(n, h)
    margin = 10.0 * R.max_spacing
    out: List[complex] = []
    while len(out) < count:
        batch = np.sqrt(rng.random(4 * count)) * 0.999 * np.exp(2j * math.pi * rng.random(4 * count))
        far = R.boundary_distance(batch) > margin
        for w in batch[far]:
            if not R.contains(w):
                out.append(complex(w))
                if len(out) == count:
                    break
    return out


def _check_covering(state: ModelTowerState, n: int, h: int, rng: np.random.Generator, targets: int,
                    report: ModelVerification) -> None:
    b = state.product(n)
    wrong = 0
    for w in _random_in_U(state, n + 1, h, rng, targets):
        inside = sum(point_in_U(state, n, z, h) for z in b.preimages(w))
        wrong += inside != 2
    report.add("covering_degree", n, wrong == 0, wrong, truncation=h,
               detail="" if not wrong else f"{wrong} targets without exactly two preimages in U_{n}")


def _check_residuals(state: ModelTowerState, report: ModelVerification) -> None:
    for k, n in state.cells():
        worst = max((chain_residual(c) for c in state.region(k, n) if c.created == n), default=0.0)
        report.add("quadratic_residual", k, worst < RESIDUAL_TOL, worst, truncation=n)


def verify_model_invariants(state: ModelTowerState, targets: int = COVERING_TARGETS,
                            seed: int = 20240611) -> ModelVerification:
    """Проверки (на разрешении выборки) свойств построения; сбои попадают в записи отчёта."""
    report = ModelVerification()
    rng = np.random.default_rng(seed)
    h = state.built
    radii = [p.r for p in state.levels]
    report.add("radii_increasing", 0, all(x < y < 1.0 for x, y in pairwise(radii)) and all(r < 1 for r in radii))
    for m in range(h + 1):
        _check_injectivity(state, m, report)
        if m >= 1:
            _check_new_components(state, m, report)
    for k, n in state.cells():
        _check_membership(state, k, n, report)
        _check_geometry(state, k, n, report)
        if k <= n:
            _check_containment(state, k, n, report)
    for n in range(h + 1):
        _check_covering(state, n, h, rng, targets, report)
    _check_residuals(state, report)
    if report.passed:
        logger.info("model invariants pass on levels 0..%d (%d checks)", h, len(report.checks))
    else:
        logger.warning("model invariants: %d failed checks", len(report.failures))
    return report
