# hypdyn/geometry/surfaces.py
"""
Модельные гиперболические поверхности: диск, круглое кольцо r < |a| < 1 и
циклический фактор диска 𝔻/⟨γ⟩.

Каждая поверхность задаёт униформизирующую карту: представитель точки
поверхности переводится в точку диска («подъём»), а расстояния и радиусы
инъективности считаются на подъёмах как минимум по орбите группы накрытия.

Для гиперболических факторов и колец используется полосная нормальная форма:
w = 2·artanh(A⁻¹ z), где A есть карта оси; порождающий элемент действует как
w ↦ w + ℓ, а плотность метрики в полосе |Im w| < π/2 равна 1/cos(Im w).
Кольцо хранится через L = log(1/r), чтобы очень тонкие кольца не теряли
точность при r → 0.
"""
from __future__ import annotations

import cmath
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import ClassVar, Optional, Tuple

import numpy as np

from hypdyn.errors import CuspError, DomainError, SurfaceMismatchError
from hypdyn.geometry.disc import (
    BOUNDARY_BAND,
    MobiusDisc,
    axis_chart,
    disc_density,
    disc_distance,
    mobius_classify,
)

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi


def strip_distance(s1: float, t1: float, s2: float, t2: float) -> float:
    """Расстояние в полосе |Im w| < π/2 с плотностью 1/cos(Im w)."""
    num = math.sinh(0.5 * (s1 - s2)) ** 2 + math.sin(0.5 * (t1 - t2)) ** 2
    if num == 0.0:
        return 0.0
    return 2.0 * math.asinh(math.sqrt(num / (math.cos(t1) * math.cos(t2))))


def halfplane_distance(z1: complex, z2: complex) -> float:
    """Расстояние в верхней полуплоскости (кривизна −1)."""
    if z1 == z2:
        return 0.0
    return 2.0 * math.asinh(abs(z1 - z2) / (2.0 * math.sqrt(z1.imag * z2.imag)))


def _orbit_minimum(offset: float, period: float, evaluate, lower_bound) -> float:
    """
    Минимум evaluate(offset + k·period) по целым k.

    lower_bound(x): нижняя оценка evaluate(x), монотонная по |x|; перебор идёт от
    ближайшего к нулю сдвига наружу и прекращается, как только нижняя оценка
    превышает текущий минимум.
    """
    r = math.remainder(offset, period)
    best = evaluate(r)
    k = 1
    while True:
        candidates = [x for x in (r + k * period, r - k * period) if lower_bound(x) < best]
        if not candidates:
            return best
        for x in candidates:
            best = min(best, evaluate(x))
        k += 1


@dataclass(frozen=True, slots=True)
class StripForm:
    """Нормальная форма гиперболического циклического фактора: карта оси A и длина ℓ."""
    chart: MobiusDisc
    length: float
    _inverse: MobiusDisc = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise DomainError(f"translation length must be positive, got {self.length}")
        object.__setattr__(self, "_inverse", self.chart.inverse())

    def to_strip(self, z: complex) -> complex:
        return 2.0 * cmath.atanh(self._inverse(z))

    def from_strip(self, w: complex) -> complex:
        return self.chart(cmath.tanh(0.5 * w))

    def distance(self, zx: complex, zy: complex) -> float:
        wx, wy = self.to_strip(zx), self.to_strip(zy)
        tx, ty = wx.imag, wy.imag
        return _orbit_minimum(
            wx.real - wy.real,
            self.length,
            lambda ds: strip_distance(ds, tx, 0.0, ty),
            abs,
        )

    def injectivity(self, z: complex) -> float:
        theta = self.to_strip(z).imag
        best = math.inf
        k = 1
        # d_k монотонно растёт по k: останавливаемся на первом невыигрышном k
        while True:
            d_k = strip_distance(k * self.length, theta, 0.0, theta)
            if d_k >= best:
                return 0.5 * best
            best = d_k
            k += 1

    def reduce(self, z: complex) -> Tuple[complex, int]:
        """Сдвигает подъём в фундаментальную полосу |Re w| ≤ ℓ/2; возвращает (z′, k), z′ = γ^{−k} z."""
        w = self.to_strip(z)
        r = math.remainder(w.real, self.length)
        k = round((w.real - r) / self.length)
        if k == 0:
            return z, 0
        return self.from_strip(complex(r, w.imag)), k


@dataclass(frozen=True, slots=True)
class CuspForm:
    """Нормальная форма параболического фактора: точка p на окружности и сдвиг τ в полуплоскости."""
    point: complex
    shift: float

    def to_halfplane(self, z: complex) -> complex:
        p = self.point
        return 1j * (p + z) / (p - z)

    def from_halfplane(self, zeta: complex) -> complex:
        return self.point * (zeta - 1j) / (zeta + 1j)

    def distance(self, zx: complex, zy: complex) -> float:
        hx, hy = self.to_halfplane(zx), self.to_halfplane(zy)
        scale = 2.0 * math.sqrt(hx.imag * hy.imag)
        return _orbit_minimum(
            hx.real - hy.real,
            abs(self.shift),
            lambda dx: halfplane_distance(complex(dx, hx.imag), complex(0.0, hy.imag)),
            lambda dx: 2.0 * math.asinh(abs(dx) / scale),
        )

    def injectivity(self, z: complex) -> float:
        y = self.to_halfplane(z).imag
        return math.asinh(abs(self.shift) / (2.0 * y))

    def reduce(self, z: complex) -> Tuple[complex, int]:
        h = self.to_halfplane(z)
        tau = self.shift
        r = math.remainder(h.real, abs(tau))
        k = round((h.real - r) / tau)
        if k == 0:
            return z, 0
        return self.from_halfplane(complex(r, h.imag)), k


class SurfaceModel(ABC):
    """Модельная гиперболическая поверхность с униформизирующей картой 𝔻 → поверхность."""

    kind: ClassVar[str] = "abstract"
    annulus_type: ClassVar[bool] = False
    exact_metric: ClassVar[bool] = True

    @abstractmethod
    def contains(self, rep: complex) -> bool: ...

    @abstractmethod
    def lift(self, rep: complex) -> complex:
        """Подъём представителя в диск."""

    @abstractmethod
    def project(self, z: complex) -> complex:
        """Представитель поверхности для точки диска."""

    @abstractmethod
    def density(self, rep: complex) -> float: ...

    def lift_distance(self, zx: complex, zy: complex) -> float:
        return disc_distance(zx, zy)

    def lift_injectivity(self, z: complex) -> float:
        return math.inf

    def reduce(self, z: complex) -> Tuple[complex, Optional[MobiusDisc]]:
        """Приводит подъём в фундаментальную область; возвращает (z′, δ), z′ = δ(z)."""
        return z, None

    @property
    def deck_generator(self) -> Optional[MobiusDisc]:
        return None

    def distance(self, x: complex, y: complex) -> float:
        return self.lift_distance(self.lift(x), self.lift(y))

    def injectivity(self, rep: complex) -> float:
        return self.lift_injectivity(self.lift(rep))

    def describe(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True, slots=True)
class DiscSurface(SurfaceModel):
    kind: ClassVar[str] = "disc"

    def contains(self, rep: complex) -> bool:
        return abs(rep) <= 1.0 - BOUNDARY_BAND

    def lift(self, rep: complex) -> complex:
        if not self.contains(rep):
            raise DomainError(f"{rep} is not a point of the disc")
        return complex(rep)

    def project(self, z: complex) -> complex:
        return complex(z)

    def density(self, rep: complex) -> float:
        if not self.contains(rep):
            raise DomainError(f"{rep} is not a point of the disc")
        return disc_density(rep)


@dataclass(frozen=True, slots=True, eq=False)
class CyclicQuotient(SurfaceModel):
    """
    Фактор 𝔻/⟨γ⟩ по гиперболическому или параболическому γ.

    Для очень коротких ℓ след γ неотличим от параболического, поэтому нормальную форму
    можно передать явно (strip или cusp); иначе она восстанавливается классификацией.
    """
    generator: MobiusDisc
    strip: Optional[StripForm] = None
    cusp: Optional[CuspForm] = None

    kind: ClassVar[str] = "cyclic_quotient"

    def __post_init__(self) -> None:
        if self.strip is None and self.cusp is None:
            cls = mobius_classify(self.generator)
            if cls.kind == "hyperbolic":
                chart = axis_chart(cls.repelling, cls.attracting)
                object.__setattr__(self, "strip", StripForm(chart, cls.translation_length))
            elif cls.kind == "parabolic":
                p = cls.fixed_points[0]
                form = CuspForm(point=p, shift=1.0)
                shift = (form.to_halfplane(self.generator(0j)) - 1j).real
                object.__setattr__(self, "cusp", CuspForm(point=p, shift=shift))
            else:
                raise DomainError(f"{cls.kind} generator has an interior fixed point; quotient is not a surface")

    # --- constructors -----------------------------------------------------
    @classmethod
    def hyperbolic(cls, chart: MobiusDisc, length: float) -> "CyclicQuotient":
        """Фактор по сдвигу на ℓ вдоль оси chart(вещественный диаметр)."""
        gen = chart.compose(MobiusDisc.real_translation(length)).compose(chart.inverse())
        return cls(generator=gen, strip=StripForm(chart, length))

    @classmethod
    def parabolic(cls, point: complex, shift: float) -> "CyclicQuotient":
        p = point / abs(point)
        # в полуплоскости γ есть сдвиг ζ ↦ ζ + τ; переносим обратно в диск
        cayley = cayley_matrix(p)
        shift_matrix = np.array([[1.0, shift], [0.0, 1.0]], dtype=complex)
        m = np.linalg.inv(cayley) @ shift_matrix @ cayley
        return cls(generator=MobiusDisc.from_matrix(m), cusp=CuspForm(point=p, shift=shift))

    @property
    def annulus_type(self) -> bool:  # type: ignore[override]
        return self.strip is not None

    @property
    def form(self):
        return self.strip if self.strip is not None else self.cusp

    @property
    def translation_length(self) -> Optional[float]:
        return self.strip.length if self.strip is not None else None

    @property
    def deck_generator(self) -> MobiusDisc:
        return self.generator

    def contains(self, rep: complex) -> bool:
        return abs(rep) <= 1.0 - BOUNDARY_BAND

    def lift(self, rep: complex) -> complex:
        if not self.contains(rep):
            raise DomainError(f"{rep} is not a point of the disc")
        return complex(rep)

    def project(self, z: complex) -> complex:
        return self.reduce(z)[0]

    def density(self, rep: complex) -> float:
        return disc_density(self.lift(rep))

    def lift_distance(self, zx: complex, zy: complex) -> float:
        return self.form.distance(zx, zy)

    def lift_injectivity(self, z: complex) -> float:
        return self.form.injectivity(z)

    def reduce(self, z: complex) -> Tuple[complex, Optional[MobiusDisc]]:
        z_red, k = self.form.reduce(z)
        if k == 0:
            return z, None
        return z_red, self.generator.power(-k)

    def describe(self) -> dict:
        if self.strip is not None:
            return {"kind": self.kind, "generator": "hyperbolic", "translation_length": self.strip.length}
        return {"kind": self.kind, "generator": "parabolic", "point": [self.cusp.point.real, self.cusp.point.imag],
                "shift": self.cusp.shift}


@dataclass(frozen=True, slots=True)
class RoundAnnulus(SurfaceModel):
    """
    Круглое кольцо r < |a| < 1, заданное через L = log(1/r).

    Логарифмическая координата u = log a, Re u ∈ (−L, 0). Карта в полосу:
    u = −L/2 + i(L/π)·w, подъём z = tanh(w/2). Порождающий сдвиг ℓ = 2π²/L.
    """
    log_inner: float

    kind: ClassVar[str] = "round_annulus"
    annulus_type: ClassVar[bool] = True

    def __post_init__(self) -> None:
        if not (self.log_inner > 0 and math.isfinite(self.log_inner)):
            raise DomainError(f"log(1/r) must be positive and finite, got {self.log_inner}")

    @classmethod
    def from_inner_radius(cls, r: float) -> "RoundAnnulus":
        if not 0.0 < r < 1.0:
            raise DomainError(f"inner radius must lie in (0, 1), got {r}")
        return cls(log_inner=-math.log(r))

    @property
    def inner_radius(self) -> float:
        return math.exp(-self.log_inner)

    @property
    def translation_length(self) -> float:
        return 2.0 * math.pi ** 2 / self.log_inner

    @property
    def modulus(self) -> float:
        return self.log_inner / (2.0 * math.pi)

    @property
    def strip(self) -> StripForm:
        return StripForm(MobiusDisc.identity(), self.translation_length)

    @property
    def deck_generator(self) -> MobiusDisc:
        return MobiusDisc.real_translation(self.translation_length)

    # --- charts -----------------------------------------------------------
    def log_to_strip(self, u: complex) -> complex:
        return -1j * (math.pi / self.log_inner) * (u + 0.5 * self.log_inner)

    def strip_to_log(self, w: complex) -> complex:
        return -0.5 * self.log_inner + 1j * (self.log_inner / math.pi) * w

    def lift_log(self, u: complex) -> complex:
        if not self.contains_log(u):
            raise DomainError(f"log-coordinate {u} is outside the annulus")
        return cmath.tanh(0.5 * self.log_to_strip(u))

    def to_log(self, z: complex) -> complex:
        return self.strip_to_log(2.0 * cmath.atanh(z))

    def contains_log(self, u: complex) -> bool:
        return -self.log_inner < u.real < 0.0

    def contains(self, rep: complex) -> bool:
        return rep != 0 and self.contains_log(complex(math.log(abs(rep)), 0.0))

    def lift(self, rep: complex) -> complex:
        if not self.contains(rep):
            raise DomainError(f"{rep} is outside the annulus r < |a| < 1 (L = {self.log_inner})")
        return self.lift_log(cmath.log(rep))

    def project(self, z: complex) -> complex:
        return cmath.exp(self.to_log(z))

    def chart_derivative(self, rep: complex) -> complex:
        """dz/da для подъёма z(a)."""
        u = cmath.log(rep)
        w = self.log_to_strip(u)
        z = cmath.tanh(0.5 * w)
        return 0.5 * (1.0 - z * z) * (-1j * math.pi / self.log_inner) / rep

    def log_density(self, u: complex) -> float:
        """Плотность в координате u = log a."""
        L = self.log_inner
        return (math.pi / L) / math.sin(math.pi * (-u.real) / L)

    def density(self, rep: complex) -> float:
        if not self.contains(rep):
            raise DomainError(f"{rep} is outside the annulus")
        return self.log_density(complex(math.log(abs(rep)), 0.0)) / abs(rep)

    def lift_distance(self, zx: complex, zy: complex) -> float:
        return self.strip.distance(zx, zy)

    def lift_injectivity(self, z: complex) -> float:
        return self.strip.injectivity(z)

    def reduce(self, z: complex) -> Tuple[complex, Optional[MobiusDisc]]:
        z_red, k = self.strip.reduce(z)
        if k == 0:
            return z, None
        return z_red, MobiusDisc.real_translation(-k * self.translation_length)

    def describe(self) -> dict:
        return {"kind": self.kind, "log_inner": self.log_inner, "translation_length": self.translation_length}


# ---------------------------------------------------------------------------
#  Операции над точками поверхностей
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class SurfacePointRep:
    surface: SurfaceModel
    rep: complex

    def __post_init__(self) -> None:
        object.__setattr__(self, "rep", complex(self.rep))
        if not self.surface.contains(self.rep):
            raise DomainError(f"{self.rep} is not a point of {self.surface.kind}")


@dataclass(frozen=True, slots=True)
class CollarBand:
    """Полоса {inj ≤ eps} вокруг центральной геодезической."""
    eps: float
    length: float
    empty: bool
    half_width: float = 0.0
    strip_height: float = 0.0
    modulus: float = 0.0
    log_radii: Optional[Tuple[float, float]] = None

    def contains_strip(self, w: complex, tol: float = 0.0) -> bool:
        return not self.empty and abs(w.imag) <= self.strip_height + tol


def surface_density(p: SurfacePointRep) -> float:
    return p.surface.density(p.rep)


def surface_distance(x: SurfacePointRep, y: SurfacePointRep) -> float:
    if x.surface is not y.surface and x.surface != y.surface:
        raise SurfaceMismatchError("points lie on different surfaces")
    return x.surface.distance(x.rep, y.rep)


def injectivity_radius(p: SurfacePointRep) -> float:
    return p.surface.injectivity(p.rep)


def _require_annulus(s: SurfaceModel) -> float:
    if isinstance(s, RoundAnnulus):
        return s.translation_length
    if isinstance(s, CyclicQuotient):
        if s.strip is None:
            raise CuspError("cusp-type surface: parabolic quotient has no core geodesic")
        return s.strip.length
    raise DomainError(f"{s.kind} is not an annulus-type surface")


def core_geodesic_length(s: SurfaceModel) -> float:
    return _require_annulus(s)


def annulus_modulus(s: SurfaceModel) -> float:
    """Mod = π/ℓ (для круглого кольца совпадает с log(1/r)/(2π))."""
    if isinstance(s, RoundAnnulus):
        return s.modulus
    return math.pi / _require_annulus(s)


def collar_annulus(s: SurfaceModel, eps: float, margulis: Optional[float] = None) -> CollarBand:
    """
    Подкольцо точек с inj ≤ eps. Точка на расстоянии D от оси имеет
    inj = asinh(cosh D · sinh(ℓ/2)), откуда D = acosh(sinh(eps)/sinh(ℓ/2)).
    """
    ell = _require_annulus(s)
    if not eps > 0:
        raise DomainError("eps must be positive")
    if margulis is not None and eps > margulis:
        raise DomainError(f"eps={eps} exceeds the Margulis threshold {margulis}")
    ratio = math.sinh(eps) / math.sinh(0.5 * ell) if ell < 1400 else 0.0
    if ratio <= 1.0:
        return CollarBand(eps=eps, length=ell, empty=True)
    half_width = math.acosh(ratio)
    theta = math.atan(math.sinh(half_width))
    log_radii = None
    if isinstance(s, RoundAnnulus):
        L = s.log_inner
        log_radii = (-0.5 * L - (L / math.pi) * theta, -0.5 * L + (L / math.pi) * theta)
    return CollarBand(eps=eps, length=ell, empty=False, half_width=half_width, strip_height=theta,
                      modulus=2.0 * theta / ell, log_radii=log_radii)


def to_cyclic_quotient(s: RoundAnnulus) -> CyclicQuotient:
    if not isinstance(s, RoundAnnulus):
        raise DomainError("to_cyclic_quotient expects a round annulus")
    return CyclicQuotient.hyperbolic(MobiusDisc.identity(), s.translation_length)


def cayley_matrix(p: complex) -> np.ndarray:
    """Матрица C(z) = i(p + z)/(p − z): диск → верхняя полуплоскость, p ↦ ∞."""
    return np.array([[1j, 1j * p], [-1.0, p]], dtype=complex)
