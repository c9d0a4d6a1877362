# hypdyn/tower/maps.py
"""
Семейства голоморфных отображений между модельными поверхностями.

Каждое семейство даёт значение и точную производную в плоской координате;
мономиальные семейства (scaling, rotation, power и их композиции) дополнительно
имеют логарифмическую форму u ↦ d·u + β, которой пользуются кольца.
"""
from __future__ import annotations

import cmath
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import ClassVar, Optional, Tuple

from hypdyn.blaschke.product import BlaschkeDeg2
from hypdyn.errors import DomainError
from hypdyn.geometry.disc import MobiusDisc
from hypdyn.geometry.surfaces import RoundAnnulus, SurfaceModel

logger = logging.getLogger(__name__)

LogForm = Tuple[int, complex]


class MapElement(ABC):
    family: ClassVar[str] = "abstract"

    @abstractmethod
    def evaluate(self, z: complex) -> complex: ...

    @abstractmethod
    def derivative(self, z: complex) -> complex: ...

    def __call__(self, z: complex) -> complex:
        return self.evaluate(z)

    def log_form(self) -> Optional[LogForm]:
        """(d, β) для u ↦ d·u + β в координате u = log z; None для немономиальных."""
        return None

    def unimodular(self) -> bool:
        """Граница |z| = 1 переходит в себя (для масштабов: объявленное |c| = 1)."""
        return True

    def is_covering(self, src: SurfaceModel, dst: SurfaceModel) -> bool:
        """Объявленное неразветвлённое накрытие между src и dst."""
        return False

    @abstractmethod
    def describe(self) -> dict: ...


@dataclass(frozen=True, slots=True)
class Scaling(MapElement):
    c: complex
    modulus_one: Optional[bool] = None
    family: ClassVar[str] = "scaling"

    def __post_init__(self) -> None:
        c = complex(self.c)
        if not 0 < abs(c) <= 1.0 + 1e-15:
            raise DomainError(f"scaling factor must satisfy 0 < |c| ≤ 1, got {c}")
        object.__setattr__(self, "c", c)

    def evaluate(self, z: complex) -> complex:
        return self.c * z

    def derivative(self, z: complex) -> complex:
        return self.c

    def log_form(self) -> LogForm:
        return 1, cmath.log(self.c)

    def unimodular(self) -> bool:
        if self.modulus_one is not None:
            return self.modulus_one
        return abs(abs(self.c) - 1.0) <= 1e-15

    def is_covering(self, src: SurfaceModel, dst: SurfaceModel) -> bool:
        if not self.unimodular():
            return False
        if isinstance(src, RoundAnnulus) or isinstance(dst, RoundAnnulus):
            return src == dst
        return src.kind == dst.kind == "disc"

    def describe(self) -> dict:
        return {"family": self.family, "c": [self.c.real, self.c.imag]}


@dataclass(frozen=True, slots=True)
class Rotation(MapElement):
    theta: float
    family: ClassVar[str] = "rotation"

    def evaluate(self, z: complex) -> complex:
        return cmath.exp(1j * self.theta) * z

    def derivative(self, z: complex) -> complex:
        return cmath.exp(1j * self.theta)

    def log_form(self) -> LogForm:
        return 1, 1j * self.theta

    def is_covering(self, src: SurfaceModel, dst: SurfaceModel) -> bool:
        if isinstance(src, RoundAnnulus) or isinstance(dst, RoundAnnulus):
            return src == dst
        return src.kind == dst.kind == "disc"

    def describe(self) -> dict:
        return {"family": self.family, "theta": self.theta}


@dataclass(frozen=True, slots=True)
class Blaschke2(MapElement):
    """b_a как отображение 𝔻 → 𝔻 (разветвлено) или U_n → U_{n+1} модельной башни (накрытие)."""
    a: float
    product: BlaschkeDeg2 = field(init=False, repr=False, compare=False)
    family: ClassVar[str] = "blaschke2"

    def __post_init__(self) -> None:
        object.__setattr__(self, "product", BlaschkeDeg2(self.a))
        object.__setattr__(self, "a", self.product.a)

    def evaluate(self, z: complex) -> complex:
        return self.product(z)

    def derivative(self, z: complex) -> complex:
        return self.product.derivative(z)

    def is_covering(self, src: SurfaceModel, dst: SurfaceModel) -> bool:
        return src.kind == dst.kind == "planar_domain"

    def describe(self) -> dict:
        return {"family": self.family, "a": self.a}


@dataclass(frozen=True, slots=True)
class Power(MapElement):
    """z ↦ s·z^d."""
    degree: int
    post_scale: complex = 1.0 + 0.0j
    modulus_one: Optional[bool] = None
    family: ClassVar[str] = "power"

    def __post_init__(self) -> None:
        if int(self.degree) != self.degree or self.degree < 1:
            raise DomainError(f"power degree must be a positive integer, got {self.degree}")
        s = complex(self.post_scale)
        if not 0 < abs(s) <= 1.0 + 1e-15:
            raise DomainError(f"post-scaling must satisfy 0 < |s| ≤ 1, got {s}")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "post_scale", s)

    def evaluate(self, z: complex) -> complex:
        return self.post_scale * z ** self.degree

    def derivative(self, z: complex) -> complex:
        d = self.degree
        return self.post_scale * d * z ** (d - 1)

    def log_form(self) -> LogForm:
        return self.degree, cmath.log(self.post_scale)

    def unimodular(self) -> bool:
        if self.modulus_one is not None:
            return self.modulus_one
        return abs(abs(self.post_scale) - 1.0) <= 1e-15

    def is_covering(self, src: SurfaceModel, dst: SurfaceModel) -> bool:
        if not self.unimodular():
            return False
        if isinstance(src, RoundAnnulus) and isinstance(dst, RoundAnnulus):
            return math.isclose(dst.log_inner, self.degree * src.log_inner, rel_tol=1e-12)
        return self.degree == 1 and src.kind == dst.kind == "disc"

    def describe(self) -> dict:
        return {"family": self.family, "degree": self.degree,
                "post_scale": [self.post_scale.real, self.post_scale.imag]}


@dataclass(frozen=True, slots=True)
class MobiusMap(MapElement):
    m: MobiusDisc
    family: ClassVar[str] = "mobius"

    def evaluate(self, z: complex) -> complex:
        return self.m(z)

    def derivative(self, z: complex) -> complex:
        return self.m.derivative(z)

    def is_covering(self, src: SurfaceModel, dst: SurfaceModel) -> bool:
        return not isinstance(src, RoundAnnulus) and not isinstance(dst, RoundAnnulus)

    def describe(self) -> dict:
        m = self.m
        return {"family": self.family, "rotation": [m.rotation.real, m.rotation.imag],
                "center": [m.center.real, m.center.imag]}


@dataclass(frozen=True, slots=True)
class Composite(MapElement):
    """Композиция parts[-1] ∘ … ∘ parts[0] (первый элемент применяется первым)."""
    parts: Tuple[MapElement, ...]
    family: ClassVar[str] = "composite"

    def __post_init__(self) -> None:
        if not self.parts:
            raise DomainError("composite needs at least one part")
        object.__setattr__(self, "parts", tuple(self.parts))

    def evaluate(self, z: complex) -> complex:
        for part in self.parts:
            z = part.evaluate(z)
        return z

    def derivative(self, z: complex) -> complex:
        acc = 1.0 + 0.0j
        for part in self.parts:
            acc *= part.derivative(z)
            z = part.evaluate(z)
        return acc

    def unimodular(self) -> bool:
        return all(p.unimodular() for p in self.parts)

    def log_form(self) -> Optional[LogForm]:
        d, beta = 1, 0j
        for part in self.parts:
            form = part.log_form()
            if form is None:
                return None
            d, beta = form[0] * d, form[0] * beta + form[1]
        return d, beta

    def is_covering(self, src: SurfaceModel, dst: SurfaceModel) -> bool:
        if len(self.parts) == 1:
            return self.parts[0].is_covering(src, dst)
        if isinstance(src, RoundAnnulus) and isinstance(dst, RoundAnnulus):
            form = self.log_form()
            return (form is not None and all(p.unimodular() for p in self.parts)
                    and math.isclose(dst.log_inner, form[0] * src.log_inner, rel_tol=1e-12))
        return all(p.is_covering(src, dst) for p in self.parts) and src.kind == dst.kind

    def describe(self) -> dict:
        return {"family": self.family, "parts": [p.describe() for p in self.parts]}


def finite_difference_derivative(f: MapElement, z: complex, step: float = 1e-6) -> complex:
    """Центральная разность с экстраполяцией Ричардсона."""
    def central(h: float) -> complex:
        return (f.evaluate(z + h) - f.evaluate(z - h)) / (2.0 * h)

    return (4.0 * central(0.5 * step) - central(step)) / 3.0


def derivative_matches(f: MapElement, z: complex, step: float = 1e-6, rtol: float = 1e-6) -> bool:
    exact = f.derivative(z)
    approx = finite_difference_derivative(f, z, step)
    return abs(exact - approx) <= rtol * max(abs(exact), 1.0)
