# hypdyn/blaschke/product.py
"""Произведение Бляшке степени 2: b_a(z) = z·(z + a)/(1 + a z), 0 < a < 1."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from hypdyn.errors import DomainError

ArrayLike = Union[complex, np.ndarray]


@dataclass(frozen=True, slots=True)
class BlaschkeDeg2:
    a: float

    def __post_init__(self) -> None:
        a = float(self.a)
        if not 0.0 < a < 1.0:
            raise DomainError(f"Blaschke parameter must lie in (0, 1), got {a}")
        object.__setattr__(self, "a", a)

    def __call__(self, z: ArrayLike) -> ArrayLike:
        return z * (z + self.a) / (1.0 + self.a * z)

    def derivative(self, z: ArrayLike) -> ArrayLike:
        a = self.a
        return (a * z * z + 2.0 * z + a) / (1.0 + a * z) ** 2

    def second_derivative(self, z: ArrayLike) -> ArrayLike:
        a = self.a
        return 2.0 * (1.0 - a * a) / (1.0 + a * z) ** 3

    @property
    def critical_point(self) -> float:
        # (−1 + √(1 − a²))/a без вычитания близких чисел
        return -self.a / (1.0 + math.sqrt(1.0 - self.a * self.a))

    @property
    def critical_value(self) -> float:
        c = self.critical_point
        return -c * c

    def sibling(self, z: ArrayLike) -> ArrayLike:
        """Второй корень уравнения b(ζ) = b(z): сумма корней равна −a(1 − b(z))."""
        return -self.a * (1.0 - self(z)) - z

    def preimages(self, w: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
        """Корни z² + a(1 − w)z − w = 0 (векторизовано по w)."""
        w = np.asarray(w, dtype=complex)
        B = self.a * (1.0 - w)
        root = np.sqrt(B * B + 4.0 * w)
        sign = np.where((np.conj(B) * root).real >= 0.0, 1.0, -1.0)
        q = -0.5 * (B + sign * root)
        safe = np.where(q == 0, 1.0, q)
        other = np.where(q == 0, -B - q, -w / safe)
        if other.ndim == 0:
            return complex(q), complex(other)
        return q, other

    def describe(self) -> dict:
        return {"family": "blaschke2", "a": self.a}


def blaschke_eval(b: BlaschkeDeg2, z: ArrayLike) -> ArrayLike:
    return b(z)


def blaschke_deriv(b: BlaschkeDeg2, z: ArrayLike) -> ArrayLike:
    return b.derivative(z)


def critical_data(b: BlaschkeDeg2) -> Tuple[float, float]:
    return b.critical_point, b.critical_value


def preimage_points(b: BlaschkeDeg2, w: complex) -> list:
    """Два прообраза с кратностью (двойной корень в критическом значении повторяется)."""
    z1, z2 = b.preimages(complex(w))
    if abs(complex(w) - b.critical_value) < 1e-14:
        c = complex(b.critical_point)
        return [c, c]
    return [complex(z1), complex(z2)]
