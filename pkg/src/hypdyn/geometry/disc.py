# hypdyn/geometry/disc.py
"""
Гиперболическая геометрия единичного диска (кривизна −1, плотность 2/(1 − |z|²))
и его конформные автоморфизмы.

Автоморфизм хранится как пара (rotation, center) и внутри представляется
матрицей из SU(1,1): [[a, b], [conj(b), conj(a)]], |a|² − |b|² = 1.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from hypdyn.errors import DomainError

logger = logging.getLogger(__name__)

BOUNDARY_BAND = 1e-12
UNIT_TOL = 1e-12
PARABOLIC_TOL = 1e-12
COLLAR_OVERFLOW = 1400.0

PointLike = Union["DiscPoint", complex, float]


@dataclass(frozen=True, slots=True)
class DiscPoint:
    """Точка открытого единичного диска; |value| ≤ 1 − 1e−12."""
    value: complex

    def __post_init__(self) -> None:
        v = complex(self.value)
        if not (cmath.isfinite(v) and abs(v) <= 1.0 - BOUNDARY_BAND):
            raise DomainError(f"{v} is not a point of the open unit disc")
        object.__setattr__(self, "value", v)

    def __complex__(self) -> complex:
        return self.value


def _as_complex(z: PointLike) -> complex:
    return z.value if isinstance(z, DiscPoint) else DiscPoint(complex(z)).value


def _one_minus_sq(z: complex) -> float:
    r = abs(z)
    return (1.0 - r) * (1.0 + r)


def disc_density(z: PointLike) -> float:
    """Плотность гиперболической метрики 2/(1 − |z|²)."""
    return 2.0 / _one_minus_sq(_as_complex(z))


def disc_distance(z: PointLike, w: PointLike) -> float:
    """Гиперболическое расстояние d_𝔻(z, w)."""
    z, w = _as_complex(z), _as_complex(w)
    if z == w:
        return 0.0
    return 2.0 * math.asinh(abs(z - w) / math.sqrt(_one_minus_sq(z) * _one_minus_sq(w)))


def disc_distance_array(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Векторизованная версия disc_distance (без проверки принадлежности диску)."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    rz, rw = np.abs(z), np.abs(w)
    denom = np.sqrt((1.0 - rz) * (1.0 + rz) * (1.0 - rw) * (1.0 + rw))
    return 2.0 * np.arcsinh(np.abs(z - w) / denom)


def disc_density_array(z: np.ndarray) -> np.ndarray:
    r = np.abs(np.asarray(z, dtype=complex))
    return 2.0 / ((1.0 - r) * (1.0 + r))


def distortion_in_disc(z: complex, fz: complex, derivative: complex) -> float:
    """(1 − |z|²)|f′(z)| / (1 − |f(z)|²), искажение отображения 𝔻 → 𝔻."""
    return _one_minus_sq(z) * abs(derivative) / _one_minus_sq(fz)


# ---------------------------------------------------------------------------
#  Möbius automorphisms
# ---------------------------------------------------------------------------

def _su11(a: complex, b: complex) -> np.ndarray:
    return np.array([[a, b], [b.conjugate(), a.conjugate()]], dtype=complex)


@dataclass(frozen=True, slots=True)
class MobiusDisc:
    """
    Автоморфизм диска z ↦ rotation·(z − center)/(1 − conj(center)·z).
    """
    rotation: complex = 1.0 + 0.0j
    center: complex = 0.0j
    _matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        rot = complex(self.rotation)
        c = complex(self.center)
        if abs(abs(rot) - 1.0) > UNIT_TOL:
            raise DomainError(f"rotation {rot} is not unimodular")
        if not abs(c) < 1.0:
            raise DomainError(f"center {c} is not inside the unit disc")
        rot = rot / abs(rot)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "center", c)
        half = cmath.sqrt(rot)
        s = math.sqrt(_one_minus_sq(c))
        object.__setattr__(self, "_matrix", _su11(half / s, -half * c / s))

    # --- constructors -----------------------------------------------------
    @classmethod
    def identity(cls) -> "MobiusDisc":
        return cls()

    @classmethod
    def rotation_by(cls, theta: float) -> "MobiusDisc":
        return cls(rotation=cmath.exp(1j * theta))

    @classmethod
    def real_translation(cls, s: float) -> "MobiusDisc":
        """Сдвиг на s вдоль вещественного диаметра: z ↦ (z + t)/(1 + t z), t = tanh(s/2)."""
        return cls(rotation=1.0, center=-math.tanh(s / 2.0))

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "MobiusDisc":
        a, b = complex(m[0, 0]), complex(m[0, 1])
        det = abs(a) ** 2 - abs(b) ** 2
        if det <= 0:
            raise DomainError("matrix does not preserve the unit disc")
        return cls(rotation=a / a.conjugate(), center=-b / a)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix.copy()

    # --- action -----------------------------------------------------------
    def __call__(self, z: complex) -> complex:
        return self.rotation * (z - self.center) / (1.0 - self.center.conjugate() * z)

    def apply_array(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return self.rotation * (z - self.center) / (1.0 - np.conj(self.center) * z)

    def derivative(self, z: complex) -> complex:
        c = self.center
        return self.rotation * _one_minus_sq(c) / (1.0 - c.conjugate() * z) ** 2

    def compose(self, other: "MobiusDisc") -> "MobiusDisc":
        """self ∘ other."""
        return MobiusDisc.from_matrix(self._matrix @ other._matrix)

    def inverse(self) -> "MobiusDisc":
        m = self._matrix
        return MobiusDisc.from_matrix(_su11(m[0, 0].conjugate(), -m[0, 1]))

    def power(self, k: int) -> "MobiusDisc":
        return MobiusDisc.from_matrix(np.linalg.matrix_power(self._matrix, k) if k >= 0
                                      else np.linalg.matrix_power(self.inverse()._matrix, -k))

    @property
    def trace(self) -> float:
        return 2.0 * self._matrix[0, 0].real

    def __matmul__(self, other: "MobiusDisc") -> "MobiusDisc":
        return self.compose(other)


@dataclass(frozen=True, slots=True)
class IsometryClass:
    kind: str  # identity | elliptic | parabolic | hyperbolic
    translation_length: Optional[float] = None
    fixed_points: Tuple[complex, ...] = ()
    degenerate: bool = False
    attracting: Optional[complex] = None
    repelling: Optional[complex] = None


def mobius_apply(m: MobiusDisc, z: PointLike) -> DiscPoint:
    return DiscPoint(m(_as_complex(z)))


def mobius_compose(m1: MobiusDisc, m2: MobiusDisc) -> MobiusDisc:
    return m1.compose(m2)


def mobius_inverse(m: MobiusDisc) -> MobiusDisc:
    return m.inverse()


def _fixed_points(m: MobiusDisc) -> List[complex]:
    # b̄ z² + (ā − a) z − b = 0
    a, b = complex(m._matrix[0, 0]), complex(m._matrix[0, 1])
    qa, qb, qc = b.conjugate(), a.conjugate() - a, -b
    if abs(qa) < 1e-300:
        return [0j]
    root = cmath.sqrt(qb * qb - 4 * qa * qc)
    # устойчивая форма корней квадратного уравнения
    q = -0.5 * (qb + root) if (qb.conjugate() * root).real >= 0 else -0.5 * (qb - root)
    if q == 0:
        return [-qb / (2 * qa)]
    return [q / qa, qc / q]


def mobius_classify(m: MobiusDisc) -> IsometryClass:
    a, b = complex(m._matrix[0, 0]), complex(m._matrix[0, 1])
    if abs(b) < UNIT_TOL and abs(m.rotation - 1.0) < UNIT_TOL:
        return IsometryClass(kind="identity")
    tr = abs(2.0 * a.real)
    gap = tr - 2.0
    if abs(gap) <= PARABOLIC_TOL:
        roots = _fixed_points(m)
        p = roots[0] if len(roots) == 1 else 0.5 * (roots[0] + roots[1])
        p = p / abs(p)
        return IsometryClass(kind="parabolic", fixed_points=(p,), degenerate=abs(gap) > 0)
    if gap < 0:
        roots = _fixed_points(m)
        inside = min(roots, key=abs)
        return IsometryClass(kind="elliptic", fixed_points=(inside,))
    roots = [r / abs(r) for r in _fixed_points(m)]
    ell = 2.0 * math.acosh(tr / 2.0)
    p1, p2 = roots
    # m′(p) = 1/(b̄ p + ā)²
    gain1 = abs(b.conjugate() * p1 + a.conjugate()) ** -2
    attracting, repelling = (p1, p2) if gain1 < 1.0 else (p2, p1)
    return IsometryClass(kind="hyperbolic", translation_length=ell, fixed_points=(p1, p2),
                         attracting=attracting, repelling=repelling)


def axis_chart(repelling: complex, attracting: complex) -> MobiusDisc:
    """
    Автоморфизм T, переводящий вещественный диаметр в геодезическую с концами
    repelling (образ −1) и attracting (образ +1).
    """
    p1, p2 = repelling / abs(repelling), attracting / abs(attracting)
    s = p1 + p2
    if abs(s) < 1e-12:
        return MobiusDisc(rotation=p2)
    u = s / abs(s)
    cos_phi = min(abs(s) / 2.0, 1.0)
    sin_phi = math.sqrt(max(0.0, 1.0 - cos_phi * cos_phi))
    x0 = (1.0 - sin_phi) / cos_phi
    chart = MobiusDisc(rotation=u * 1j, center=1j * x0)
    end = chart(1.0)
    if abs(end - p2) > abs(end - p1):
        chart = chart.compose(MobiusDisc(rotation=-1.0))
    return chart


def collar_width(ell: float) -> float:
    """η(ℓ) = ½ log((cosh(ℓ/2) + 1)/(cosh(ℓ/2) − 1)) = log coth(ℓ/4)."""
    if not ell > 0:
        raise DomainError(f"collar width needs a positive length, got {ell}")
    if ell > COLLAR_OVERFLOW:
        return 0.0
    return math.log1p(2.0 / math.expm1(ell / 2.0))
