# hypdyn/classify/sampling.py
"""Выбор точек и пар на поверхности 0 для проверок классификации."""
from __future__ import annotations

import cmath
import math
from typing import List, Tuple

import numpy as np

from hypdyn.geometry.surfaces import CyclicQuotient, RoundAnnulus, SurfaceModel

Pair = Tuple[complex, complex]


def _from_strip(surface: SurfaceModel, s: float, theta: float) -> complex:
    """Представитель поверхности по полосным координатам (s, θ)."""
    if isinstance(surface, RoundAnnulus):
        return cmath.exp(surface.strip_to_log(complex(s, theta)))
    return surface.strip.from_strip(complex(s, theta))


def random_points(surface: SurfaceModel, rng: np.random.Generator, count: int, depth: float = 0.85) -> List[complex]:
    points: List[complex] = []
    if isinstance(surface, RoundAnnulus) or (isinstance(surface, CyclicQuotient) and surface.strip is not None):
        ell = surface.translation_length
        for _ in range(count):
            s = (rng.random() - 0.5) * ell
            theta = (rng.random() - 0.5) * 2.0 * depth * 1.4
            points.append(_from_strip(surface, s, theta))
        return points
    if isinstance(surface, CyclicQuotient):
        cusp = surface.cusp
        for _ in range(count):
            zeta = complex(rng.random() * abs(cusp.shift), 0.5 + 2.5 * rng.random())
            points.append(cusp.from_halfplane(zeta))
        return points
    while len(points) < count:
        z = depth * math.sqrt(rng.random()) * cmath.exp(2j * math.pi * rng.random())
        if surface.contains(z):
            points.append(complex(z))
    return points


def sample_pairs(surface: SurfaceModel, rng: np.random.Generator, count: int) -> List[Pair]:
    """
    Пары для проверки модальности: случайные, пары диаметрального масштаба и, для
    колец и гиперболических факторов, пары вдоль оси и поперёк неё.
    """
    pairs: List[Pair] = []
    annular = isinstance(surface, RoundAnnulus) or (isinstance(surface, CyclicQuotient) and surface.strip is not None)
    if annular:
        ell = surface.translation_length
        quarter = max(count // 4, 1)
        for _ in range(quarter):
            theta = (rng.random() - 0.5) * 2.0
            # несопоставимый с ℓ сдвиг вдоль оси
            offset = ell * (0.1 + 0.3 * rng.random()) / math.sqrt(2.0)
            pairs.append((_from_strip(surface, 0.0, theta), _from_strip(surface, offset, theta)))
        for _ in range(quarter):
            s = (rng.random() - 0.5) * ell
            t1, t2 = sorted((rng.random() - 0.5) * 2.4 for _ in range(2))
            pairs.append((_from_strip(surface, s, t1), _from_strip(surface, s, t2 + 0.05)))
        far = 1.45
        pairs.append((_from_strip(surface, 0.0, -far), _from_strip(surface, 0.5 * ell / math.sqrt(3.0), far)))
    else:
        for _ in range(max(count // 4, 1)):
            phi = 2.0 * math.pi * rng.random()
            z = 0.85 * cmath.exp(1j * phi)
            if surface.contains(z) and surface.contains(-z):
                pairs.append((z, -z))
    while len(pairs) < count:
        x, y = random_points(surface, rng, 2)
        pairs.append((x, y))
    return pairs[:count] if len(pairs) > count else pairs


def second_point(surface: SurfaceModel, rep: complex) -> complex:
    """Точка рядом с rep (для сверки вердиктов в двух точках)."""
    if isinstance(surface, RoundAnnulus):
        u = cmath.log(rep)
        shifted = complex(u.real + 0.1 * (-0.5 * surface.log_inner - u.real) - 0.02 * surface.log_inner, u.imag + 0.7)
        return cmath.exp(shifted)
    if isinstance(surface, CyclicQuotient):
        return 0.5 * rep + 0.15j
    candidate = 0.5 * rep + 0.2 + 0.1j
    return candidate if surface.contains(candidate) else 0.5 * rep
