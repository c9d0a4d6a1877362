# hypdyn/blaschke/regions.py
"""
Множества A_k^n: конечные объединения жордановых областей, заданных замкнутыми
ломаными границ.

Граница каждой компоненты хранится вместе со «рецептом»: исходная окружность и
цепочка операций (образ под b_a или ветвь прообраза). Это позволяет пересчитать
ломаную с удвоенным числом точек, если соседние точки разошлись дальше
refine_spacing, без интерполяции уже посчитанных точек.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from hypdyn.blaschke.product import BlaschkeDeg2
from hypdyn.config.settings import BlaschkeSettings
from hypdyn.errors import BranchAmbiguityError, InjectivityError

logger = logging.getLogger(__name__)

CLOSE_TOL = 1e-12


# ---------------------------------------------------------------------------
#  Ломаные
# ---------------------------------------------------------------------------

def circle_polyline(center: complex, radius: float, samples: int) -> np.ndarray:
    """Положительно ориентированная окружность из samples точек (без повтора первой)."""
    t = 2.0 * math.pi * np.arange(samples) / samples
    return complex(center) + radius * np.exp(1j * t)


def close(points: np.ndarray) -> np.ndarray:
    return np.append(points, points[0])


def spacing(poly: np.ndarray) -> float:
    return float(np.abs(np.diff(poly)).max())


def winding_number(poly: np.ndarray, p: complex | np.ndarray) -> np.ndarray | int:
    """Индекс замкнутой ломаной poly относительно точки (или массива точек) p."""
    pts = np.atleast_1d(np.asarray(p, dtype=complex))
    d = poly[None, :] - pts[:, None]
    turns = np.angle(d[:, 1:] / d[:, :-1]).sum(axis=1) / (2.0 * math.pi)
    w = np.rint(turns).astype(int)
    return int(w[0]) if np.ndim(p) == 0 else w


def _cross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (np.conj(u) * v).imag


def _proper_crossings(a0, a1, b0, b1) -> np.ndarray:
    d1 = _cross(a1 - a0, b0 - a0)
    d2 = _cross(a1 - a0, b1 - a0)
    d3 = _cross(b1 - b0, a0 - b0)
    d4 = _cross(b1 - b0, a1 - b0)
    return (d1 * d2 < 0) & (d3 * d4 < 0)


def is_simple(poly: np.ndarray) -> bool:
    """Нет пересечений несоседних звеньев (с точностью до разрешения выборки)."""
    a0, a1 = poly[:-1], poly[1:]
    n = len(a0)
    xmin, xmax = np.minimum(a0.real, a1.real), np.maximum(a0.real, a1.real)
    order = np.argsort(xmin)
    xs, xe = xmin[order], xmax[order]
    hi = np.searchsorted(xs, xe, side="right")
    counts = np.maximum(hi - (np.arange(n) + 1), 0)
    total = int(counts.sum())
    if total == 0:
        return True
    starts = np.cumsum(counts) - counts
    I = np.repeat(np.arange(n), counts)
    J = I + 1 + (np.arange(total) - np.repeat(starts, counts))
    i, j = order[I], order[J]
    ymin_i, ymax_i = np.minimum(a0[i].imag, a1[i].imag), np.maximum(a0[i].imag, a1[i].imag)
    ymin_j, ymax_j = np.minimum(a0[j].imag, a1[j].imag), np.maximum(a0[j].imag, a1[j].imag)
    gap = np.abs(i - j)
    keep = (ymin_i <= ymax_j) & (ymin_j <= ymax_i) & (gap != 1) & (gap != n - 1)
    i, j = i[keep], j[keep]
    return not _proper_crossings(a0[i], a1[i], a0[j], a1[j]).any()


# ---------------------------------------------------------------------------
#  Компоненты
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class CurveOp:
    kind: str            # push | sibling | pull
    a: float
    anchor: complex = 0j  # pull: точка ветви при параметре 0
    double: bool = False  # pull кривой, обходящей критическое значение


@dataclass
class Component:
    """Жорданова область: замкнутая ломаная границы и точка внутри."""
    points: np.ndarray
    inside: complex
    circle: Tuple[complex, float]
    ops: Tuple[CurveOp, ...] = ()
    origin: str = "disc"
    created: int = 0

    @cached_property
    def bbox(self) -> Tuple[float, float, float, float]:
        p = self.points
        return float(p.real.min()), float(p.real.max()), float(p.imag.min()), float(p.imag.max())

    @property
    def samples(self) -> int:
        return len(self.points) - 1

    @property
    def spacing(self) -> float:
        return spacing(self.points)

    @property
    def closed(self) -> bool:
        return abs(self.points[-1] - self.points[0]) <= CLOSE_TOL

    def in_bbox(self, z: complex, pad: float = 0.0) -> bool:
        x0, x1, y0, y1 = self.bbox
        return x0 - pad <= z.real <= x1 + pad and y0 - pad <= z.imag <= y1 + pad

    def contains(self, z: complex) -> bool:
        return self.in_bbox(z) and winding_number(self.points, complex(z)) != 0

    def as_dict(self) -> dict:
        return {"origin": self.origin, "created": self.created, "inside": [self.inside.real, self.inside.imag],
                "samples": self.samples, "boundary": [[z.real, z.imag] for z in self.points]}


def _evaluate(circle: Tuple[complex, float], ops: Sequence[CurveOp], samples: int) -> np.ndarray:
    z = circle_polyline(circle[0], circle[1], samples)
    for op in ops:
        b = BlaschkeDeg2(op.a)
        if op.kind == "push":
            z = b(z)
        elif op.kind == "sibling":
            z = b.sibling(z)
        else:
            z = _track(b, np.concatenate([z, z]) if op.double else z, op.anchor)
    return close(z)


def _track(b: BlaschkeDeg2, w: np.ndarray, anchor: complex, component: Optional[int] = None) -> np.ndarray:
    """Ветвь прообраза вдоль замкнутой ломаной w по непрерывности, начиная с корня у anchor."""
    r1, r2 = b.preimages(w)
    r1, r2 = np.atleast_1d(r1), np.atleast_1d(r2)
    d_same = np.abs(r1[1:] - r1[:-1]) + np.abs(r2[1:] - r2[:-1])
    d_swap = np.abs(r1[1:] - r2[:-1]) + np.abs(r2[1:] - r1[:-1])
    if len(d_same) and (np.minimum(d_same, d_swap) > 0.5 * np.maximum(d_same, d_swap)).any():
        raise BranchAmbiguityError("preimage branches are not separated at the sample resolution", component)
    parity = np.concatenate([[0], np.cumsum(d_swap < d_same) % 2])
    first = abs(r1[0] - anchor) <= abs(r2[0] - anchor)
    return np.where((parity == 0) == first, r1, r2)


def make_component(circle: Tuple[complex, float], ops: Tuple[CurveOp, ...], inside: complex, origin: str,
                   created: int, settings: BlaschkeSettings) -> Component:
    """Компонента с адаптивным удвоением числа точек."""
    samples = settings.samples
    points = _evaluate(circle, ops, samples)
    while spacing(points) > settings.refine_spacing and samples * 2 <= settings.max_samples:
        samples *= 2
        points = _evaluate(circle, ops, samples)
    return Component(points=points, inside=complex(inside), circle=circle, ops=ops, origin=origin, created=created)


def disc_component(center: complex, radius: float, created: int, settings: BlaschkeSettings,
                   origin: str = "critical") -> Component:
    return make_component((complex(center), float(radius)), (), center, origin, created, settings)


# ---------------------------------------------------------------------------
#  RegionSet
# ---------------------------------------------------------------------------

@dataclass
class RegionSet:
    """Конечное объединение компонент с метками уровня (k, n)."""
    components: List[Component] = field(default_factory=list)
    k: int = 0
    n: int = 0

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def union(self, other: Iterable[Component], n: Optional[int] = None) -> "RegionSet":
        return RegionSet(self.components + list(other), self.k, self.n if n is None else n)

    @cached_property
    def _boundary(self) -> np.ndarray:
        if not self.components:
            return np.empty(0, dtype=complex)
        return np.concatenate([c.points[:-1] for c in self.components])

    @cached_property
    def _tree(self) -> Optional[cKDTree]:
        pts = self._boundary
        return cKDTree(np.column_stack([pts.real, pts.imag])) if len(pts) else None

    @property
    def max_spacing(self) -> float:
        return max((c.spacing for c in self.components), default=0.0)

    @property
    def max_modulus(self) -> float:
        return float(np.abs(self._boundary).max()) if len(self._boundary) else 0.0

    @property
    def min_modulus(self) -> float:
        return float(np.abs(self._boundary).min()) if len(self._boundary) else math.inf

    @cached_property
    def _boxes(self) -> np.ndarray:
        return np.array([c.bbox for c in self.components]).reshape(-1, 4)

    def _candidates(self, z: complex) -> np.ndarray:
        b = self._boxes
        return np.flatnonzero((b[:, 0] <= z.real) & (z.real <= b[:, 1]) & (b[:, 2] <= z.imag) & (z.imag <= b[:, 3]))

    def contains(self, z: complex) -> bool:
        return self.component_of(z) is not None

    def component_of(self, z: complex) -> Optional[int]:
        z = complex(z)
        for i in self._candidates(z):
            if winding_number(self.components[i].points, z) != 0:
                return int(i)
        return None

    def boundary_distance(self, z: complex | np.ndarray) -> float | np.ndarray:
        """Расстояние до ближайшей точки границы (по выборке)."""
        if self._tree is None:
            return math.inf if np.ndim(z) == 0 else np.full(np.shape(z), math.inf)
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        d, _ = self._tree.query(np.column_stack([zz.real, zz.imag]))
        return float(d[0]) if np.ndim(z) == 0 else d

    def interior_points(self) -> List[complex]:
        return [c.inside for c in self.components]

    def as_dict(self) -> dict:
        return {"k": self.k, "n": self.n, "components": [c.as_dict() for c in self.components]}


# ---------------------------------------------------------------------------
#  Проверки на разрешении выборки
# ---------------------------------------------------------------------------

def _overlap(b1, b2, pad: float) -> bool:
    return not (b1[1] + pad < b2[0] or b2[1] + pad < b1[0] or b1[3] + pad < b2[2] or b2[3] + pad < b1[2])


def components_disjoint(c1: Component, c2: Component, gap: float) -> bool:
    if not _overlap(c1.bbox, c2.bbox, gap):
        return True
    p, q = c1.points, c2.points
    tree = cKDTree(np.column_stack([p.real, p.imag]))
    d, _ = tree.query(np.column_stack([q.real, q.imag]))
    if d.min() <= gap:
        return False
    if winding_number(p, q[0]) != 0 or winding_number(q, p[0]) != 0:
        return False
    a0, a1, b0, b1 = p[:-1], p[1:], q[:-1], q[1:]
    x0, x1 = max(c1.bbox[0], c2.bbox[0]) - gap, min(c1.bbox[1], c2.bbox[1]) + gap
    sel_a = (np.maximum(a0.real, a1.real) >= x0) & (np.minimum(a0.real, a1.real) <= x1)
    sel_b = (np.maximum(b0.real, b1.real) >= x0) & (np.minimum(b0.real, b1.real) <= x1)
    A0, A1, B0, B1 = a0[sel_a][:, None], a1[sel_a][:, None], b0[sel_b][None, :], b1[sel_b][None, :]
    return not _proper_crossings(A0, A1, B0, B1).any()


def region_disjoint(R: RegionSet, gap: float) -> List[Tuple[int, int]]:
    """Пары пересекающихся (или слишком близких) компонент."""
    bad = []
    comps = R.components
    boxes = np.array([c.bbox for c in comps]) if comps else np.empty((0, 4))
    for i in range(len(comps)):
        if i + 1 >= len(comps):
            break
        rest = boxes[i + 1:]
        b = boxes[i]
        hit = ~((b[1] + gap < rest[:, 0]) | (rest[:, 1] + gap < b[0]) | (b[3] + gap < rest[:, 2]) |
                (rest[:, 3] + gap < b[2]))
        for j in np.flatnonzero(hit) + i + 1:
            if not components_disjoint(comps[i], comps[j], gap):
                bad.append((i, int(j)))
    return bad


# ---------------------------------------------------------------------------
#  Образы и прообразы
# ---------------------------------------------------------------------------

def region_pushforward(b: BlaschkeDeg2, R: RegionSet, radius: Optional[float] = None,
                       settings: Optional[BlaschkeSettings] = None, created: Optional[int] = None) -> RegionSet:
    """
    Образ b(R). Требуется R ⊂ D(0, radius) с |c_a| > radius (b инъективно там);
    по умолчанию radius = max|z| по границам R.
    """
    settings = settings or BlaschkeSettings.from_env()
    reach = R.max_modulus if radius is None else radius
    if R.max_modulus > reach or not abs(b.critical_point) > reach:
        raise InjectivityError(
            f"region reaches |z| = {R.max_modulus:.6g}; b is injective only on D(0, {abs(b.critical_point):.6g})"
        )
    out = []
    for c in R.components:
        ops = c.ops + (CurveOp("push", b.a),)
        out.append(make_component(c.circle, ops, complex(b(c.inside)), "image",
                                  c.created if created is None else created, settings))
    return RegionSet(out, R.k + 1, R.n)


def branch_margin(b: BlaschkeDeg2, c: Component, settings: BlaschkeSettings) -> Tuple[float, float]:
    """(расстояние от критического значения до границы, требуемый запас)."""
    v = complex(b.critical_value)
    return float(np.abs(c.points - v).min()), settings.branch_margin_factor * c.spacing


def component_preimage(b: BlaschkeDeg2, c: Component, index: int, settings: BlaschkeSettings,
                       created: Optional[int] = None) -> List[Component]:
    """Прообраз компоненты: две компоненты или одна, если она содержит критическое значение."""
    dist, need = branch_margin(b, c, settings)
    if dist < need:
        raise BranchAmbiguityError(
            f"component {index} passes within {dist:.3g} of the critical value {b.critical_value:.6g} "
            f"(safety margin {need:.3g})", index,
        )
    stamp = c.created if created is None else created
    w0 = complex(c.points[0])
    roots = b.preimages(w0)
    if winding_number(c.points, complex(b.critical_value)) != 0:
        op = CurveOp("pull", b.a, anchor=complex(roots[0]), double=True)
        return [make_component(c.circle, c.ops + (op,), complex(b.critical_point), "preimage", stamp, settings)]
    inner = b.preimages(c.inside)
    out = []
    for root in roots:
        comp = make_component(c.circle, c.ops + (CurveOp("pull", b.a, anchor=complex(root)),),
                              0j, "preimage", stamp, settings)
        steps = np.abs(np.diff(comp.points))
        if steps[-1] > 4.0 * steps[:-1].max():
            raise BranchAmbiguityError(f"preimage of component {index} does not close along one branch", index)
        comp.inside = complex(min(inner, key=lambda z: 0 if comp.contains(z) else 1 + abs(z - root)))
        out.append(comp)
    return out


def region_preimage(b: BlaschkeDeg2, R: RegionSet, settings: Optional[BlaschkeSettings] = None,
                    created: Optional[int] = None) -> RegionSet:
    """b⁻¹(R) с отслеживанием ветвей по непрерывности вдоль каждой границы."""
    settings = settings or BlaschkeSettings.from_env()
    out: List[Component] = []
    for i, c in enumerate(R.components):
        out.extend(component_preimage(b, c, i, settings, created))
    return RegionSet(out, max(R.k - 1, 0), R.n)


def sibling_component(b: BlaschkeDeg2, c: Component, created: int, settings: BlaschkeSettings) -> Component:
    """Вторая компонента прообраза b⁻¹(b(C)) для C в диске инъективности b."""
    return make_component(c.circle, c.ops + (CurveOp("sibling", b.a),), complex(b.sibling(c.inside)),
                          "copy", created, settings)


def chain_residual(c: Component) -> float:
    """max |b(z) − w| по точкам компоненты, последняя операция которой есть прообраз."""
    if not c.ops or c.ops[-1].kind != "pull":
        return 0.0
    op = c.ops[-1]
    z = c.points[:-1]
    base = len(z) // 2 if op.double else len(z)
    w = _evaluate(c.circle, c.ops[:-1], base)[:-1]
    if op.double:
        w = np.concatenate([w, w])
    return float(np.abs(BlaschkeDeg2(op.a)(z) - w).max())
