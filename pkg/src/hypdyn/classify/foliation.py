# hypdyn/classify/foliation.py
"""
Сингулярные слоения тонких башен.

Сжимающее слоение: прообраз под композицией G = H_0^H нормированных подъёмов
слоения орбит предельного потока (гиперциклы вокруг оси или орициклы в
параболической точке). Для в итоге изометричных башен добавляется
ортогональное слоение. Слои возвращаются как ломаные на поверхности 0.
"""
from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import newton

from hypdyn.classify.limits import HYPERBOLIC_AXIS, PARABOLIC_POINT, OneParameterLimit, geometric_limit
from hypdyn.classify.modality import EVENTUALLY_CONSTANT, pair_modality
from hypdyn.classify.thinness import THIN, thinness
from hypdyn.classify.trichotomy import CONTRACTING, EVENTUALLY_ISOMETRIC, fit_tail, infinitesimal_type
from hypdyn.config.settings import Tolerances, TraceSettings
from hypdyn.errors import NumericalBreakdown, PreconditionError
from hypdyn.geometry.disc import MobiusDisc
from hypdyn.geometry.surfaces import CuspForm, CyclicQuotient, RoundAnnulus, StripForm
from hypdyn.tower.spec import TowerSpec
from hypdyn.tower.trace import CompositeLift, distance_sequence, iterate_trace

logger = logging.getLogger(__name__)

CONTRACTING_FOLIATION = "contracting"
ISOMETRIC_FOLIATION = "eventually_isometric"


@dataclass
class Leaf:
    kind: str
    value: float
    points: np.ndarray

    def as_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value,
                "points": [[complex(z).real, complex(z).imag] for z in self.points]}


@dataclass
class LeafCheck:
    leaf: int
    kind: str
    pair: Tuple[complex, complex]
    final: float
    label: str
    ok: bool

    def as_dict(self) -> dict:
        x, y = self.pair
        return {"leaf": self.leaf, "kind": self.kind, "pair": [[x.real, x.imag], [y.real, y.imag]],
                "final": self.final, "label": self.label, "ok": self.ok}


@dataclass
class FoliationDescriptor:
    kind: str
    leaves: List[Leaf] = field(default_factory=list)
    checks: List[LeafCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "passed": self.passed, "leaves": [leaf.as_dict() for leaf in self.leaves],
                "checks": [c.as_dict() for c in self.checks]}


def _level0_form(t: TowerSpec) -> StripForm:
    s0 = t.surface_at(0)
    if isinstance(s0, RoundAnnulus):
        return s0.strip
    if isinstance(s0, CyclicQuotient) and s0.strip is not None:
        return s0.strip
    raise PreconditionError(f"foliation extraction needs an annulus-type surface 0, got {s0.kind}")


def _limit_coordinates(limit: OneParameterLimit) -> Callable[[complex], complex]:
    """Координаты (положение + i·высота) относительно предельного потока."""
    inverse = limit.chart.inverse()
    if limit.kind == HYPERBOLIC_AXIS:
        return lambda g: 2.0 * cmath.atanh(inverse(g))
    if limit.kind == PARABOLIC_POINT:
        cusp = CuspForm(point=limit.point, shift=1.0)
        return lambda g: cusp.to_halfplane(inverse(g))
    raise PreconditionError(f"geometric limit is {limit.kind}; no flow to pull back")


class _Pullback:
    """Функция уровня 0 в полосных координатах: (s, θ) ↦ координаты G(z) относительно потока."""

    def __init__(self, form: StripForm, normalizer: MobiusDisc, G: CompositeLift,
                 coords: Callable[[complex], complex]):
        self.form, self.normalizer, self.G, self.coords = form, normalizer, G, coords

    def lift(self, s: float, theta: float) -> complex:
        return self.form.from_strip(complex(s, theta))

    def __call__(self, s: float, theta: float) -> complex:
        return self.coords(self.G.evaluate(self.normalizer(self.lift(s, theta))))


def _solve(func, x0: float) -> float:
    try:
        return float(newton(func, x0, tol=1e-12, maxiter=60))
    except (RuntimeError, OverflowError, ValueError) as e:
        raise NumericalBreakdown(f"leaf continuation failed near {x0:.6g}: {e}") from e


def _trace_contracting(pull: _Pullback, theta0: float, samples: int, period: float) -> Tuple[float, np.ndarray]:
    height = pull(0.0, theta0).imag
    thetas, theta = [], theta0
    for s in np.linspace(-0.5 * period, 0.5 * period, samples):
        theta = _solve(lambda th: pull(s, th).imag - height, theta)
        thetas.append((s, theta))
    return height, np.array([pull.lift(s, th) for s, th in thetas])


def _trace_isometric(pull: _Pullback, s0: float, samples: int, theta_max: float) -> Tuple[float, np.ndarray]:
    position = pull(s0, 0.0).real
    points, s = [], s0
    for theta in np.linspace(-theta_max, theta_max, samples):
        s = _solve(lambda x: pull(x, theta).real - position, s)
        points.append(pull.lift(s, theta))
    return position, np.array(points)


def _decays_geometrically(seq: np.ndarray, tol: Tolerances) -> bool:
    """Хвост d_n убывает и укладывается в c·qⁿ с q < 1 − tail_ratio."""
    seq = np.asarray(seq, dtype=float)
    window = np.arange(len(seq) // 2, len(seq))
    window = window[np.isfinite(seq[window]) & (seq[window] > 0.0)]
    if len(window) < 3 or np.any(np.diff(seq[window]) > tol.monotone_slack):
        return False
    fit = fit_tail(seq, window)
    return fit is not None and fit.ratio < 1.0 - tol.tail_ratio


def _check_leaf(t: TowerSpec, index: int, leaf: Leaf, tol: Tolerances,
                settings: Optional[TraceSettings]) -> LeafCheck:
    pts = leaf.points
    p, q = complex(pts[0]), complex(pts[len(pts) // 2])
    seq = distance_sequence(t, p, q, settings)
    if leaf.kind == CONTRACTING_FOLIATION:
        final = float(seq[-1])
        ok = final < tol.zero or _decays_geometrically(seq, tol)
        return LeafCheck(index, leaf.kind, (p, q), final, "to_zero" if ok else "positive", ok)
    label = pair_modality(seq, tol)
    return LeafCheck(index, leaf.kind, (p, q), float(seq[-1]), label.label, label.label == EVENTUALLY_CONSTANT)


def foliation_extract(t: TowerSpec, leaves: int = 5, samples: int = 64, tol: Optional[Tolerances] = None,
                      settings: Optional[TraceSettings] = None) -> List[FoliationDescriptor]:
    """Сжимающее слоение поверхности 0; для в итоге изометричных башен также изометричное."""
    tol = tol or Tolerances.from_env()
    inf = infinitesimal_type(t, tol=tol, settings=settings)
    if inf.type == CONTRACTING:
        raise PreconditionError("contracting tower: no foliation extraction")
    if thinness(t, tol=tol, settings=settings, cross_check=False).verdict != THIN:
        raise PreconditionError("foliation extraction needs an essentially thin tower")
    form = _level0_form(t)
    limit = geometric_limit(t, settings)
    if limit.kind not in (HYPERBOLIC_AXIS, PARABOLIC_POINT):
        raise PreconditionError(f"geometric limit not conclusive: {limit.reason or limit.kind}")

    trace = iterate_trace(t.with_points(pairs=[]), settings)
    if trace.truncated_at is not None:
        raise NumericalBreakdown(trace.reason, level=trace.truncated_at)
    G = trace.lifts.composite(0, len(trace.lifts))
    normalizer = MobiusDisc(rotation=1.0, center=complex(trace.base[0]))
    pull = _Pullback(form, normalizer, G, _limit_coordinates(limit))
    s0 = t.surface_at(0)

    result = [FoliationDescriptor(CONTRACTING_FOLIATION)]
    for theta0 in np.linspace(-0.9, 0.9, leaves):
        value, pts = _trace_contracting(pull, float(theta0), samples, form.length)
        result[0].leaves.append(Leaf(CONTRACTING_FOLIATION, value, np.array([s0.project(z) for z in pts])))
    if inf.type == EVENTUALLY_ISOMETRIC:
        iso = FoliationDescriptor(ISOMETRIC_FOLIATION)
        for s_start in np.linspace(-0.5 * form.length, 0.5 * form.length, leaves, endpoint=False):
            value, pts = _trace_isometric(pull, float(s_start), samples, 1.2)
            iso.leaves.append(Leaf(ISOMETRIC_FOLIATION, value, np.array([s0.project(z) for z in pts])))
        result.append(iso)

    for descriptor in result:
        for k, leaf in enumerate(descriptor.leaves):
            descriptor.checks.append(_check_leaf(t, k, leaf, tol, settings))
        logger.info("%s foliation of %s: %d leaves, checks %s", descriptor.kind, t.name,
                    len(descriptor.leaves), "passed" if descriptor.passed else "FAILED")
    return result
