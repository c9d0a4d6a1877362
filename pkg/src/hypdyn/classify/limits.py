# hypdyn/classify/limits.py
"""
Геометрические пределы циклических групп накрытия Γ_n, нормированных так, что
подъём образа базовой точки лежит в 0. Для тонких башен степени γ_n^{k(n,s)}
с k·ℓ_n → s сходятся к элементам однопараметрической группы.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from hypdyn.config.settings import TraceSettings
from hypdyn.errors import PreconditionError
from hypdyn.geometry.disc import MobiusDisc, axis_chart, mobius_classify
from hypdyn.geometry.surfaces import CuspForm, CyclicQuotient, RoundAnnulus, StripForm, SurfaceModel, cayley_matrix
from hypdyn.tower.spec import TowerSpec
from hypdyn.tower.trace import iterate_trace

logger = logging.getLogger(__name__)

HYPERBOLIC_AXIS = "hyperbolic_axis"
PARABOLIC_POINT = "parabolic_point"
DISCRETE = "discrete"
INCONCLUSIVE = "inconclusive"

FLOW_TIMES = (0.3, 0.5, 1.0, 1.7)
DEFECT_TOL = 1e-6


def _form(surface: SurfaceModel) -> StripForm | CuspForm:
    if isinstance(surface, RoundAnnulus):
        return surface.strip
    if isinstance(surface, CyclicQuotient):
        return surface.form
    raise PreconditionError(f"{surface.kind} has a trivial deck group; there is no geometric limit")


def _period(form: StripForm | CuspForm) -> float:
    return form.length if isinstance(form, StripForm) else abs(form.shift)


def strip_flow(chart: MobiusDisc, t: float) -> MobiusDisc:
    """Сдвиг на t вдоль оси chart(вещественный диаметр)."""
    return chart.compose(MobiusDisc.real_translation(t)).compose(chart.inverse())


def cusp_flow(point: complex, t: float) -> MobiusDisc:
    """Параболический сдвиг ζ ↦ ζ + t в полуплоскости с бесконечностью в point."""
    c = cayley_matrix(point / abs(point))
    shift = np.array([[1.0, t], [0.0, 1.0]], dtype=complex)
    return MobiusDisc.from_matrix(np.linalg.inv(c) @ shift @ c)


def _flow(form: StripForm | CuspForm, t: float) -> MobiusDisc:
    if isinstance(form, StripForm):
        return strip_flow(form.chart, t)
    return cusp_flow(form.point, t)


def _conjugate(m: MobiusDisc, g: MobiusDisc) -> MobiusDisc:
    return m.compose(g).compose(m.inverse())


def element_distance(g: MobiusDisc, h: MobiusDisc) -> float:
    """Расстояние в координатах (center, rotation)."""
    return max(abs(g.center - h.center), abs(g.rotation - h.rotation))


@dataclass
class OneParameterLimit:
    kind: str
    axis: Optional[Tuple[complex, complex]] = None
    point: Optional[complex] = None
    chart: Optional[MobiusDisc] = None
    flow_times: Tuple[float, ...] = FLOW_TIMES
    defects: List[float] = field(default_factory=list)
    generator_drift: List[float] = field(default_factory=list)
    commutation_defect: float = math.nan
    additivity_defect: float = math.nan
    reason: str = ""

    @property
    def conclusive(self) -> bool:
        return self.kind in (HYPERBOLIC_AXIS, PARABOLIC_POINT, DISCRETE)

    @property
    def identity_is_limit(self) -> bool:
        return bool(self.generator_drift) and self.generator_drift[-1] < DEFECT_TOL

    def flow(self, s: float) -> MobiusDisc:
        """Элемент предельной группы в момент s."""
        if self.kind == HYPERBOLIC_AXIS:
            return strip_flow(self.chart, s)
        if self.kind == PARABOLIC_POINT:
            return _conjugate(self.chart, cusp_flow(self.point, s))
        raise PreconditionError(f"{self.kind} limit has no flow")

    def as_dict(self) -> dict:
        def _pt(z):
            return None if z is None else [z.real, z.imag]
        return {"kind": self.kind, "axis": None if self.axis is None else [_pt(p) for p in self.axis],
                "point": _pt(self.point), "flow_times": list(self.flow_times), "defects": self.defects,
                "generator_drift": self.generator_drift, "identity_is_limit": self.identity_is_limit,
                "commutation_defect": self.commutation_defect, "additivity_defect": self.additivity_defect,
                "reason": self.reason}


def _group_checks(limit: OneParameterLimit, times: Sequence[float]) -> None:
    s, t = 0.5, 1.25
    a, b = limit.flow(s), limit.flow(t)
    limit.commutation_defect = element_distance(a.compose(b), b.compose(a))
    if limit.kind == HYPERBOLIC_AXIS:
        combined = mobius_classify(a.compose(b))
        limit.additivity_defect = abs((combined.translation_length or 0.0) - (s + t))
    else:
        limit.additivity_defect = element_distance(a.compose(b), limit.flow(s + t))


def geometric_limit(t: TowerSpec, settings: Optional[TraceSettings] = None,
                    times: Sequence[float] = FLOW_TIMES) -> OneParameterLimit:
    """
    Ищет однопараметрический предел нормированных групп Γ_n и сообщает дефект
    сходимости max_s dist(γ_n^{k(n,s)}, Φ(s)) по уровням.
    """
    trace = iterate_trace(t.with_points(pairs=[]), settings)
    H = trace.levels
    forms = [_form(trace.surface(n)) for n in range(H + 1)]
    periods = np.array([_period(f) for f in forms])
    normalizers = [MobiusDisc(rotation=1.0, center=complex(z)) for z in trace.base]
    drift = [abs(_conjugate(normalizers[n], _flow(forms[n], periods[n]))(0j)) for n in range(H + 1)]

    if H < 2 or periods[-1] > 0.5 * periods[H // 2]:
        limit = OneParameterLimit(kind=DISCRETE, generator_drift=drift,
                                  reason="discrete - no continuous limit: translation lengths do not shrink")
        logger.info("tower %s: deck groups stay discrete", t.name)
        return limit

    last = forms[-1]
    if isinstance(last, StripForm):
        ends = normalizers[-1].compose(last.chart)
        repelling, attracting = ends(-1.0 + 0j), ends(1.0 + 0j)
        prev = normalizers[-2].compose(forms[-2].chart)
        moved = max(abs(prev(-1.0 + 0j) - repelling), abs(prev(1.0 + 0j) - attracting))
        if abs(repelling - attracting) < 1e-6 or moved > DEFECT_TOL:
            return OneParameterLimit(kind=INCONCLUSIVE, generator_drift=drift,
                                     reason="normalized axes do not settle; the axis escapes to the boundary")
        chart = axis_chart(repelling, attracting)
        limit = OneParameterLimit(kind=HYPERBOLIC_AXIS, axis=(repelling, attracting), chart=chart,
                                  flow_times=tuple(times), generator_drift=drift)
    else:
        limit = OneParameterLimit(kind=PARABOLIC_POINT, point=last.point, chart=normalizers[-1],
                                  flow_times=tuple(times), generator_drift=drift,
                                  reason=f"normalized parabolic point {normalizers[-1](last.point):.6g}")

    for n in range(H + 1):
        worst = 0.0
        for s in times:
            k = round(s / periods[n])
            element = _conjugate(normalizers[n], _flow(forms[n], k * periods[n]))
            worst = max(worst, element_distance(element, limit.flow(s)))
        limit.defects.append(worst)
    _group_checks(limit, times)
    if limit.defects[-1] >= DEFECT_TOL:
        limit.reason = f"convergence defect {limit.defects[-1]:.3g} at horizon exceeds {DEFECT_TOL:g}"
        limit.kind = INCONCLUSIVE
    logger.info("tower %s: geometric limit %s, defect %.3g", t.name, limit.kind,
                limit.defects[-1] if limit.defects else math.nan)
    return limit
