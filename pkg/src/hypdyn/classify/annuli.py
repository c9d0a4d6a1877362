# hypdyn/classify/annuli.py
"""Поглощающие кольца A_n = {inj ≤ eps} на тонких не сжимающих башнях."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from hypdyn.classify.thinness import THIN, thinness
from hypdyn.classify.trichotomy import CONTRACTING, infinitesimal_type
from hypdyn.config.settings import Tolerances, TraceSettings
from hypdyn.errors import PreconditionError
from hypdyn.geometry.surfaces import CollarBand, CyclicQuotient, RoundAnnulus, SurfaceModel
from hypdyn.tower.spec import TowerSpec
from hypdyn.tower.trace import LiftedMap, iterate_trace, lift_map

logger = logging.getLogger(__name__)

BOUNDARY_SAMPLES = 512


@dataclass
class AnnulusRecord:
    level: int
    band: CollarBand
    forward_ok: Optional[bool] = None
    defect: float = 0.0

    def as_dict(self) -> dict:
        b = self.band
        return {"level": self.level, "empty": b.empty, "modulus": b.modulus, "half_width": b.half_width,
                "strip_height": b.strip_height, "log_radii": None if b.log_radii is None else list(b.log_radii),
                "forward_ok": self.forward_ok, "defect": self.defect}


@dataclass
class PointEntry:
    point: complex
    entered_at: Optional[int]
    stays: bool


@dataclass
class AbsorbingAnnuli:
    eps: float
    first_level: Optional[int]
    records: List[AnnulusRecord] = field(default_factory=list)
    moduli_increasing: bool = True
    points: List[PointEntry] = field(default_factory=list)

    @property
    def forward_invariant(self) -> bool:
        return all(r.forward_ok for r in self.records if r.forward_ok is not None)

    def as_dict(self) -> dict:
        return {"eps": self.eps, "first_level": self.first_level, "moduli_increasing": self.moduli_increasing,
                "forward_invariant": self.forward_invariant, "levels": [r.as_dict() for r in self.records],
                "points": [{"point": [p.point.real, p.point.imag], "entered_at": p.entered_at, "stays": p.stays}
                           for p in self.points]}


def _strip(surface: SurfaceModel):
    if isinstance(surface, RoundAnnulus):
        return surface.strip
    if isinstance(surface, CyclicQuotient) and surface.strip is not None:
        return surface.strip
    raise PreconditionError(f"absorbing annuli need annulus-type surfaces, got {surface.kind}")


def _forward_defect(F: LiftedMap, band: CollarBand, target: CollarBand, samples: int) -> float:
    """Наибольший выход образов границы band за полосу target (в полосных координатах)."""
    src, dst = _strip(F.src), _strip(F.dst)
    s = (np.arange(samples) / samples - 0.5) * band.length
    worst = 0.0
    for sign in (1.0, -1.0):
        for x in s:
            z = src.from_strip(complex(x, sign * band.strip_height))
            w = dst.to_strip(F.value(z))
            worst = max(worst, abs(w.imag) - target.strip_height)
    return worst


def absorbing_annuli(t: TowerSpec, eps: float, tol: Optional[Tolerances] = None,
                     settings: Optional[TraceSettings] = None, samples: int = BOUNDARY_SAMPLES,
                     check_hypotheses: bool = True) -> AbsorbingAnnuli:
    """
    Кольца A_n = collar_annulus(S_n, eps) начиная с первого уровня, где δ_n < eps.
    Проверяет f(A_n) ⊂ A_{n+1} по граничным точкам, рост Mod A_n и попадание
    отслеживаемых точек в A_n.
    """
    tol = tol or Tolerances.from_env()
    if check_hypotheses:
        if infinitesimal_type(t, tol=tol, settings=settings).type == CONTRACTING:
            raise PreconditionError("absorbing annuli need a non-contracting tower")
        if thinness(t, tol=tol, settings=settings, cross_check=False).verdict != THIN:
            raise PreconditionError("absorbing annuli need an essentially thin tower")
    for n in range(t.horizon + 1):
        _strip(t.surface_at(n))

    tracked = [p for pair in t.tracked_pairs for p in pair]
    spec = t.with_points(pairs=[(p, p) for p in tracked])
    trace = iterate_trace(spec, settings, collar_eps=eps)
    first = next((n for n in range(trace.levels + 1)
                  if not trace.collars[n].empty and trace.delta[n] < eps), None)
    result = AbsorbingAnnuli(eps=eps, first_level=first)
    if first is None:
        logger.info("tower %s: no level with delta < %g up to horizon", t.name, eps)
        return result

    for n in range(first, trace.levels + 1):
        record = AnnulusRecord(level=n, band=trace.collars[n])
        if n < trace.levels:
            F = lift_map(t.map_at(n), t.surface_at(n), t.surface_at(n + 1))
            target = trace.collars[n + 1]
            if target.empty:
                record.forward_ok, record.defect = False, math.inf
            else:
                record.defect = _forward_defect(F, record.band, target, samples)
                record.forward_ok = record.defect <= 1e-9
        result.records.append(record)
    moduli = [r.band.modulus for r in result.records]
    result.moduli_increasing = all(b > a for a, b in zip(moduli, moduli[1:]))

    for k, p in enumerate(tracked):
        inside = []
        for n in range(trace.levels + 1):
            band = trace.collars[n]
            w = _strip(trace.surface(n)).to_strip(trace.pair_lifts[n, k, 0])
            inside.append(n >= first and band.contains_strip(w, 1e-12))
        entered = next((n for n, ok in enumerate(inside) if ok), None)
        stays = entered is not None and all(inside[entered:])
        result.points.append(PointEntry(p, entered, stays))
    if not result.forward_invariant:
        bad = next(r for r in result.records if r.forward_ok is False)
        logger.warning("tower %s: f(A_%d) leaves A_%d by %.3g", t.name, bad.level, bad.level + 1, bad.defect)
    return result
