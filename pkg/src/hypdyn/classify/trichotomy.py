# hypdyn/classify/trichotomy.py
"""
Инфинитезимальная трихотомия: по искажениям λ_n вдоль орбиты точки башня
сжимающая (Σ(1 − λ_n) расходится), полусжимающая (ряд сходится, λ_n < 1)
или в итоге изометричная (λ_n = 1 начиная с некоторого n).
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from hypdyn.config.settings import Tolerances, TraceSettings
from hypdyn.tower.spec import TowerSpec
from hypdyn.tower.trace import OrbitTrace, iterate_trace

logger = logging.getLogger(__name__)

CONTRACTING = "contracting"
SEMI_CONTRACTING = "semi_contracting"
EVENTUALLY_ISOMETRIC = "eventually_isometric"
INCONCLUSIVE = "inconclusive"

MIN_HORIZON = 8
FALLBACK_TERMS = 8


@dataclass
class TailFit:
    """Подгонка хвоста 1 − λ_n ≈ c·qⁿ по логарифмам."""
    ratio: float
    scale: float
    first: int
    last: int
    terms: int

    def predict(self, n: int) -> float:
        return self.scale * self.ratio ** n


@dataclass
class InfinitesimalVerdict:
    type: str
    confidence: str
    exact: bool
    horizon: int
    partial_sum: float
    partial_sums: List[float] = field(default_factory=list)
    fit: Optional[TailFit] = None
    isometric_from: Optional[int] = None
    reason: str = ""

    @property
    def conclusive(self) -> bool:
        return self.type != INCONCLUSIVE

    def as_dict(self) -> dict:
        data = {
            "type": self.type,
            "confidence": self.confidence,
            "exact": self.exact,
            "horizon": self.horizon,
            "partial_sum": self.partial_sum,
            "isometric_from": self.isometric_from,
            "reason": self.reason,
        }
        data["tail_fit"] = None if self.fit is None else asdict(self.fit)
        return data


def _checkpoints(sums: np.ndarray) -> List[float]:
    """Частичные суммы на уровнях 1, 2, 4, 8, … и на горизонте."""
    if not len(sums):
        return []
    idx = sorted({min(2 ** k, len(sums)) - 1 for k in range(int(math.log2(len(sums))) + 2)})
    return [float(sums[i]) for i in idx]


def fit_tail(terms: np.ndarray, indices: np.ndarray) -> Optional[TailFit]:
    """МНК-подгонка log(1 − λ_n) прямой; None, если точек меньше трёх."""
    if len(indices) < 3:
        return None
    slope, intercept = np.polyfit(indices.astype(float), np.log(terms[indices]), 1)
    return TailFit(ratio=float(math.exp(slope)), scale=float(math.exp(intercept)),
                   first=int(indices[0]) + 1, last=int(indices[-1]) + 1, terms=len(indices))


def classify_lambdas(lams: np.ndarray, tol: Optional[Tolerances] = None,
                     exact_from: Optional[int] = None) -> InfinitesimalVerdict:
    """
    Классифицирует [λ_1, …, λ_H].

    exact_from: индекс отображения, начиная с которого все отображения объявлены
    накрытиями (тогда λ_n ≡ 1 точно для n > exact_from).
    """
    tol = tol or Tolerances.from_env()
    lams = np.asarray(lams, dtype=float)
    H = len(lams)
    terms = np.clip(1.0 - np.nan_to_num(lams, nan=1.0), 0.0, None)
    sums = np.cumsum(terms)
    total = float(sums[-1]) if H else 0.0
    checkpoints = _checkpoints(sums)

    def verdict(kind: str, confidence: str, reason: str, **extra) -> InfinitesimalVerdict:
        v = InfinitesimalVerdict(type=kind, confidence=confidence, exact=extra.pop("exact", False), horizon=H,
                                 partial_sum=total, partial_sums=checkpoints, reason=reason, **extra)
        logger.debug("infinitesimal verdict %s (%s): %s", kind, confidence, reason)
        return v

    if exact_from is not None and H and exact_from <= H // 2:
        return verdict(EVENTUALLY_ISOMETRIC, "exact", f"all maps from level {exact_from} are declared coverings",
                       exact=True, isometric_from=exact_from + 1)
    if H < MIN_HORIZON:
        return verdict(INCONCLUSIVE, "none", f"horizon {H} is shorter than {MIN_HORIZON}")
    if total > tol.divergence:
        return verdict(CONTRACTING, "high", f"partial sum {total:.6g} exceeds {tol.divergence:g}")

    window = np.arange(H // 2, H)
    above = np.flatnonzero(terms >= tol.iso)
    if terms[window].max() < tol.iso:
        if not len(above):
            return verdict(EVENTUALLY_ISOMETRIC, "heuristic", "1 - lambda below the isometry tolerance everywhere",
                           isometric_from=1)
        last = int(above[-1])
        fit = fit_tail(terms, above[-FALLBACK_TERMS:])
        if fit is not None and fit.ratio < 1.0 - tol.tail_ratio and fit.predict(last + 1) < tol.iso * 16:
            return verdict(SEMI_CONTRACTING, "heuristic",
                           f"tail decays geometrically (q = {fit.ratio:.4g}) below resolution after n = {last + 1}",
                           fit=fit)
        return verdict(EVENTUALLY_ISOMETRIC, "heuristic",
                       f"1 - lambda drops below the isometry tolerance abruptly after n = {last + 1}",
                       isometric_from=last + 2, fit=fit)

    in_window = window[terms[window] >= tol.iso]
    fit = fit_tail(terms, in_window) or fit_tail(terms, above[-FALLBACK_TERMS:])
    if fit is None:
        return verdict(INCONCLUSIVE, "none", "too few resolvable terms for a tail fit")
    if fit.ratio < 1.0 - tol.tail_ratio:
        return verdict(SEMI_CONTRACTING, "heuristic", f"fitted ratio q = {fit.ratio:.6g} is summable", fit=fit)
    return verdict(CONTRACTING, "heuristic", f"fitted ratio q = {fit.ratio:.6g} is not summable", fit=fit)


def verdict_from_trace(trace: OrbitTrace, tol: Optional[Tolerances] = None) -> InfinitesimalVerdict:
    t = trace.tower
    exact_from = t.covering_tail_start(upto=trace.levels)
    v = classify_lambdas(trace.lambda_sequence(), tol, exact_from)
    if trace.truncated_at is not None and v.type != EVENTUALLY_ISOMETRIC:
        v.reason += f"; trace truncated at level {trace.truncated_at}"
    return v


def infinitesimal_type(t: TowerSpec, p: Optional[complex] = None, tol: Optional[Tolerances] = None,
                       settings: Optional[TraceSettings] = None) -> InfinitesimalVerdict:
    """Тип башни по искажениям вдоль орбиты точки p (по умолчанию базовой)."""
    spec = t.with_points(base=p, pairs=[])
    return verdict_from_trace(iterate_trace(spec, settings), tol)
