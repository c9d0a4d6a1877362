# hypdyn/classify/thinness.py
"""Существенно тонкие и толстые башни по радиусам инъективности δ_n вдоль орбиты."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from hypdyn.classify.sampling import second_point
from hypdyn.config.settings import Tolerances, TraceSettings
from hypdyn.tower.spec import TowerSpec
from hypdyn.tower.trace import OrbitTrace, iterate_trace

logger = logging.getLogger(__name__)

THIN = "essentially_thin"
THICK = "essentially_thick"
INCONCLUSIVE = "inconclusive"


@dataclass
class ThinnessVerdict:
    verdict: str
    confidence: str
    delta_final: float
    delta_min: float
    reason: str = ""
    monotone_tail: Optional[bool] = None
    second_point_agrees: Optional[bool] = None

    @property
    def conclusive(self) -> bool:
        return self.verdict != INCONCLUSIVE

    def as_dict(self) -> dict:
        def _num(x: float):
            return None if math.isinf(x) else x
        return {"verdict": self.verdict, "confidence": self.confidence, "delta_final": _num(self.delta_final),
                "delta_min": _num(self.delta_min), "monotone_tail": self.monotone_tail,
                "second_point_agrees": self.second_point_agrees, "reason": self.reason}


def classify_deltas(deltas: np.ndarray, tol: Optional[Tolerances] = None) -> ThinnessVerdict:
    """Вердикт по последовательности [δ_0, …, δ_H]."""
    tol = tol or Tolerances.from_env()
    d = np.asarray(deltas, dtype=float)
    H = len(d) - 1
    if H < 1:
        return ThinnessVerdict(INCONCLUSIVE, "none", float(d[-1]) if len(d) else math.nan, math.nan,
                               "need at least two levels")
    final, middle = float(d[-1]), float(d[H // 2])
    trailing = d[H // 2:]
    low = float(trailing.min())
    if np.isinf(trailing).all():
        return ThinnessVerdict(THICK, "high", final, low, "simply connected levels: injectivity radius is infinite")
    if final < tol.thin and final <= 0.5 * middle:
        return ThinnessVerdict(THIN, "heuristic", final, low,
                               f"delta fell from {middle:.4g} to {final:.4g} over the trailing window")
    if low >= tol.thin:
        return ThinnessVerdict(THICK, "heuristic", final, low,
                               f"delta stays above {tol.thin:g} over the trailing window")
    if trailing.max() <= trailing.min() * (1.0 + 1e-6):
        return ThinnessVerdict(THICK, "heuristic", final, low,
                               f"delta settles at {final:.4g} without tending to zero")
    return ThinnessVerdict(INCONCLUSIVE, "none", final, low, "delta is below the threshold but not clearly decaying")


def _monotone_tail(deltas: np.ndarray) -> bool:
    tail = deltas[len(deltas) // 2:]
    finite = tail[np.isfinite(tail)]
    return bool(np.all(finite[1:] <= finite[:-1] * (1.0 + 1e-9))) if len(finite) > 1 else True


def thinness(t: TowerSpec, p: Optional[complex] = None, tol: Optional[Tolerances] = None,
             settings: Optional[TraceSettings] = None, check_monotone: bool = False,
             cross_check: bool = True, trace: Optional[OrbitTrace] = None) -> ThinnessVerdict:
    """
    Вердикт тонкости вдоль орбиты p. Для не сжимающих башен (check_monotone)
    дополнительно проверяется, что δ_n в итоге не возрастает; при cross_check
    вердикт сверяется со второй точкой поверхности 0.
    """
    tol = tol or Tolerances.from_env()
    if trace is None:
        trace = iterate_trace(t.with_points(base=p, pairs=[]), settings)
    deltas = trace.delta_sequence()
    v = classify_deltas(deltas, tol)
    if check_monotone:
        v.monotone_tail = _monotone_tail(deltas)
        if not v.monotone_tail:
            logger.info("tower %s: injectivity radius is not eventually non-increasing", t.name)
    if cross_check:
        s0 = t.surface_at(0)
        q = second_point(s0, trace.tower.base_point)
        if s0.contains(q):
            other = classify_deltas(iterate_trace(t.with_points(base=q, pairs=[]), settings).delta_sequence(), tol)
            v.second_point_agrees = other.verdict == v.verdict
            if not v.second_point_agrees:
                logger.warning("thinness verdicts disagree: %s at base, %s at %s", v.verdict, other.verdict, q)
    return v
