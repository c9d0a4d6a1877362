# hypdyn/classify/table.py
"""
Шесть типов блуждающих областей: (инфинитезимальный тип × тонкость) плюс
измеренная модальность пар.

    1  сжимающая                        все пары → 0
    2  толстая, полусжимающая           пары → c > 0, не достигается
    3  тонкая, полусжимающая            бимодальная: → 0 и → c > 0
    4  толстая, в итоге изометричная    пары в итоге постоянны
    5  толстая, локально (но не глобально) в итоге изометричная
    6  тонкая, в итоге изометричная     тримодальная
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Set

from hypdyn.classify.modality import (
    EVENTUALLY_CONSTANT,
    LABELS,
    POSITIVE_NOT_ATTAINED,
    TO_ZERO,
    ModalityVerdict,
    domain_modality,
)
from hypdyn.classify.thinness import THICK, THIN, ThinnessVerdict, thinness
from hypdyn.classify.trichotomy import (
    CONTRACTING,
    EVENTUALLY_ISOMETRIC,
    SEMI_CONTRACTING,
    InfinitesimalVerdict,
    verdict_from_trace,
)
from hypdyn.config.settings import Tolerances, TraceSettings
from hypdyn.geometry.surfaces import annulus_modulus
from hypdyn.tower.spec import TowerSpec
from hypdyn.tower.trace import iterate_trace

logger = logging.getLogger(__name__)

EXPECTED_MODALITY = {
    1: {TO_ZERO},
    2: {POSITIVE_NOT_ATTAINED},
    3: {TO_ZERO, POSITIVE_NOT_ATTAINED},
    4: {EVENTUALLY_CONSTANT},
    5: {EVENTUALLY_CONSTANT, "non_constant"},
    6: {TO_ZERO, POSITIVE_NOT_ATTAINED, EVENTUALLY_CONSTANT},
}

CONNECTIVITY_NOTE = ("wandering domains of connectivity >= 3 or without eventual connectivity "
                     "are not constructible in this artifact")


@dataclass
class SixTypeVerdict:
    row: Optional[int]
    infinitesimal: InfinitesimalVerdict
    thinness: ThinnessVerdict
    modality: ModalityVerdict
    expected: List[str] = field(default_factory=list)
    discrepancies: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def conclusive(self) -> bool:
        return self.row is not None

    def as_dict(self) -> dict:
        return {
            "row": self.row,
            "infinitesimal": self.infinitesimal.as_dict(),
            "thinness": self.thinness.as_dict(),
            "modality": self.modality.as_dict(),
            "expected_modality": self.expected,
            "discrepancies": self.discrepancies,
            "notes": self.notes,
        }


def table_row(infinitesimal: str, thin: str, labels: Set[str]) -> Optional[int]:
    """Строка таблицы по вердиктам; None, если вердикты неполны."""
    if infinitesimal == CONTRACTING:
        return 1
    if thin not in (THIN, THICK):
        return None
    if infinitesimal == SEMI_CONTRACTING:
        return 3 if thin == THIN else 2
    if infinitesimal == EVENTUALLY_ISOMETRIC:
        if thin == THIN:
            return 6
        return 5 if labels - {EVENTUALLY_CONSTANT} else 4
    return None


def modality_discrepancies(row: int, labels: Set[str]) -> List[str]:
    """Расхождения измеренной модальности с ожидаемой для строки."""
    if row == 5:
        issues = []
        if EVENTUALLY_CONSTANT not in labels:
            issues.append("row 5 expects eventually constant local pairs; none were certified")
        if not labels - {EVENTUALLY_CONSTANT}:
            issues.append("row 5 expects a pair that is not eventually constant; none was found")
        return issues
    expected = EXPECTED_MODALITY[row]
    if labels == expected:
        return []
    return [f"row {row} expects labels {sorted(expected)}, measured {sorted(labels)}"]


def _modulus_note(t: TowerSpec, horizon: int) -> Optional[str]:
    s0, sh = t.surface_at(0), t.surface_at(horizon)
    if not (s0.annulus_type and sh.annulus_type):
        return None
    m0, mh = annulus_modulus(s0), annulus_modulus(sh)
    direction = "increases" if mh > m0 else "decreases" if mh < m0 else "is constant"
    return f"measured modulus of U_n {direction}: Mod U_0 = {m0:.6g}, Mod U_{horizon} = {mh:.6g}"


def main_type(t: TowerSpec, tol: Optional[Tolerances] = None, settings: Optional[TraceSettings] = None,
              sample_count: Optional[int] = None) -> SixTypeVerdict:
    """Строка таблицы шести типов для башни с ожидаемой и измеренной модальностью."""
    tol = tol or Tolerances.from_env()
    settings = settings or TraceSettings.from_env()
    trace = iterate_trace(t.with_points(pairs=[]), settings)
    inf = verdict_from_trace(trace, tol)
    thin = thinness(t, tol=tol, settings=settings, trace=trace,
                    check_monotone=inf.type in (SEMI_CONTRACTING, EVENTUALLY_ISOMETRIC))
    modality = domain_modality(t, sample_count, tol, settings)
    labels = set(modality.labels)
    row = table_row(inf.type, thin.verdict, labels)
    verdict = SixTypeVerdict(row=row, infinitesimal=inf, thinness=thin, modality=modality)
    verdict.notes.append(CONNECTIVITY_NOTE)
    if trace.truncated_at is not None:
        verdict.notes.append(trace.reason)
    if row is None:
        verdict.notes.append("classification inconclusive at this horizon")
        logger.info("tower %s: inconclusive (%s, %s)", t.name, inf.type, thin.verdict)
        return verdict
    verdict.expected = sorted(EXPECTED_MODALITY[row], key=lambda x: LABELS.index(x) if x in LABELS else 9)
    verdict.discrepancies = modality_discrepancies(row, labels)
    if t.expected_row is not None and t.expected_row != row:
        verdict.discrepancies.append(f"tower declares row {t.expected_row}, measured row {row}")
    if thin.verdict == THIN:
        note = _modulus_note(t, trace.levels)
        if note:
            verdict.notes.append(note)
    for issue in verdict.discrepancies:
        logger.warning("tower %s: %s", t.name, issue)
    logger.info("tower %s classified as row %s (%s)", t.name, row, modality.aggregate)
    return verdict
