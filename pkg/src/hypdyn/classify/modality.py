# hypdyn/classify/modality.py
"""
Модальность пар: расстояние между образами пары стремится к нулю, к
положительному пределу, который не достигается, или в итоге постоянно.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from more_itertools import first_true

from hypdyn.classify.sampling import Pair, sample_pairs
from hypdyn.config.settings import Tolerances, TraceSettings
from hypdyn.errors import SequenceDataError
from hypdyn.tower.spec import TowerSpec
from hypdyn.tower.trace import OrbitTrace, iterate_trace

logger = logging.getLogger(__name__)

TO_ZERO = "to_zero"
POSITIVE_NOT_ATTAINED = "positive_not_attained"
EVENTUALLY_CONSTANT = "eventually_constant"
LABELS = (TO_ZERO, POSITIVE_NOT_ATTAINED, EVENTUALLY_CONSTANT)
AGGREGATES = {1: "unimodal", 2: "bimodal", 3: "trimodal"}


@dataclass(frozen=True, slots=True)
class PairLabel:
    label: str
    limit: float
    settled_from: Optional[int] = None
    in_e: bool = False


@dataclass
class PairRecord:
    pair: Pair
    label: PairLabel
    final: float
    source: str = "sampled"

    def as_dict(self) -> dict:
        x, y = self.pair
        return {"pair": [[x.real, x.imag], [y.real, y.imag]], "label": self.label.label,
                "limit": self.label.limit, "settled_from": self.label.settled_from,
                "in_e": self.label.in_e, "final": self.final, "source": self.source}


@dataclass
class ModalityVerdict:
    records: List[PairRecord] = field(default_factory=list)
    excluded: List[PairRecord] = field(default_factory=list)
    unresolved: List[PairRecord] = field(default_factory=list)

    @property
    def labels(self) -> List[str]:
        return sorted({r.label.label for r in self.records}, key=LABELS.index)

    @property
    def aggregate(self) -> Optional[str]:
        return AGGREGATES.get(len(self.labels))

    def counts(self) -> Dict[str, int]:
        return {name: sum(r.label.label == name for r in self.records) for name in LABELS}

    def as_dict(self) -> dict:
        return {"aggregate": self.aggregate, "labels": self.labels, "counts": self.counts(),
                "excluded": len(self.excluded), "unresolved": len(self.unresolved),
                "pairs": [r.as_dict() for r in self.records]}


def _validated(seq: Sequence[float], tol: Tolerances) -> np.ndarray:
    d = np.asarray(seq, dtype=float)
    bad = np.flatnonzero(~np.isfinite(d))
    if len(bad):
        d = d[:bad[0]]
    if not len(d):
        raise SequenceDataError("empty distance sequence")
    if (d < 0).any():
        raise SequenceDataError("negative distance in sequence")
    rises = np.diff(d) - tol.monotone_slack * np.maximum(1.0, d[:-1])
    if len(rises) and rises.max() > 0:
        n = int(np.argmax(rises)) + 1
        raise SequenceDataError(f"distance increases at level {n}: {d[n - 1]!r} -> {d[n]!r}")
    return d


def is_e_pair(seq: Sequence[float], tol: Optional[Tolerances] = None) -> bool:
    """Образы пары совпали на некотором уровне (обрыв расстояния ниже tol.e_pair)."""
    tol = tol or Tolerances.from_env()
    d = np.asarray(seq, dtype=float)
    hits = np.flatnonzero(d[1:] <= tol.e_pair) + 1
    return bool(len(hits)) and bool((d[hits - 1] > tol.zero).any())


def _settled_from(d: np.ndarray, tol: float) -> int:
    """Наименьшее N с |d_n − d_N| < tol для всех n ≥ N."""
    H = len(d) - 1
    lo = hi = d[H]
    N = H
    for n in range(H - 1, -1, -1):
        lo, hi = min(lo, d[n]), max(hi, d[n])
        # все d_k, k ≥ n, должны лежать в (d_n − tol, d_n + tol)
        if hi - d[n] >= tol or d[n] - lo >= tol:
            break
        N = n
    return N


def pair_modality(seq: Sequence[float], tol: Optional[Tolerances] = None) -> PairLabel:
    """Метка пары по невозрастающей последовательности расстояний [d_0, …, d_H]."""
    tol = tol or Tolerances.from_env()
    d = _validated(seq, tol)
    H = len(d) - 1
    in_e = is_e_pair(d, tol)
    if d[-1] < tol.zero and (H == 0 or d[-1] <= d[0]):
        return PairLabel(TO_ZERO, 0.0, in_e=in_e)
    N = _settled_from(d, tol.const)
    if H >= 1 and N <= H - max(2, H // 4) and d[N] > tol.zero:
        steps = np.abs(np.diff(d[N:]))
        if not len(steps) or steps.max() <= tol.iso * max(1.0, float(d[N])):
            return PairLabel(EVENTUALLY_CONSTANT, float(d[N]), settled_from=N, in_e=in_e)
    return PairLabel(POSITIVE_NOT_ATTAINED, float(d[-1]), in_e=in_e)


def contraction_deadline(d0: float, c: float, tol: Optional[Tolerances] = None, margin: int = 2) -> int:
    """Уровень, к которому пара с расстоянием d0 сжимается ниже tol.zero при λ_n ≤ 1 − c."""
    tol = tol or Tolerances.from_env()
    if not 0 < c < 1:
        raise ValueError("contraction rate c must lie in (0, 1)")
    if d0 <= tol.zero:
        return 0
    return math.ceil(math.log(d0 / tol.zero) / c) + margin


def bracket_label(lo: np.ndarray, hi: np.ndarray, inj: np.ndarray,
                  tol: Optional[Tolerances] = None) -> Optional[PairLabel]:
    """
    Метка по вилкам [lo_n, hi_n] расстояний (поверхности без точной метрики).

    Постоянство удостоверяется вложенным шаром: если hi_0 меньше нижней оценки
    радиуса инъективности вдоль всей орбиты первой точки, накрытия сохраняют
    расстояние. Непостоянство удостоверяется строгим падением hi_{n+1} < lo_n
    в хвостовом окне. None, если вилки ничего не удостоверяют.
    """
    tol = tol or Tolerances.from_env()
    H = len(lo) - 1
    in_e = bool(any(hi[n] <= tol.e_pair and lo[n - 1] > tol.zero for n in range(1, H + 1)))
    if H >= 0 and hi[0] < float(np.min(inj)):
        return PairLabel(EVENTUALLY_CONSTANT, float(hi[0]), settled_from=0, in_e=in_e)
    if hi[-1] < tol.zero:
        return PairLabel(TO_ZERO, 0.0, in_e=in_e)
    drops = [n for n in range(H // 2, H) if hi[n + 1] < lo[n]]
    if drops and lo[-1] > tol.zero:
        return PairLabel(POSITIVE_NOT_ATTAINED, float(lo[-1]), in_e=in_e)
    return None


def label_trace(trace: OrbitTrace, tol: Optional[Tolerances] = None,
                source: str = "sampled") -> Tuple[List[PairRecord], List[PairRecord]]:
    """(размеченные, неразрешённые) записи для отслеживаемых пар трассы."""
    tol = tol or Tolerances.from_env()
    labelled, unresolved = [], []
    for k, pair in enumerate(trace.tower.tracked_pairs):
        seq = trace.distance_sequence(k)
        if trace.brackets is None:
            labelled.append(PairRecord(pair, pair_modality(seq, tol), float(seq[-1]), source))
            continue
        lo, hi = trace.brackets[:, k, 0], trace.brackets[:, k, 1]
        inj = np.array([trace.surface(n).lift_injectivity(trace.pair_lifts[n, k, 0])
                        for n in range(trace.levels + 1)])
        label = bracket_label(lo, hi, inj, tol)
        if label is None:
            unresolved.append(PairRecord(pair, PairLabel("unresolved", math.nan), float(hi[-1]), source))
        else:
            labelled.append(PairRecord(pair, label, float(lo[-1]), source))
    return labelled, unresolved


def domain_modality(t: TowerSpec, sample_count: Optional[int] = None, tol: Optional[Tolerances] = None,
                    settings: Optional[TraceSettings] = None, extra_pairs: Sequence[Pair] = ()) -> ModalityVerdict:
    """
    Метки для отслеживаемых пар башни и случайной выборки пар на поверхности 0;
    пары из множества E (образы совпали) исключаются из агрегата.
    """
    tol = tol or Tolerances.from_env()
    settings = settings or TraceSettings.from_env()
    count = settings.modality_samples if sample_count is None else sample_count
    rng = np.random.default_rng(settings.seed)
    sampled = sample_pairs(t.surface_at(0), rng, count) if count > 0 else []
    groups: List[Tuple[str, List[Pair]]] = [("tracked", list(t.tracked_pairs)), ("extra", list(extra_pairs)),
                                            ("sampled", sampled)]
    verdict = ModalityVerdict()
    for source, pairs in groups:
        if not pairs:
            continue
        trace = iterate_trace(t.with_points(pairs=pairs), settings)
        labelled, unresolved = label_trace(trace, tol, source)
        verdict.unresolved.extend(unresolved)
        for record in labelled:
            (verdict.excluded if record.label.in_e else verdict.records).append(record)
    logger.info("modality of %s: %s %s", t.name or "tower", verdict.aggregate, verdict.counts())
    return verdict


def first_label(verdict: ModalityVerdict, label: str) -> Optional[PairRecord]:
    return first_true(verdict.records, pred=lambda r: r.label.label == label)
