# hypdyn/tower/trace.py
"""
Трассы башни: поуровневые образы базовой точки, искажения λ_n, радиусы
инъективности δ_n и расстояния отслеживаемых пар.

Представители точек переносятся с уровня на уровень как точки диска (подъёмы);
минимизация по орбите группы накрытия выполняется только при чтении расстояний.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from hypdyn.config.settings import TraceSettings
from hypdyn.errors import DomainError, MapDomainError, NumericalBreakdown, PreconditionError
from hypdyn.geometry.disc import MobiusDisc, distortion_in_disc
from hypdyn.geometry.surfaces import CollarBand, RoundAnnulus, SurfaceModel, SurfacePointRep, collar_annulus
from hypdyn.tower.maps import MapElement, derivative_matches
from hypdyn.tower.spec import TowerSpec

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
#  Подъёмы отображений
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LiftedMap:
    """Подъём F: 𝔻 → 𝔻 отображения f: src → dst в униформизирующих картах."""
    f: MapElement
    src: SurfaceModel
    dst: SurfaceModel

    def __post_init__(self) -> None:
        src_ann = isinstance(self.src, RoundAnnulus)
        dst_ann = isinstance(self.dst, RoundAnnulus)
        if src_ann != dst_ann:
            raise MapDomainError(f"{self.f.family} between {self.src.kind} and {self.dst.kind} is not supported")
        if src_ann and self.f.log_form() is None:
            raise MapDomainError(f"{self.f.family} is not monomial; it has no lift between round annuli")

    @property
    def log_mode(self) -> bool:
        return isinstance(self.src, RoundAnnulus)

    def _image_log(self, z: complex) -> Tuple[complex, int]:
        d, beta = self.f.log_form()
        return d * self.src.to_log(z) + beta, d

    def value(self, z: complex) -> complex:
        if not self.log_mode:
            return self.f.evaluate(z)
        u, _ = self._image_log(z)
        return _tanh_half(self.dst.log_to_strip(u))

    def derivative(self, z: complex) -> complex:
        if not self.log_mode:
            return self.f.derivative(z)
        # dz′/dz = d·(L/L′)·(1 − z′²)/(1 − z²)
        u, d = self._image_log(z)
        z1 = _tanh_half(self.dst.log_to_strip(u))
        return d * (self.src.log_inner / self.dst.log_inner) * (1.0 - z1 * z1) / (1.0 - z * z)

    def distortion(self, z: complex) -> float:
        if self.src.kind == "planar_domain":
            return 1.0 if self.f.is_covering(self.src, self.dst) else math.nan
        return distortion_in_disc(z, self.value(z), self.derivative(z))


def _tanh_half(w: complex) -> complex:
    return cmath.tanh(0.5 * w)


def lift_map(f: MapElement, src: SurfaceModel, dst: SurfaceModel) -> LiftedMap:
    return LiftedMap(f, src, dst)


def hyperbolic_distortion(f: MapElement, src: SurfaceModel, dst: SurfaceModel,
                          p: SurfacePointRep | complex) -> float:
    """ρ_dst(f p)·|f′(p)| / ρ_src(p) в координатах поверхностей."""
    rep = p.rep if isinstance(p, SurfacePointRep) else complex(p)
    if not src.contains(rep):
        raise DomainError(f"{rep} is not a point of the source surface")
    if src.kind == "planar_domain":
        if f.is_covering(src, dst):
            return 1.0
        raise MapDomainError("distortion on truncated planar domains is certified only for coverings")
    if isinstance(src, RoundAnnulus) and isinstance(dst, RoundAnnulus):
        form = f.log_form()
        if form is None:
            raise MapDomainError(f"{f.family} has no logarithmic form between annuli")
        u = cmath.log(rep)
        d, beta = form
        image = d * u + beta
        return dst.log_density(image) * abs(d) / src.log_density(u)
    if isinstance(src, RoundAnnulus) or isinstance(dst, RoundAnnulus):
        raise MapDomainError(f"{f.family} between {src.kind} and {dst.kind} is not supported")
    try:
        derivative = f.derivative(rep)
    except (ZeroDivisionError, OverflowError) as e:
        raise NumericalBreakdown(f"derivative evaluation failed at {rep}: {e}") from e
    return dst.density(f.evaluate(rep)) * abs(derivative) / src.density(rep)


# ---------------------------------------------------------------------------
#  Проверка башни
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class ValidationEntry:
    level: int
    check: str
    ok: bool
    detail: str = ""


@dataclass
class ValidationReport:
    entries: List[ValidationEntry] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return all(e.ok for e in self.entries)

    @property
    def first_failure(self) -> Optional[ValidationEntry]:
        return next((e for e in self.entries if not e.ok), None)

    def add(self, level: int, check: str, ok: bool, detail: str = "") -> bool:
        self.entries.append(ValidationEntry(level, check, bool(ok), detail))
        return ok

    def as_dict(self) -> dict:
        failure = self.first_failure
        return {"valid": self.valid,
                "first_failure": None if failure is None else {"level": failure.level, "check": failure.check,
                                                               "detail": failure.detail},
                "checks": len(self.entries)}


def _boundary_containment(f: MapElement, src: SurfaceModel, dst: SurfaceModel, samples: int) -> Tuple[bool, str]:
    angles = 2.0 * math.pi * np.arange(samples) / samples
    if isinstance(src, RoundAnnulus):
        d, beta = f.log_form()
        L, L1 = src.log_inner, dst.log_inner
        tol = 1e-9 * L1
        worst = ""
        for x in (-L * (1.0 - 1e-9), -L * 1e-9):
            images = d * (x + 1j * angles) + beta
            low, high = images.real.min(), images.real.max()
            if low < -L1 - tol or high > tol:
                worst = f"image log-radius range [{low:.6g}, {high:.6g}] leaves (-{L1:.6g}, 0)"
                return False, worst
        return True, ""
    if src.kind == "planar_domain":
        pts = src.sample_points(samples)
        bad = [z for z in pts if not dst.contains(f.evaluate(z))]
        return (not bad), (f"{len(bad)} sampled images outside target" if bad else "")
    radius = 1.0 - 1e-6
    zs = radius * np.exp(1j * angles)
    images = np.array([f.evaluate(complex(z)) for z in zs])
    worst = float(np.abs(images).max())
    return worst < 1.0, ("" if worst < 1.0 else f"max |f(z)| = {worst:.17g} on |z| = {radius}")


def _equivariance(F: LiftedMap, src: SurfaceModel, dst: SurfaceModel, samples: int) -> Tuple[bool, str]:
    gamma = src.deck_generator
    if gamma is None:
        return True, ""
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(samples):
        z = complex(0.6 * math.sqrt(rng.random()) * np.exp(2j * math.pi * rng.random()))
        worst = max(worst, dst.lift_distance(F.value(gamma(z)), F.value(z)))
    return worst < 1e-8, ("" if worst < 1e-8 else f"deck equivariance defect {worst:.3g}")


def tower_validate(t: TowerSpec, settings: Optional[TraceSettings] = None) -> ValidationReport:
    """Проверяет совместимость отображений и поверхностей по уровням до горизонта."""
    settings = settings or TraceSettings.from_env()
    report = ValidationReport()
    s0 = t.surface_at(0)
    points = [t.base_point] + [p for pair in t.tracked_pairs for p in pair]
    bad = [p for p in points if not s0.contains(p)]
    report.add(0, "points_on_surface", not bad, f"{len(bad)} points outside surface 0" if bad else "")
    checked_families: Dict[str, bool] = {}
    for n in range(t.horizon):
        try:
            f, src, dst = t.map_at(n), t.surface_at(n), t.surface_at(n + 1)
            F = lift_map(f, src, dst)
        except (MapDomainError, DomainError) as e:
            report.add(n, "compatibility", False, str(e))
            break
        ok, detail = _boundary_containment(f, src, dst, settings.boundary_samples)
        if not report.add(n, "boundary_containment", ok, detail):
            break
        ok, detail = _equivariance(F, src, dst, 16)
        if not report.add(n, "deck_equivariance", ok, detail):
            break
        key = repr(f.describe())
        if key not in checked_families:
            sample_points = [0.35 * np.exp(1j * k) for k in (0.3, 1.7, 2.9)] + [0.7 * np.exp(1j * 4.1)]
            checked_families[key] = all(
                derivative_matches(f, complex(z), settings.fd_step, settings.fd_rtol) for z in sample_points
            )
            if not report.add(n, "derivative", checked_families[key], "" if checked_families[key]
                              else "analytic derivative disagrees with finite differences"):
                break
        if f.is_covering(src, dst) and src.kind != "planar_domain":
            sample_points = [0j, 0.3 + 0.2j, -0.5j]
            worst = max(abs(F.distortion(z) - 1.0) for z in sample_points)
            if not report.add(n, "covering_isometry", worst < 1e-10, f"|λ − 1| = {worst:.3g}"):
                break
    if report.valid:
        logger.debug("tower %s valid up to horizon %d", t.name, t.horizon)
    else:
        failure = report.first_failure
        logger.info("tower %s invalid at level %d (%s)", t.name, failure.level, failure.check)
    return report


# ---------------------------------------------------------------------------
#  Нормированные подъёмы
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalizedLift:
    """g_n = M_{n+1} ∘ δ ∘ F_n ∘ M_n⁻¹, где M_k сдвигает подъём базовой точки в 0."""
    level: int
    lifted: LiftedMap
    pre: MobiusDisc    # M_n⁻¹
    deck: Optional[MobiusDisc]
    post: MobiusDisc   # M_{n+1}
    derivative_at_zero: complex

    @property
    def modulus(self) -> float:
        return abs(self.derivative_at_zero)

    @property
    def phase(self) -> float:
        return math.atan2(self.derivative_at_zero.imag, self.derivative_at_zero.real)

    def evaluate(self, z: complex) -> complex:
        w = self.lifted.value(self.pre(z))
        if self.deck is not None:
            w = self.deck(w)
        return self.post(w)

    def derivative(self, z: complex) -> complex:
        z0 = self.pre(z)
        acc = self.pre.derivative(z)
        acc *= self.lifted.derivative(z0)
        w = self.lifted.value(z0)
        if self.deck is not None:
            acc *= self.deck.derivative(w)
            w = self.deck(w)
        return acc * self.post.derivative(w)


class LiftCache:
    """
    Нормированные подъёмы g_0, …, g_{H−1} и кэш композиций
    H_n^{n+l} = g_{n+l−1} ∘ … ∘ g_n.
    """

    def __init__(self, lifts: Sequence[NormalizedLift]):
        self.lifts = list(lifts)
        prefix = [1.0 + 0.0j]
        for g in self.lifts:
            prefix.append(prefix[-1] * g.derivative_at_zero)
        self._prefix = prefix
        self._composites: Dict[Tuple[int, int], "CompositeLift"] = {}

    def __len__(self) -> int:
        return len(self.lifts)

    def __getitem__(self, n: int) -> NormalizedLift:
        return self.lifts[n]

    def composite(self, n: int, length: int) -> "CompositeLift":
        key = (n, length)
        if key not in self._composites:
            if n < 0 or n + length > len(self.lifts):
                raise IndexError(f"composite H_{n}^{n + length} is outside the traced range")
            self._composites[key] = CompositeLift(tuple(self.lifts[n:n + length]))
        return self._composites[key]

    def derivative_at_zero(self, n: int, length: int) -> complex:
        """(H_n^{n+l})′(0) через префиксные произведения g_k′(0)."""
        if self._prefix[n] == 0:
            return complex(np.prod([g.derivative_at_zero for g in self.lifts[n:n + length]]))
        return self._prefix[n + length] / self._prefix[n]


@dataclass(frozen=True)
class CompositeLift:
    parts: Tuple[NormalizedLift, ...]

    def evaluate(self, z: complex) -> complex:
        for g in self.parts:
            z = g.evaluate(z)
        return z

    def derivative(self, z: complex) -> complex:
        acc = 1.0 + 0.0j
        for g in self.parts:
            acc *= g.derivative(z)
            z = g.evaluate(z)
        return acc


# ---------------------------------------------------------------------------
#  Трасса
# ---------------------------------------------------------------------------

@dataclass
class OrbitTrace:
    """
    Поуровневая запись. Строка n содержит подъём образа базовой точки, λ_n (искажение
    map_at(n−1) в образе уровня n−1; для n = 0 NaN), δ_n и расстояния пар.
    """
    tower: TowerSpec
    base: np.ndarray
    lam: np.ndarray
    delta: np.ndarray
    distances: np.ndarray
    pair_lifts: np.ndarray
    lifts: LiftCache
    brackets: Optional[np.ndarray] = None
    collars: Optional[List[Optional[CollarBand]]] = None
    truncated_at: Optional[int] = None
    reason: str = ""

    @property
    def levels(self) -> int:
        """Последний записанный уровень."""
        return len(self.base) - 1

    def lambda_sequence(self) -> np.ndarray:
        return self.lam[1:].copy()

    def delta_sequence(self) -> np.ndarray:
        return self.delta.copy()

    def distance_sequence(self, pair: int = 0) -> np.ndarray:
        return self.distances[:, pair].copy()

    def surface(self, n: int) -> SurfaceModel:
        return self.tower.surface_at(n)

    def csv_header(self) -> List[str]:
        cols = ["n", "base_re", "base_im", "lambda", "delta"]
        cols += [f"dist_pair_{k}" for k in range(self.distances.shape[1])]
        if self.brackets is not None:
            cols += [f"dist_pair_{k}_hi" for k in range(self.distances.shape[1])]
        return cols

    def csv_rows(self) -> List[List[float]]:
        rows = []
        for n in range(self.levels + 1):
            row = [n, self.base[n].real, self.base[n].imag, self.lam[n], self.delta[n]]
            row += list(self.distances[n])
            if self.brackets is not None:
                row += list(self.brackets[n, :, 1])
            rows.append(row)
        return rows


def _mobius_to_zero(z: complex) -> MobiusDisc:
    return MobiusDisc(rotation=1.0, center=z)


def _read_distance(surface: SurfaceModel, x: complex, y: complex) -> Tuple[float, float, float]:
    if surface.exact_metric:
        d = surface.lift_distance(x, y)
        return d, d, d
    lo, hi = surface.distance_bracket(x, y)
    return lo, lo, hi


def iterate_trace(t: TowerSpec, settings: Optional[TraceSettings] = None,
                  collar_eps: Optional[float] = None) -> OrbitTrace:
    """Вычисляет трассу башни для уровней 0..horizon."""
    settings = settings or TraceSettings.from_env()
    guard = 1.0 - settings.boundary_guard
    H = t.horizon
    s0 = t.surface_at(0)
    exact = s0.exact_metric
    try:
        z = s0.lift(t.base_point)
        pairs = [(s0.lift(x), s0.lift(y)) for x, y in t.tracked_pairs]
    except DomainError as e:
        raise DomainError(f"tower {t.name!r}: {e}") from e
    P = len(pairs)
    base = np.full(H + 1, np.nan, dtype=complex)
    lam = np.full(H + 1, np.nan)
    delta = np.full(H + 1, np.nan)
    dist = np.full((H + 1, P), np.nan)
    pair_lifts = np.full((H + 1, P, 2), np.nan, dtype=complex)
    brackets = None if exact else np.full((H + 1, P, 2), np.nan)
    collars: Optional[List[Optional[CollarBand]]] = [] if collar_eps is not None else None
    lifts: List[NormalizedLift] = []
    truncated, reason = None, ""

    for n in range(H + 1):
        surface = t.surface_at(n)
        base[n] = z
        delta[n] = surface.lift_injectivity(z)
        for k, (x, y) in enumerate(pairs):
            pair_lifts[n, k] = (x, y)
            value, lo, hi = _read_distance(surface, x, y)
            dist[n, k] = value
            if brackets is not None:
                brackets[n, k] = (lo, hi)
        if collars is not None:
            collars.append(collar_annulus(surface, collar_eps) if surface.annulus_type else None)
        if n == H:
            break
        F = lift_map(t.map_at(n), surface, t.surface_at(n + 1))
        target = t.surface_at(n + 1)
        lam[n + 1] = F.distortion(z)
        image = F.value(z)
        z_next, deck = target.reduce(image)
        if exact:
            pre = _mobius_to_zero(z).inverse()
            post = _mobius_to_zero(z_next)
            g0 = pre.derivative(0j) * F.derivative(z)
            if deck is not None:
                g0 *= deck.derivative(image)
            g0 *= post.derivative(z_next)
            lifts.append(NormalizedLift(n, F, pre, deck, post, g0))
        moved = []
        for x, y in pairs:
            moved.append((target.reduce(F.value(x))[0], target.reduce(F.value(y))[0]))
        escaped = [w for w in [z_next] + [p for pr in moved for p in pr] if abs(w) > guard]
        if escaped or not all(np.isfinite([z_next.real, z_next.imag])):
            truncated = n
            reason = f"representative reached |z| > 1 - {settings.boundary_guard:g} at level {n + 1}"
            logger.warning("trace of %s truncated: %s", t.name or "tower", reason)
            break
        z, pairs = z_next, moved

    last = (truncated if truncated is not None else H) + 1
    trace = OrbitTrace(
        tower=t, base=base[:last], lam=lam[:last], delta=delta[:last], distances=dist[:last],
        pair_lifts=pair_lifts[:last], lifts=LiftCache(lifts),
        brackets=None if brackets is None else brackets[:last], collars=collars,
        truncated_at=truncated, reason=reason,
    )
    logger.debug("trace %s: %d levels, %d pairs", t.name, trace.levels, P)
    return trace


def lift_normalize(t: TowerSpec, settings: Optional[TraceSettings] = None) -> LiftCache:
    """Нормированные подъёмы g_n, фиксирующие 0, с |g_n′(0)| = λ_{n+1}."""
    if not t.surface_at(0).exact_metric:
        raise PreconditionError("normalized lifts need uniformized surfaces; planar model domains have none")
    trace = iterate_trace(t.with_points(pairs=[]), settings)
    if trace.truncated_at is not None:
        raise NumericalBreakdown(trace.reason, level=trace.truncated_at)
    return trace.lifts


def lambda_sequence(t: TowerSpec, p: complex, settings: Optional[TraceSettings] = None) -> np.ndarray:
    """[λ_1, …, λ_H] вдоль орбиты точки p поверхности 0."""
    return iterate_trace(t.with_points(base=p, pairs=[]), settings).lambda_sequence()


def delta_sequence(t: TowerSpec, p: complex, settings: Optional[TraceSettings] = None) -> np.ndarray:
    """[δ_0, …, δ_H] вдоль орбиты точки p."""
    return iterate_trace(t.with_points(base=p, pairs=[]), settings).delta_sequence()


def distance_sequence(t: TowerSpec, p: complex, q: complex,
                      settings: Optional[TraceSettings] = None) -> np.ndarray:
    """[d_0, …, d_H] для пары (p, q)."""
    return iterate_trace(t.with_points(base=p, pairs=[(p, q)]), settings).distance_sequence(0)
