# tests/test_trace.py
import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings as hsettings
from hypothesis import strategies as st

from hypdyn.config.settings import TraceSettings
from hypdyn.errors import DomainError
from hypdyn.geometry.disc import MobiusDisc, disc_distance
from hypdyn.geometry.surfaces import DiscSurface, RoundAnnulus
from hypdyn.tower.maps import Blaschke2, MobiusMap, Power, Rotation, Scaling, derivative_matches
from hypdyn.tower.spec import Constant, DiscRule, FamilyRule, OneMinusPower, TowerSpec
from hypdyn.tower.trace import hyperbolic_distortion, iterate_trace, lift_normalize, tower_validate

DISC = DiscSurface()
points = st.builds(lambda r, t: r * cmath.exp(1j * t),
                   st.floats(min_value=0.0, max_value=0.9), st.floats(min_value=-math.pi, max_value=math.pi))


def _random_map(rng: np.random.Generator):
    kind = rng.integers(4)
    if kind == 0:
        return Scaling(complex(rng.uniform(0.05, 1.0)) * cmath.exp(1j * rng.uniform(0, 2 * math.pi)))
    if kind == 1:
        return Blaschke2(rng.uniform(0.05, 0.95))
    if kind == 2:
        return Power(int(rng.integers(1, 4)), rng.uniform(0.1, 1.0))
    return MobiusMap(MobiusDisc(cmath.exp(1j * rng.uniform(0, 6)), 0.6 * rng.uniform() * cmath.exp(1j * rng.uniform(0, 6))))


def test_schwarz_pick_on_random_draws(rng):
    worst = 0.0
    for _ in range(1000):
        f = _random_map(rng)
        z = 0.95 * math.sqrt(rng.uniform()) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        worst = max(worst, hyperbolic_distortion(f, DISC, DISC, z))
    assert worst <= 1.0 + 1e-12


@pytest.mark.parametrize("f", [Rotation(0.7), Scaling(cmath.exp(0.3j)), MobiusMap(MobiusDisc(1j, 0.4 - 0.2j))])
def test_automorphisms_are_isometric(f, rng):
    assert f.is_covering(DISC, DISC)
    for _ in range(50):
        z = 0.9 * math.sqrt(rng.uniform()) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
        assert abs(hyperbolic_distortion(f, DISC, DISC, z) - 1.0) < 1e-10


def test_covering_status_follows_the_declared_schedule():
    far = FamilyRule("scaling", {"c": OneMinusPower(4.0)})(40)
    assert far.c == 1.0
    assert not far.is_covering(DISC, DISC)
    assert FamilyRule("scaling", {"c": Constant(1j)})(40).is_covering(DISC, DISC)


def test_power_covering_between_annuli():
    src, dst = RoundAnnulus(2.0 * math.pi), RoundAnnulus(4.0 * math.pi)
    f = Power(2)
    assert f.is_covering(src, dst)
    for rep in (0.05, 0.01 * cmath.exp(1j), 0.3j):
        assert abs(hyperbolic_distortion(f, src, dst, rep) - 1.0) < 1e-10


@hsettings(max_examples=1000, deadline=None)
@given(a=st.floats(min_value=0.05, max_value=0.95), z=points, w=points)
def test_distortion_defect_comparison(a, z, w):
    f = Blaschke2(a)
    d = disc_distance(z, w)
    dz = 1.0 - hyperbolic_distortion(f, DISC, DISC, z)
    dw = 1.0 - hyperbolic_distortion(f, DISC, DISC, w)
    slack = 1e-9
    assert math.exp(-2.0 * d) * dw <= dz * (1.0 + slack) + 1e-15
    assert dz <= math.exp(2.0 * d) * dw * (1.0 + slack) + 1e-15


@pytest.mark.parametrize("f", [Scaling(0.5), Blaschke2(0.3), Power(3, 0.8), MobiusMap(MobiusDisc(1j, 0.2))])
def test_analytic_derivatives(f):
    for z in (0.1 + 0.2j, -0.4j, 0.6):
        assert derivative_matches(f, z)


def test_distortion_rejects_points_off_the_surface():
    with pytest.raises(DomainError):
        hyperbolic_distortion(Scaling(0.5), RoundAnnulus(1.0), RoundAnnulus(1.0), 0.01)


def _scaling_tower(c, horizon=32, pairs=((0j, 0.5 + 0j),)):
    return TowerSpec(surfaces=DiscRule(), maps=FamilyRule("scaling", {"c": c}), base_point=0j,
                     tracked_pairs=list(pairs), horizon=horizon, name="scaling")


def test_scaling_half_trace():
    trace = iterate_trace(_scaling_tower(Constant(0.5)), TraceSettings(horizon=32))
    assert trace.levels == 32
    assert math.isnan(trace.lam[0])
    assert np.allclose(trace.lambda_sequence(), 0.5, atol=1e-15)
    d = trace.distance_sequence(0)
    assert d[0] == pytest.approx(math.log(3.0), abs=1e-12)
    assert np.all(np.diff(d) < 0)
    assert d[-1] < 1e-8
    assert np.isinf(trace.delta).all()


def test_semi_contracting_partial_sum():
    trace = iterate_trace(_scaling_tower(OneMinusPower(4.0), horizon=64), TraceSettings(horizon=64))
    assert float(np.sum(1.0 - trace.lambda_sequence())) == pytest.approx(1.0 / 3.0, abs=1e-9)


def test_horizon_zero_trace_has_one_row():
    trace = iterate_trace(_scaling_tower(Constant(0.5), horizon=0), TraceSettings(horizon=0))
    assert trace.levels == 0
    assert len(trace.csv_rows()) == 1
    assert trace.csv_header()[:5] == ["n", "base_re", "base_im", "lambda", "delta"]


def test_power_annulus_delta_halves(tower):
    trace = iterate_trace(tower("power_annulus", horizon=20).with_points(pairs=[]), TraceSettings(horizon=20))
    ratios = trace.delta[1:] / trace.delta[:-1]
    assert np.allclose(ratios, 0.5, rtol=1e-9)
    assert np.allclose(trace.lambda_sequence(), 1.0, atol=1e-10)


@pytest.mark.parametrize("name", ["scaling_half", "scaling_semi", "rotation", "rotation_after_n", "power_annulus",
                                  "thin_semi"])
def test_shipped_towers_validate(tower, name):
    spec = tower(name, horizon=16)
    report = tower_validate(spec, TraceSettings(horizon=16))
    assert report.valid, report.first_failure


def test_validation_reports_points_off_the_surface(tower):
    spec = tower("power_annulus", horizon=4).with_points(base=0.5, pairs=[(1e-6 + 0j, 0.5 + 0j)])
    report = tower_validate(spec, TraceSettings(horizon=4))
    assert not report.valid
    assert report.first_failure.check == "points_on_surface"


# --- нормированные подъёмы ----------------------------------------------------

def test_scaling_lifts_fix_the_origin():
    lifts = lift_normalize(_scaling_tower(Constant(0.5), horizon=8), TraceSettings(horizon=8))
    assert len(lifts) == 8
    for g in lifts.lifts:
        assert abs(g.evaluate(0j)) < 1e-15
        assert g.derivative_at_zero == pytest.approx(0.5, abs=1e-15)
        assert g.evaluate(0.3 + 0.1j) == pytest.approx(0.15 + 0.05j, abs=1e-12)


def test_blaschke_lift_at_origin_has_derivative_a():
    spec = TowerSpec(surfaces=DiscRule(), maps=FamilyRule("blaschke2", {"a": Constant(0.6)}), horizon=4)
    lifts = lift_normalize(spec, TraceSettings(horizon=4))
    assert lifts[0].derivative_at_zero == pytest.approx(0.6, abs=1e-12)


@pytest.mark.parametrize("name", ["rotation_after_n", "scaling_semi", "power_annulus"])
def test_lift_moduli_are_the_distortions(tower, name):
    spec = tower(name, horizon=16)
    trace = iterate_trace(spec.with_points(pairs=[]), TraceSettings(horizon=16))
    lams = trace.lambda_sequence()
    moduli = np.array([g.modulus for g in trace.lifts.lifts])
    assert np.allclose(moduli, lams, rtol=0.0, atol=1e-10)


def test_composite_derivative_is_the_product_of_distortions(tower):
    spec = tower("rotation_after_n", horizon=16)
    trace = iterate_trace(spec.with_points(pairs=[]), TraceSettings(horizon=16))
    H = trace.levels
    product = float(np.prod(trace.lambda_sequence()))
    assert product == pytest.approx(0.9 ** 8, rel=1e-12)
    assert abs(trace.lifts.derivative_at_zero(0, H)) == pytest.approx(product, rel=1e-12)
    assert abs(trace.lifts.composite(0, H).derivative(0j)) == pytest.approx(product, rel=1e-12)
