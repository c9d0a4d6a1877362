# tests/test_disc.py
import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypdyn.errors import CuspError, DomainError, SurfaceMismatchError
from hypdyn.geometry.disc import (
    DiscPoint,
    MobiusDisc,
    collar_width,
    disc_density,
    disc_distance,
    disc_distance_array,
    mobius_classify,
    mobius_compose,
)
from hypdyn.geometry.surfaces import (
    CyclicQuotient,
    RoundAnnulus,
    SurfacePointRep,
    annulus_modulus,
    collar_annulus,
    core_geodesic_length,
    injectivity_radius,
    surface_distance,
    to_cyclic_quotient,
)

radii = st.floats(min_value=0.0, max_value=0.9)
angles = st.floats(min_value=-math.pi, max_value=math.pi)
disc_points = st.builds(lambda r, t: r * cmath.exp(1j * t), radii, angles)


def test_distance_from_origin_to_half_is_log3():
    assert disc_distance(0, 0.5) == pytest.approx(math.log(3.0), abs=1e-12)


def test_density_at_origin():
    assert disc_density(0j) == 2.0


def test_collar_width_at_cosh_two():
    ell = 2.0 * math.acosh(2.0)
    assert collar_width(ell) == pytest.approx(0.5 * math.log(3.0), abs=1e-12)


def test_collar_width_rejects_non_positive_length():
    with pytest.raises(DomainError):
        collar_width(0.0)


@pytest.mark.parametrize("log_inner", np.linspace(0.3, 40.0, 20))
def test_modulus_times_core_length_is_pi(log_inner):
    s = RoundAnnulus(float(log_inner))
    assert annulus_modulus(s) * core_geodesic_length(s) == pytest.approx(math.pi, abs=1e-12)


def test_points_on_the_boundary_are_rejected():
    with pytest.raises(DomainError):
        DiscPoint(1.0)
    with pytest.raises(DomainError):
        disc_distance(0.0, 1.0 + 0j)


def test_mobius_rejects_bad_parameters():
    with pytest.raises(DomainError):
        MobiusDisc(rotation=2.0)
    with pytest.raises(DomainError):
        MobiusDisc(center=1.5)


@settings(max_examples=200, deadline=None)
@given(z=disc_points, w=disc_points, c=disc_points, theta=angles)
def test_mobius_maps_are_isometries(z, w, c, theta):
    m = MobiusDisc(rotation=cmath.exp(1j * theta), center=c)
    d = disc_distance(z, w)
    assert disc_distance(m(z), m(w)) == pytest.approx(d, rel=1e-8, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(z=disc_points, c=disc_points, theta=angles)
def test_inverse_undoes_the_map(z, c, theta):
    m = MobiusDisc(rotation=cmath.exp(1j * theta), center=c)
    assert abs(m.compose(m.inverse())(z) - z) < 1e-9


@settings(max_examples=100, deadline=None)
@given(z=disc_points, c1=disc_points, c2=disc_points, c3=disc_points, theta=angles)
def test_composition_is_associative(z, c1, c2, c3, theta):
    m1 = MobiusDisc(rotation=cmath.exp(1j * theta), center=c1)
    m2 = MobiusDisc(rotation=cmath.exp(-2j * theta), center=c2)
    m3 = MobiusDisc(rotation=1.0, center=c3)
    left = m1.compose(m2).compose(m3)
    right = m1.compose(m2.compose(m3))
    assert abs(left(z) - right(z)) < 1e-9
    assert abs(mobius_compose(m1, m2)(z) - m1(m2(z))) < 1e-9


@settings(max_examples=100, deadline=None)
@given(z=disc_points, w=disc_points)
def test_array_distance_matches_scalar(z, w):
    assert disc_distance_array(np.array([z]), np.array([w]))[0] == pytest.approx(disc_distance(z, w), abs=1e-9)


def test_classify_isometries():
    assert mobius_classify(MobiusDisc.identity()).kind == "identity"
    assert mobius_classify(MobiusDisc.rotation_by(0.7)).kind == "elliptic"
    cls = mobius_classify(MobiusDisc.real_translation(1.25))
    assert cls.kind == "hyperbolic"
    assert cls.translation_length == pytest.approx(1.25, rel=1e-9)
    assert {round(p.real) for p in cls.fixed_points} == {-1, 1}


def test_annulus_lift_project_round_trip():
    s = RoundAnnulus(2.0 * math.pi)
    rep = 0.05 * cmath.exp(0.4j)
    assert abs(s.project(s.lift(rep)) - rep) < 1e-12
    with pytest.raises(DomainError):
        s.lift(1e-4)


def test_annulus_injectivity_at_core_is_half_the_core_length():
    s = RoundAnnulus(2.0 * math.pi)
    core = math.exp(-math.pi)
    assert s.injectivity(core) == pytest.approx(0.5 * s.translation_length, rel=1e-9)


def test_collar_is_symmetric_about_the_core():
    s = RoundAnnulus(400.0)
    band = collar_annulus(s, 0.1)
    assert not band.empty
    lo, hi = band.log_radii
    assert 0.5 * (lo + hi) == pytest.approx(-200.0, abs=1e-9)


def test_annulus_and_its_quotient_agree():
    s = RoundAnnulus(3.0)
    q = to_cyclic_quotient(s)
    x, y = 0.3 + 0.2j, -0.1 + 0.05j
    assert q.lift_distance(x, y) == pytest.approx(s.lift_distance(x, y), rel=1e-9)


def test_parabolic_quotient_has_no_core_geodesic():
    q = CyclicQuotient.parabolic(1.0 + 0j, 1.0)
    with pytest.raises(CuspError):
        core_geodesic_length(q)


def test_distance_across_surfaces_is_rejected():
    a = SurfacePointRep(RoundAnnulus(2.0), 0.5)
    b = SurfacePointRep(RoundAnnulus(3.0), 0.5)
    with pytest.raises(SurfaceMismatchError):
        surface_distance(a, b)


def test_quotient_distance_takes_the_shorter_way_round():
    q = CyclicQuotient.hyperbolic(MobiusDisc.identity(), 1.0)
    x = SurfacePointRep(q, 0j)
    y = SurfacePointRep(q, math.tanh(0.35))
    assert surface_distance(x, y) == pytest.approx(0.3, abs=1e-12)
    assert surface_distance(x, x) == 0.0


def test_off_axis_injectivity_radius():
    q = CyclicQuotient.hyperbolic(MobiusDisc.identity(), 1.0)
    p = SurfacePointRep(q, 1j * math.tanh(0.5))
    expected = math.asinh(math.cosh(1.0) * math.sinh(0.5))
    assert injectivity_radius(p) == pytest.approx(expected, abs=1e-10)
    assert expected == pytest.approx(0.7414, abs=1e-4)
    assert injectivity_radius(SurfacePointRep(q, 0j)) == pytest.approx(0.5, abs=1e-12)
