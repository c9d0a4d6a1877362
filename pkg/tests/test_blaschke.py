# tests/test_blaschke.py
import math

import numpy as np
import pytest

from hypdyn.blaschke.model import (
    build_model_tower,
    choose_parameter,
    local_isometry_bracket,
    model_tower_spec,
    parameter_candidates,
    point_in_U,
    translate_tower,
    verify_model_invariants,
)
from hypdyn.blaschke.product import BlaschkeDeg2, preimage_points
from hypdyn.blaschke.regions import (
    RegionSet,
    circle_polyline,
    close,
    disc_component,
    is_simple,
    region_preimage,
    region_pushforward,
    winding_number,
)
from hypdyn.config.settings import BlaschkeSettings
from hypdyn.errors import ConfigurationError, DomainError, InjectivityError


# --- произведение -------------------------------------------------------------

@pytest.mark.parametrize("a", [0.1, 0.5, 0.8125, 0.96875])
def test_critical_point_and_value(a):
    b = BlaschkeDeg2(a)
    c = b.critical_point
    assert -1.0 < c < 0.0
    assert abs(b.derivative(c)) < 1e-12
    assert b(c) == pytest.approx(b.critical_value, abs=1e-15)


@pytest.mark.parametrize("a", [0.0, 1.0, -0.3])
def test_parameter_outside_unit_interval(a):
    with pytest.raises(DomainError):
        BlaschkeDeg2(a)


def test_preimages_and_sibling(rng):
    b = BlaschkeDeg2(0.8125)
    w = 0.9 * np.sqrt(rng.random(200)) * np.exp(2j * math.pi * rng.random(200))
    z1, z2 = b.preimages(w)
    assert np.allclose(b(z1), w, atol=1e-12)
    assert np.allclose(b(z2), w, atol=1e-12)
    z = 0.5 * w
    assert np.allclose(b(b.sibling(z)), b(z), atol=1e-12)


def test_double_preimage_at_critical_value():
    b = BlaschkeDeg2(0.5)
    c = b.critical_point
    assert preimage_points(b, b.critical_value) == [complex(c), complex(c)]


def test_dyadic_parameter_choice():
    a = choose_parameter(0.501)
    assert a == 0.8125
    assert abs(BlaschkeDeg2(a).critical_point) > 0.501
    assert abs(BlaschkeDeg2(a - 1.0 / 16.0).critical_point) <= 0.501
    with pytest.raises(ConfigurationError):
        choose_parameter(1.0)


def test_parameter_candidates_walk_the_same_grid():
    assert list(parameter_candidates(0.501, limit=3)) == [0.8125, 0.875, 0.9375]
    assert list(parameter_candidates(0.501)) == [0.8125, 0.875, 0.9375]


# --- ломаные и области --------------------------------------------------------

def test_winding_number_of_circle():
    circle = close(circle_polyline(0.1j, 0.3, 256))
    assert winding_number(circle, 0.1j) == 1
    assert winding_number(circle, 0.5 + 0j) == 0
    assert list(winding_number(circle, np.array([0.0, 0.9]))) == [1, 0]
    assert winding_number(circle[::-1], 0.1j) == -1


def test_simple_curves():
    assert is_simple(close(circle_polyline(0j, 1.0, 64)))
    t = np.linspace(0.0, 2.0 * math.pi, 200, endpoint=False) + 0.013
    eight = np.sin(t) + 1j * np.sin(t) * np.cos(t)
    assert not is_simple(close(eight))


@pytest.fixture
def blaschke_settings():
    return BlaschkeSettings()


def test_region_queries(blaschke_settings):
    R = RegionSet([disc_component(0.5, 0.1, 0, blaschke_settings)])
    assert R.contains(0.55 + 0j)
    assert not R.contains(0j)
    assert R.component_of(0.5 + 0.05j) == 0
    assert R.boundary_distance(0.5 + 0j) == pytest.approx(0.1, rel=1e-3)


def test_pushforward_needs_injectivity(blaschke_settings):
    b = BlaschkeDeg2(0.5)
    far = RegionSet([disc_component(-0.3, 0.1, 0, blaschke_settings)])
    with pytest.raises(InjectivityError):
        region_pushforward(b, far, settings=blaschke_settings)
    near = RegionSet([disc_component(0.1, 0.05, 0, blaschke_settings)])
    image = region_pushforward(b, near, settings=blaschke_settings)
    assert len(image) == 1
    assert image.contains(b(0.1 + 0j))
    assert image.k == near.k + 1


def test_preimage_of_disc_around_critical_value(blaschke_settings):
    b = BlaschkeDeg2(0.5)
    R = RegionSet([disc_component(b.critical_value, 0.01, 0, blaschke_settings)], k=1)
    pre = region_preimage(b, R, blaschke_settings)
    assert len(pre) == 1
    assert pre.contains(complex(b.critical_point))


def test_preimage_of_disc_away_from_critical_value(blaschke_settings):
    b = BlaschkeDeg2(0.5)
    R = RegionSet([disc_component(0.4 + 0.2j, 0.05, 0, blaschke_settings)], k=1)
    pre = region_preimage(b, R, blaschke_settings)
    assert len(pre) == 2
    for comp in pre:
        assert R.contains(b(comp.inside))
        assert is_simple(comp.points)


# --- модель -------------------------------------------------------------------

def test_first_level_parameters(blaschke_state):
    first = blaschke_state.levels[0]
    assert first.r == 0.5
    # при a = 0.8125 критическое значение ближе к b(∂D(0, ½)), чем шаг выборки
    assert first.a == 0.875
    assert first.critical_point == pytest.approx(-0.58957, abs=1e-5)
    assert first.clearance[0] > 0.0
    assert first.eps == pytest.approx(0.5 * min(first.clearance))
    assert any("a = 0.8125 leaves no clearance" in line for line in blaschke_state.log)


def test_model_builds_all_levels(blaschke_state):
    assert blaschke_state.built == 6
    assert blaschke_state.stopped is None
    radii = [p.r for p in blaschke_state.levels]
    assert all(x < y < 1.0 for x, y in zip(radii, radii[1:]))
    assert len(list(blaschke_state.cells())) == sum(n + 2 for n in range(7))


def test_region_table_lookup(blaschke_state):
    R = blaschke_state.region(1, 0)
    assert R.contains(complex(blaschke_state.levels[0].critical_value))
    with pytest.raises(DomainError):
        blaschke_state.region(0, 7)


def test_zero_lies_in_every_domain(blaschke_state):
    for n in range(blaschke_state.built + 2):
        assert point_in_U(blaschke_state, n, 0j, blaschke_state.built)
    assert not point_in_U(blaschke_state, 0, complex(blaschke_state.levels[0].critical_point), 0)


@pytest.mark.slow
def test_model_invariants(blaschke_state):
    report = verify_model_invariants(blaschke_state, targets=50)
    assert report.passed, [c.as_dict() for c in report.failures]
    assert set(report.summary()) >= {"disjoint", "simple_closed", "covering_degree", "quadratic_residual"}


def test_isometry_brackets_contain_one(blaschke_state):
    h = blaschke_state.built
    for n in range(3):
        for truncation in range(n, h + 1):
            bracket = local_isometry_bracket(blaschke_state, n, 0j, truncation)
            assert bracket.contains(1.0)
            assert 0.0 <= bracket.width < math.inf


def test_bracket_needs_a_deep_enough_truncation(blaschke_state):
    with pytest.raises(DomainError):
        local_isometry_bracket(blaschke_state, 3, 0j, truncation=2)


@pytest.mark.parametrize("levels", [-1, 9])
def test_levels_outside_the_cap(levels):
    with pytest.raises(ConfigurationError):
        build_model_tower(levels, BlaschkeSettings())


def test_single_level_model():
    state = build_model_tower(0, BlaschkeSettings())
    assert state.built == 0
    assert set(state.cells()) == {(0, 0), (1, 0)}
    assert len(state.region(1, 0)) == 1
    assert len(state.region(0, 0)) == 1


def test_translated_tower(blaschke_state):
    translated = translate_tower(blaschke_state)
    assert len(translated.levels) == blaschke_state.built + 2
    assert translated.levels[2].offset == 8.0
    z = 0.01 + 0.02j
    w = translated.f(1, z + 4.0)
    assert w - 8.0 == pytest.approx(complex(blaschke_state.product(1)(z)))
    assert translated.in_compact(1, 4.0 + 0j)
    assert translated.as_dict()["kind"] == "translated_tower"


def test_model_tower_spec(blaschke_state):
    spec = model_tower_spec(blaschke_state)
    assert spec.horizon == blaschke_state.built + 1
    assert spec.expected_row == 5
    assert spec.tracked_pairs[0] == (0j, 0.02 + 0j)
    assert spec.surface_at(0).contains(0j)
    b0 = blaschke_state.product(0)
    assert spec.map_at(0)(0.1 + 0j) == pytest.approx(complex(b0(0.1 + 0j)))


@pytest.mark.slow
def test_model_is_row_five(blaschke_state, tol):
    from hypdyn.classify.table import main_type
    from hypdyn.config.settings import TraceSettings

    verdict = main_type(model_tower_spec(blaschke_state), tol, TraceSettings(modality_samples=0))
    assert verdict.row == 5
    assert verdict.discrepancies == []


def test_brackets_narrow_with_truncation(blaschke_state):
    widths = [local_isometry_bracket(blaschke_state, 0, 0j, h).width for h in range(blaschke_state.built + 1)]
    assert all(b <= a * (1.0 + 1e-9) for a, b in zip(widths, widths[1:]))
