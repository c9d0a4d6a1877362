# tests/test_classify.py
import cmath
import math

import numpy as np
import pytest

from hypdyn.classify.annuli import absorbing_annuli
from hypdyn.classify.foliation import foliation_extract
from hypdyn.classify.limits import DEFECT_TOL, HYPERBOLIC_AXIS, geometric_limit
from hypdyn.classify.modality import (
    EVENTUALLY_CONSTANT,
    POSITIVE_NOT_ATTAINED,
    TO_ZERO,
    bracket_label,
    contraction_deadline,
    is_e_pair,
    pair_modality,
)
from hypdyn.classify.table import CONNECTIVITY_NOTE, main_type, modality_discrepancies, table_row
from hypdyn.classify.thinness import INCONCLUSIVE as THIN_INCONCLUSIVE
from hypdyn.classify.thinness import THICK, THIN, classify_deltas, thinness
from hypdyn.classify.trichotomy import (
    CONTRACTING,
    EVENTUALLY_ISOMETRIC,
    INCONCLUSIVE,
    SEMI_CONTRACTING,
    classify_lambdas,
    infinitesimal_type,
)
from hypdyn.errors import PreconditionError, SequenceDataError
from hypdyn.schemas.tower import parse_tower

H = 64


# --- трихотомия -------------------------------------------------------------

def test_constant_contraction_is_contracting(tol):
    v = classify_lambdas(np.full(H, 0.5), tol)
    assert v.type == CONTRACTING


def test_summable_defects_are_semi_contracting(tol):
    n = np.arange(1, H + 1)
    v = classify_lambdas(1.0 - 4.0 ** (-n), tol)
    assert v.type == SEMI_CONTRACTING
    assert v.partial_sum == pytest.approx(1.0 / 3.0, abs=1e-9)


def test_declared_coverings_give_exact_verdict(tol):
    lams = np.concatenate([np.full(8, 0.9), np.ones(H - 8)])
    v = classify_lambdas(lams, tol, exact_from=8)
    assert v.type == EVENTUALLY_ISOMETRIC
    assert v.exact
    assert v.isometric_from == 9


def test_short_horizon_is_inconclusive(tol):
    assert classify_lambdas(np.full(4, 0.9), tol).type == INCONCLUSIVE


def test_fixture_towers_trichotomy(tower, tol, settings):
    assert infinitesimal_type(tower("scaling_half"), tol=tol, settings=settings).type == CONTRACTING
    semi = infinitesimal_type(tower("scaling_semi"), tol=tol, settings=settings)
    assert semi.type == SEMI_CONTRACTING
    assert semi.partial_sum == pytest.approx(1.0 / 3.0, abs=1e-9)
    switched = infinitesimal_type(tower("rotation_after_n"), tol=tol, settings=settings)
    assert switched.type == EVENTUALLY_ISOMETRIC and switched.exact


def test_rounded_unit_factors_are_not_declared_coverings(tower, tol, settings):
    spec = tower("scaling_semi")
    assert spec.covering_tail_start() is None
    semi = infinitesimal_type(spec, tol=tol, settings=settings)
    assert not semi.exact
    assert semi.isometric_from is None


def test_verdict_does_not_depend_on_the_sample_point(tower, tol, settings, rng):
    for name in ("scaling_half", "scaling_semi", "rotation", "power_annulus"):
        spec = tower(name)
        expected = infinitesimal_type(spec, tol=tol, settings=settings).type
        s0 = spec.surface_at(0)
        for _ in range(5):
            r = math.exp(-math.pi * rng.uniform(0.5, 1.5)) if name == "power_annulus" else 0.7 * rng.uniform()
            p = r * cmath.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
            assert s0.contains(p)
            assert infinitesimal_type(spec, p, tol, settings).type == expected


# --- тонкость ---------------------------------------------------------------

def test_infinite_injectivity_is_thick(tol):
    assert classify_deltas(np.full(H + 1, math.inf), tol).verdict == THICK


def test_halving_injectivity_is_thin(tol):
    v = classify_deltas(0.3 * 0.5 ** np.arange(H + 1), tol)
    assert v.verdict == THIN


def test_single_level_is_inconclusive(tol):
    assert classify_deltas(np.array([0.1]), tol).verdict == THIN_INCONCLUSIVE


def test_power_annulus_is_thin(tower, tol, settings):
    v = thinness(tower("power_annulus"), tol=tol, settings=settings, check_monotone=True)
    assert v.verdict == THIN
    assert v.monotone_tail
    assert v.second_point_agrees


# --- модальность ------------------------------------------------------------

def test_pair_labels(tol):
    n = np.arange(H + 1)
    assert pair_modality(2.0 ** (-n), tol).label == TO_ZERO
    assert pair_modality(1.0 + 2.0 ** (-n), tol).label == POSITIVE_NOT_ATTAINED
    settled = np.concatenate([[2.0, 1.5], np.ones(H - 1)])
    label = pair_modality(settled, tol)
    assert label.label == EVENTUALLY_CONSTANT
    assert label.settled_from == 2
    assert label.limit == 1.0


def test_increasing_distances_are_rejected(tol):
    with pytest.raises(SequenceDataError):
        pair_modality([1.0, 2.0, 3.0], tol)


def test_coinciding_images_form_the_exceptional_set(tol):
    seq = [1.0, 0.5, 0.0, 0.0]
    assert is_e_pair(seq, tol)
    assert pair_modality(seq, tol).in_e


def test_contraction_deadline(tol):
    assert contraction_deadline(1.0, 0.5, tol) == math.ceil(math.log(1e6) / 0.5) + 2
    assert contraction_deadline(1e-9, 0.5, tol) == 0
    with pytest.raises(ValueError):
        contraction_deadline(1.0, 1.5, tol)


def test_bracket_labels(tol):
    lo = np.full(9, 0.01)
    hi = np.full(9, 0.012)
    inj = np.full(9, 0.05)
    assert bracket_label(lo, hi, inj, tol).label == EVENTUALLY_CONSTANT
    lo = np.linspace(2.0, 1.0, 9)
    hi = lo + 0.01
    assert bracket_label(lo, hi, np.full(9, 0.001), tol).label == POSITIVE_NOT_ATTAINED
    flat = np.full(9, 1.0)
    assert bracket_label(flat, flat + 0.5, np.full(9, 0.001), tol) is None


# --- таблица шести типов ------------------------------------------------------

def test_table_rows():
    assert table_row(CONTRACTING, THIN_INCONCLUSIVE, set()) == 1
    assert table_row(SEMI_CONTRACTING, THICK, set()) == 2
    assert table_row(SEMI_CONTRACTING, THIN, set()) == 3
    assert table_row(EVENTUALLY_ISOMETRIC, THICK, {EVENTUALLY_CONSTANT}) == 4
    assert table_row(EVENTUALLY_ISOMETRIC, THICK, {EVENTUALLY_CONSTANT, POSITIVE_NOT_ATTAINED}) == 5
    assert table_row(EVENTUALLY_ISOMETRIC, THIN, set()) == 6
    assert table_row(EVENTUALLY_ISOMETRIC, THIN_INCONCLUSIVE, set()) is None


def test_discrepancies():
    assert modality_discrepancies(6, {TO_ZERO, POSITIVE_NOT_ATTAINED, EVENTUALLY_CONSTANT}) == []
    assert modality_discrepancies(1, {TO_ZERO, EVENTUALLY_CONSTANT})
    assert len(modality_discrepancies(5, {EVENTUALLY_CONSTANT})) == 1


@pytest.mark.parametrize("name, row", [
    ("scaling_half", 1),
    ("scaling_semi", 2),
    ("thin_semi", 3),
    ("rotation", 4),
    ("rotation_after_n", 4),
    ("power_annulus", 6),
])
def test_shipped_towers_main_type(tower, tol, settings, name, row):
    verdict = main_type(tower(name), tol, settings)
    assert verdict.row == row
    assert verdict.discrepancies == []
    assert CONNECTIVITY_NOTE in verdict.notes


def test_power_annulus_is_trimodal(tower, tol, settings):
    verdict = main_type(tower("power_annulus"), tol, settings)
    assert verdict.modality.aggregate == "trimodal"
    tracked = {r.label.label for r in verdict.modality.records if r.source == "tracked"}
    assert tracked == {TO_ZERO, EVENTUALLY_CONSTANT}


def test_thin_semi_is_bimodal(tower, tol, settings):
    verdict = main_type(tower("thin_semi"), tol, settings)
    assert set(verdict.modality.labels) == {TO_ZERO, POSITIVE_NOT_ATTAINED}


def test_rotation_pairs_are_eventually_constant(tower, tol, settings):
    verdict = main_type(tower("rotation"), tol, settings)
    assert verdict.modality.labels == [EVENTUALLY_CONSTANT]
    assert verdict.modality.aggregate == "unimodal"


# --- поглощающие кольца, пределы, слоения -----------------------------------

CYCLIC_HALVING = """
{"name": "cyclic_halving", "horizon": 20,
 "surface": {"kind": "cyclic_quotient", "lengths": {"schedule": "geometric", "start": 1.0, "ratio": 0.5}},
 "map": {"family": "mobius"}, "base_point": [0, 0]}
"""


def test_absorbing_annuli_on_power_annulus(tower, tol, settings):
    result = absorbing_annuli(tower("power_annulus", 20), 0.1, tol, settings)
    assert result.first_level is not None
    assert result.forward_invariant
    assert result.moduli_increasing
    assert all(p.stays for p in result.points)


def test_absorbing_annuli_need_thin_towers(tower, tol, settings):
    with pytest.raises(PreconditionError):
        absorbing_annuli(tower("scaling_half"), 0.1, tol, settings)


def test_shrinking_translations_have_an_axis_limit(settings):
    limit = geometric_limit(parse_tower(CYCLIC_HALVING), settings)
    assert limit.kind == HYPERBOLIC_AXIS
    assert limit.defects[-1] < DEFECT_TOL
    assert limit.commutation_defect < 1e-8
    assert limit.additivity_defect < 1e-8


def test_disc_levels_have_no_limit(tower, settings):
    with pytest.raises(PreconditionError):
        geometric_limit(tower("rotation"), settings)


def test_foliations_of_power_annulus(tower, tol, settings):
    descriptors = foliation_extract(tower("power_annulus", 20), leaves=3, samples=32, tol=tol, settings=settings)
    kinds = [d.kind for d in descriptors]
    assert kinds == ["contracting", "eventually_isometric"]
    assert all(len(d.leaves) == 3 for d in descriptors)
    assert all(d.passed for d in descriptors)


def test_contracting_leaves_are_judged_by_decay(tower, tol, settings):
    contracting, _ = foliation_extract(tower("power_annulus", 20), leaves=3, samples=32, tol=tol, settings=settings)
    # на горизонте 20 расстояния ещё порядка 1e-6, но убывают вдвое за уровень
    assert max(c.final for c in contracting.checks) > tol.zero
    assert all(c.label == "to_zero" and c.ok for c in contracting.checks)


def test_no_foliation_for_contracting_towers(tower, tol, settings):
    with pytest.raises(PreconditionError, match="contracting tower"):
        foliation_extract(tower("scaling_half"), tol=tol, settings=settings)
