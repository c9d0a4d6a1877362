# tests/test_schemas.py
import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from hypdyn.errors import TowerSpecError
from hypdyn.schemas import ExperimentConfig, RegionTable, Report, parse_tower
from hypdyn.schemas.tower import TowerFile, shipped_towers
from hypdyn.tower.spec import Geometric, OneMinusPower
from hypdyn.utils.report_writer import dumps, spec_hash, to_jsonable

SCALING = {
    "name": "scaling_half",
    "horizon": 16,
    "surface": {"kind": "disc"},
    "map": {"family": "scaling", "params": {"c": 0.5}},
    "base_point": [0.0, 0.0],
}


def test_minimal_tower():
    t = parse_tower(json.dumps(SCALING))
    assert t.name == "scaling_half"
    assert t.horizon == 16
    assert t.base_point == 0j
    assert t.map_at(3)(0.2 + 0j) == pytest.approx(0.1 + 0j)


def test_schedules_are_parsed():
    raw = dict(SCALING, map={"family": "scaling", "params": {"c": {"schedule": "one_minus_power", "base": 4}}})
    t = parse_tower(json.dumps(raw))
    assert t.map_at(0).c == pytest.approx(0.75)
    assert OneMinusPower(4.0)(1) == pytest.approx(1.0 - 4.0 ** -2)
    assert Geometric(1.0, 0.5)(3) == pytest.approx(0.125)


def test_bad_json_reports_line_and_column():
    with pytest.raises(TowerSpecError) as info:
        parse_tower('{\n  "name": "x",\n  "horizon": ,\n}', "broken.json")
    assert info.value.position == "line 3, column 14"
    assert "broken.json" in str(info.value)


def test_validation_error_reports_json_path():
    raw = dict(SCALING, surface={"kind": "round_annulus", "log_inner": -1.0})
    with pytest.raises(TowerSpecError) as info:
        parse_tower(json.dumps(raw))
    assert info.value.position.startswith("surface")
    assert "log_inner" in info.value.position


def test_unknown_family_is_rejected():
    raw = dict(SCALING, map={"family": "cubic"})
    with pytest.raises(TowerSpecError) as info:
        parse_tower(json.dumps(raw))
    assert info.value.position.startswith("map")


def test_map_is_required():
    raw = {k: v for k, v in SCALING.items() if k != "map"}
    with pytest.raises(TowerSpecError) as info:
        parse_tower(json.dumps(raw))
    assert info.value.position == "map"


def test_bad_map_parameters():
    raw = dict(SCALING, map={"family": "scaling", "params": {"radius": 0.5}})
    with pytest.raises(TowerSpecError) as info:
        parse_tower(json.dumps(raw))
    assert info.value.position == "map.params"


def test_annulus_core_needs_an_annulus():
    raw = dict(SCALING, base_point="annulus_core")
    with pytest.raises(TowerSpecError) as info:
        parse_tower(json.dumps(raw))
    assert info.value.position == "base_point"


def test_annulus_core_base_point():
    t = parse_tower(json.dumps({
        "name": "a", "surface": {"kind": "round_annulus", "log_inner": 2 * math.pi, "growth": 2},
        "map": {"family": "power", "params": {"degree": 2}}, "base_point": "annulus_core",
    }))
    assert abs(t.base_point) == pytest.approx(math.exp(-math.pi))


def test_shipped_towers_parse():
    paths = shipped_towers()
    names = {p.stem for p in paths}
    assert {"scaling_half", "scaling_semi", "thin_semi", "rotation", "rotation_after_n", "power_annulus",
            "blaschke_model"} <= names
    for path in paths:
        raw = json.loads(path.read_text(encoding="utf-8"))
        TowerFile.model_validate(raw)


def test_tower_example_validates():
    example = TowerFile.model_config["json_schema_extra"]["example"]
    assert TowerFile.model_validate(example).name == "power_annulus"


def test_experiment_config_tolerance_order():
    cfg = ExperimentConfig(command="classify", tolerances={"zero": 1e-5})
    assert cfg.effective_tolerances().zero == 1e-5
    with pytest.raises(ValidationError):
        ExperimentConfig(command="classify", tolerances={"zero": 1e-10})
    with pytest.raises(ValidationError):
        ExperimentConfig(command="classify", tolerances={"margulis": 0.1})


def test_experiment_config_fields():
    with pytest.raises(ValidationError):
        ExperimentConfig(command="trace", emit={"png"})
    with pytest.raises(ValidationError):
        ExperimentConfig(command="trace", horizon=-1)
    with pytest.raises(ValidationError):
        ExperimentConfig(command="simulate")


def test_tolerance_environment(monkeypatch):
    monkeypatch.setenv("HYPDYN_TOL_THIN", "0.3")
    assert ExperimentConfig(command="classify").effective_tolerances().thin == 0.3


def test_report_envelope():
    report = Report(command="trace", tower="t", result=to_jsonable({"z": 1 + 2j, "x": math.inf}))
    data = report.as_dict()
    assert data["schema"] == "hypdyn/1"
    assert data["result"]["z"] == [1.0, 2.0]
    text = dumps(data)
    assert '"x": null' in text
    assert json.loads(text)["result"]["x"] is None


def test_non_finite_values_become_null():
    text = dumps({"lam": np.array([np.nan, 0.5]), "z": complex(math.inf, 1.0)})
    assert "NaN" not in text and "Infinity" not in text
    assert json.loads(text) == {"lam": [None, 0.5], "z": [None, 1.0]}


def test_region_table(blaschke_state):
    table = RegionTable.model_validate(blaschke_state.as_dict())
    assert table.levels[0].r == 0.5
    assert len(table.regions) == len(list(blaschke_state.cells()))
    bad = blaschke_state.as_dict()
    bad["levels"] = bad["levels"][:2][::-1]
    with pytest.raises(ValidationError):
        RegionTable.model_validate(bad)


def test_spec_hash_follows_file_text(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    a.write_text(json.dumps(SCALING), encoding="utf-8")
    b.write_text(json.dumps(SCALING), encoding="utf-8")
    assert spec_hash(a) == spec_hash(b)
    assert len(spec_hash(a)) == 64
    b.write_text(json.dumps(SCALING, indent=2), encoding="utf-8")
    assert spec_hash(a) != spec_hash(b)
