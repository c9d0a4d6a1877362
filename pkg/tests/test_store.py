# tests/test_store.py
import pytest

from hypdyn.config.settings import StoreConfig
from hypdyn.orm_client import ORMClient
from hypdyn.schemas.run import ExperimentRunCreate
from hypdyn.services.experiment_service import ExperimentService


@pytest.fixture
def service():
    return ExperimentService(StoreConfig(url="sqlite://", enabled=True))


def _run(tower: str, row: int = 1, **extra) -> ExperimentRunCreate:
    return ExperimentRunCreate(command="classify", tower_name=tower, horizon=64, row=row,
                               infinitesimal="contracting", exit_code=0, report={"rows": [row]}, **extra)


def test_record_and_get(service):
    saved = service.record_run(_run("scaling_half", spec_hash="ab" * 32))
    assert saved is not None and saved.id
    loaded = service.get_run(saved.id)
    assert loaded.tower_name == "scaling_half"
    assert loaded.report == {"rows": [1]}
    assert loaded.spec_hash == "ab" * 32
    assert loaded.created_at is not None


def test_list_filters_and_orders(service):
    for tower, row in [("a", 1), ("b", 2), ("a", 4)]:
        service.record_run(_run(tower, row))
    runs = service.list_runs("a")
    assert [r.row for r in runs] == [4, 1]
    assert len(service.list_runs(limit=2)) == 2


def test_missing_run(service):
    assert service.get_run(12345) is None


def test_store_tables():
    client = ORMClient(StoreConfig(url="sqlite://"))
    client.create_all_tables()
    with client as db:
        assert "hypdyn_runs" in db.get_table_names_raw()


def test_row_is_validated():
    with pytest.raises(ValueError):
        _run("x", row=7)
