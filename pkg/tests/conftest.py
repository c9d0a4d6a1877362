# tests/conftest.py
from pathlib import Path

import numpy as np
import pytest

from hypdyn.config.settings import BlaschkeSettings, Tolerances, TraceSettings
from hypdyn.schemas.tower import load_tower, shipped_towers

TOWERS_DIR = Path(__file__).resolve().parent.parent / "src" / "hypdyn" / "data" / "towers"


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    """Переменные HYPDYN_* из окружения разработчика не влияют на тесты."""
    import os

    for key in list(os.environ):
        if key.startswith("HYPDYN_"):
            monkeypatch.delenv(key, raising=False)
    monkeypatch.setenv("HYPDYN_DB_URL", f"sqlite:///{tmp_path / 'runs.sqlite3'}")


@pytest.fixture
def tol() -> Tolerances:
    return Tolerances()


@pytest.fixture
def settings() -> TraceSettings:
    return TraceSettings(horizon=64)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def tower():
    """Загрузчик поставляемых башен по имени файла без расширения."""
    def _load(name: str, horizon: int | None = None):
        spec = load_tower(TOWERS_DIR / f"{name}.json")
        return spec if horizon is None else spec.with_horizon(horizon)
    return _load


@pytest.fixture(scope="session")
def blaschke_state():
    """Модель Бляшке, уровни 0..6, строится один раз на сессию."""
    from hypdyn.blaschke.model import build_model_tower

    return build_model_tower(6, BlaschkeSettings())


@pytest.fixture(scope="session")
def shipped():
    return {p.stem: p for p in shipped_towers()}

