# schemas/run.py
from datetime import datetime
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field


class ExperimentRunCreate(BaseModel):
    """
    Pydantic модель для записи запуска в хранилище.
    """
    command: str = Field(..., min_length=1, max_length=32, description="Команда CLI")
    tower_name: Optional[str] = Field(None, max_length=255, description="Имя башни")
    spec_hash: Optional[str] = Field(None, max_length=64, description="SHA-256 файла башни")
    horizon: Optional[int] = Field(None, ge=0)
    row: Optional[int] = Field(None, ge=1, le=6, description="Строка таблицы шести типов")
    infinitesimal: Optional[str] = None
    thinness: Optional[str] = None
    modality: Optional[str] = None
    exit_code: int = Field(0, ge=0)
    report: Dict[str, Any] = Field(default_factory=dict, description="Полный JSON-отчёт")


class ExperimentRun(ExperimentRunCreate):
    """
    Pydantic модель записанного запуска (с ID).
    """
    id: int = Field(..., ge=1)
    created_at: datetime

    model_config = {
        "from_attributes": True,
        "json_schema_extra": {
            "example": {
                "id": 1,
                "created_at": "2024-06-11T12:00:00",
                "command": "classify",
                "tower_name": "power_annulus",
                "horizon": 64,
                "row": 6,
                "infinitesimal": "eventually_isometric",
                "thinness": "essentially_thin",
                "modality": "trimodal",
                "exit_code": 0,
            }
        },
    }
