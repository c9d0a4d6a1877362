# hypdyn/models/experiment_run.py

from datetime import datetime

from sqlalchemy import JSON, Column, DateTime, Integer, String, func

from .base import Base


class ExperimentRunModel(Base):
    """
    SQLAlchemy модель таблицы 'hypdyn_runs': один запуск CLI и его вердикт.
    """
    __tablename__ = 'hypdyn_runs'

    id = Column(Integer, primary_key=True, index=True)
    created_at = Column(DateTime, nullable=False, default=datetime.now, server_default=func.now())
    command = Column(String(32), nullable=False)
    tower_name = Column(String(255), index=True)
    spec_hash = Column(String(64))  # SHA-256 текста файла башни
    horizon = Column(Integer)
    row = Column(Integer)
    infinitesimal = Column(String(32))
    thinness = Column(String(32))
    modality = Column(String(32))
    exit_code = Column(Integer, nullable=False, default=0)
    report = Column(JSON, nullable=False, default=dict)

    def __repr__(self):
        return f"<ExperimentRunModel(id={self.id}, command='{self.command}', tower='{self.tower_name}', row={self.row})>"
