# hypdyn/services/experiment_service.py
import logging
from typing import List, Optional

from sqlalchemy.exc import SQLAlchemyError

from hypdyn.config.settings import StoreConfig
from hypdyn.models.experiment_run import ExperimentRunModel
from hypdyn.orm_client import ORMClient
from hypdyn.schemas.run import ExperimentRun, ExperimentRunCreate

logger = logging.getLogger(__name__)


class ExperimentService:
    """
    Запись и чтение запусков CLI. Ошибки хранилища логируются и не роняют запуск.
    """

    def __init__(self, config: Optional[StoreConfig] = None, create_schema_on_init: bool = True,
                 client: Optional[ORMClient] = None):
        self.config = config or StoreConfig.from_env()
        self._engine = (client or ORMClient(self.config)).engine
        if create_schema_on_init:
            try:
                self._client().create_all_tables()
            except SQLAlchemyError as e:
                logger.error(f"Run store is unavailable at {self.config.url}: {e}")
        logger.debug("ExperimentService initialized for %s", self.config.url)

    def _client(self) -> ORMClient:
        return ORMClient(self.config, engine=self._engine)

    def record_run(self, run: ExperimentRunCreate) -> Optional[ExperimentRun]:
        try:
            with self._client() as db:
                orm_run = ExperimentRunModel(**run.model_dump())
                db.add(orm_run)
                db.flush()
                logger.info(f"Run recorded: id={orm_run.id}, command={orm_run.command}, tower={orm_run.tower_name}")
                return ExperimentRun.model_validate(orm_run)
        except SQLAlchemyError as e:
            logger.error(f"Failed to record run for '{run.tower_name}': {e}", exc_info=True)
            return None

    def get_run(self, run_id: int) -> Optional[ExperimentRun]:
        try:
            with self._client() as db:
                orm_run = db.get(ExperimentRunModel, run_id)
                return ExperimentRun.model_validate(orm_run) if orm_run else None
        except SQLAlchemyError as e:
            logger.error(f"Failed to read run {run_id}: {e}", exc_info=True)
            return None

    def list_runs(self, tower_name: Optional[str] = None, limit: int = 20) -> List[ExperimentRun]:
        try:
            with self._client() as db:
                query = db.query(ExperimentRunModel)
                if tower_name:
                    query = query.filter(ExperimentRunModel.tower_name == tower_name)
                rows = query.order_by(ExperimentRunModel.id.desc()).limit(limit).all()
                return [ExperimentRun.model_validate(r) for r in rows]
        except SQLAlchemyError as e:
            logger.error(f"Failed to list runs: {e}", exc_info=True)
            return []
