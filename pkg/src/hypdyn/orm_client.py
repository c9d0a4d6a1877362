# hypdyn/orm_client.py
from __future__ import annotations

import logging
from contextlib import AbstractContextManager
from typing import Any, Iterable, List, Optional, Type

from sqlalchemy import create_engine, inspect
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import Session, sessionmaker
from sqlalchemy.pool import StaticPool

from hypdyn.config.settings import StoreConfig
from hypdyn.models.base import Base

logger = logging.getLogger(__name__)

_NO_SESSION = "ORMClient session is not active. Use 'with ORMClient() as db:'"


class ORMClient(AbstractContextManager):
    """
    Контекстный менеджер сессий SQLAlchemy для хранилища запусков.
    Схема создаётся явно через create_all_tables().
    """

    def __init__(self, config: Optional[StoreConfig] = None, engine: Any = None):
        self.config = config or StoreConfig.from_env()
        self.engine = engine or self._make_engine(self.config.url)
        self._SessionFactory = sessionmaker(
            bind=self.engine,
            autoflush=False,
            autocommit=False,
            expire_on_commit=False,
            future=True,
        )
        self.session: Optional[Session] = None
        logger.debug("ORMClient initialized for %s", self.config.url)

    @staticmethod
    def _make_engine(url: str):
        # in-memory SQLite живёт только в одном соединении
        if url in {"sqlite://", "sqlite:///:memory:"}:
            return create_engine(url, future=True, poolclass=StaticPool,
                                 connect_args={"check_same_thread": False})
        return create_engine(url, future=True)

    def create_all_tables(self) -> None:
        """Создает все таблицы, определенные в Base.metadata."""
        try:
            Base.metadata.create_all(self.engine)
            logger.debug("Run store schema checked/created.")
        except SQLAlchemyError as e:
            logger.critical(f"Failed to create run store schema: {e}", exc_info=True)
            raise

    def drop_all_tables(self) -> None:
        """Удаляет все таблицы хранилища. ДЕСТРУКТИВНО!"""
        try:
            logger.warning("Dropping all run store tables.")
            Base.metadata.drop_all(self.engine)
        except SQLAlchemyError as e:
            logger.critical(f"Failed to drop run store tables: {e}", exc_info=True)
            raise

    def __enter__(self) -> "ORMClient":
        self.session = self._SessionFactory()
        logger.debug("SQLAlchemy session opened.")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> bool:
        """
        Коммит при нормальном выходе, откат при исключении; сессия закрывается всегда.
        Возвращает False, чтобы исключение пробросилось дальше.
        """
        try:
            if exc_type:
                logger.error(f"Transaction rolled back due to an exception: {exc_val}")
                self.session.rollback()
            else:
                self.session.commit()
                logger.debug("Transaction committed successfully.")
        except SQLAlchemyError as e:
            logger.critical(f"Error during commit/rollback: {e}", exc_info=True)
            raise
        finally:
            self.session.close()
            self.session = None
            logger.debug("SQLAlchemy session closed.")
        return False

    def _require_session(self) -> Session:
        if not self.session:
            raise RuntimeError(_NO_SESSION)
        return self.session

    def add(self, instance: Base) -> Base:
        self._require_session().add(instance)
        return instance

    def add_all(self, instances: Iterable[Base]) -> None:
        self._require_session().add_all(instances)

    def get(self, model: Type[Base], pk: Any) -> Optional[Base]:
        return self._require_session().get(model, pk)

    def query(self, model: Type[Base]) -> Any:
        return self._require_session().query(model)

    def flush(self) -> None:
        self._require_session().flush()

    def get_table_names_raw(self) -> List[str]:
        """Имена таблиц в базе (через Inspector)."""
        return inspect(self.engine).get_table_names()
