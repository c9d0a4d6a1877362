# hypdyn/models/__init__.py
from .base import Base
from .experiment_run import ExperimentRunModel
