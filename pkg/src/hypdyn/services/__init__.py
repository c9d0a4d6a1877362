# hypdyn/services/__init__.py
from .experiment_service import ExperimentService
