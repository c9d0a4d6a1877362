# schemas/__init__.py
from .report import ExperimentConfig, RegionTable, Report
from .run import ExperimentRun, ExperimentRunCreate
from .tower import TowerFile, load_tower, parse_tower
