# tower/__init__.py
from .spec import TowerSpec
from .trace import OrbitTrace, iterate_trace, tower_validate
