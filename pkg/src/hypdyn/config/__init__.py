from .settings import BlaschkeSettings, StoreConfig, Tolerances, TraceSettings, effective_settings

__all__ = ["Tolerances", "TraceSettings", "BlaschkeSettings", "StoreConfig", "effective_settings"]
