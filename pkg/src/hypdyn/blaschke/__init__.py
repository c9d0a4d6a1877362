# blaschke/__init__.py
# model импортируется явно (hypdyn.blaschke.model): он зависит от hypdyn.tower
from .product import BlaschkeDeg2, blaschke_deriv, blaschke_eval, critical_data, preimage_points
from .regions import RegionSet, region_preimage, region_pushforward

__all__ = ["BlaschkeDeg2", "blaschke_eval", "blaschke_deriv", "critical_data", "preimage_points",
           "RegionSet", "region_pushforward", "region_preimage"]
