# geometry/__init__.py
from .disc import DiscPoint, MobiusDisc, disc_density, disc_distance, mobius_classify
from .surfaces import CyclicQuotient, DiscSurface, RoundAnnulus, SurfaceModel, SurfacePointRep
