# classify/__init__.py
from .annuli import AbsorbingAnnuli, absorbing_annuli
from .foliation import FoliationDescriptor, foliation_extract
from .limits import OneParameterLimit, geometric_limit
from .modality import ModalityVerdict, contraction_deadline, domain_modality, pair_modality
from .table import SixTypeVerdict, main_type
from .thinness import ThinnessVerdict, thinness
from .trichotomy import InfinitesimalVerdict, classify_lambdas, infinitesimal_type
