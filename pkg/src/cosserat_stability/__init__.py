__version__ = "0.0.1"

from .config import AnalysisSettings, resolve_settings
from .tensor_core import (
    CauchyTensor,
    CosseratTensor,
    isotropic_cauchy,
    isotropic_cosserat,
    orthotropic_cosserat,
)
from .stability import full_report
from .antiplane import AntiplaneMaterial, antiplane_conditions, classify
from .material_io import load_material, save_material

__all__ = (
    "AnalysisSettings",
    "resolve_settings",
    "CauchyTensor",
    "CosseratTensor",
    "isotropic_cauchy",
    "isotropic_cosserat",
    "orthotropic_cosserat",
    "full_report",
    "AntiplaneMaterial",
    "antiplane_conditions",
    "classify",
    "load_material",
    "save_material",
)
