"""Toric Landau-Ginzburg models: critical points, monodromy weights and exceptional collections."""

from .toric_core import CATALOG_NAMES, DEL_PEZZO, ToricSurfaceData, build_variety

__all__ = ["CATALOG_NAMES", "DEL_PEZZO", "ToricSurfaceData", "build_variety"]
__version__ = "0.1.0"
