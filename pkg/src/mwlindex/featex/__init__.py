"""Time-series feature catalog and extraction."""

from .catalog import DOMAINS, FeatureCatalog, FeatureDef, full_catalog
from .extract import ExtractionReport, FeatureVector, extract_all, extract_features

__all__ = ["DOMAINS", "FeatureCatalog", "FeatureDef", "full_catalog", "ExtractionReport",
           "FeatureVector", "extract_all", "extract_features"]
