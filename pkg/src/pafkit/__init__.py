"""Tabular binary-classification toolkit for social-program derivation data.

Ingests schema-typed CSV corpora of derivation cases, splits them into the
children (BD1) and pregnant-women (BD2) segments, engineers numeric feature
matrices, corrects class imbalance, trains a family of from-scratch
classifiers and ensembles, and evaluates them with threshold sweeps and ROC
analysis. A config-driven command line drives full experiments and renders
reports.
"""

__version__ = "0.1.0"

from .errors import DataQualityWarning, PafkitError

__all__ = ["DataQualityWarning", "PafkitError", "__version__"]
