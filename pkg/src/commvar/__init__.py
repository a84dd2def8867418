"""Exact computations and reducibility certificates for nilpotent commuting varieties."""

from .exactfield import DEFAULT_PRIME, QQ, FieldSpec, Mat

__version__ = "0.1.0"

__all__ = ["DEFAULT_PRIME", "QQ", "FieldSpec", "Mat", "__version__"]
