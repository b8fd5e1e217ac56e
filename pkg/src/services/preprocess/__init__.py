"""
Preprocessing services: length normalization and LDA.
"""

from .lda import (
    LdaTransform,
    ScatterStats,
    apply_transform,
    compute_scatter,
    fit_lda,
    length_normalize,
    length_normalize_rows,
    length_normalize_set,
)

__all__ = [
    "LdaTransform",
    "ScatterStats",
    "apply_transform",
    "compute_scatter",
    "fit_lda",
    "length_normalize",
    "length_normalize_rows",
    "length_normalize_set",
]
