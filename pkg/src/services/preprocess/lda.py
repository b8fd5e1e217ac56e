"""
Length normalization and LDA dimensionality reduction.
File: src/services/preprocess/lda.py
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from core.exceptions import ConfigError, InvariantError, NumericalError
from core.logging import get_logger
from services.corpus.models import LabeledVectorSet

logger = get_logger(__name__)

SW_RIDGE = 1e-6


@dataclass(frozen=True)
class LdaTransform:
    """Centering followed by a linear projection to out_dim coordinates."""

    mean: np.ndarray
    projection: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64, copy=True)
        projection = np.array(self.projection, dtype=np.float64, copy=True)
        if mean.ndim != 1 or projection.ndim != 2:
            raise InvariantError("LDA mean must be 1-d and projection 2-d")
        if projection.shape[1] != mean.shape[0]:
            raise InvariantError(
                f"Projection has {projection.shape[1]} columns, mean has {mean.shape[0]} entries"
            )
        if projection.shape[0] > projection.shape[1]:
            raise InvariantError(
                f"out_dim {projection.shape[0]} exceeds in_dim {projection.shape[1]}"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(projection))):
            raise InvariantError("LDA transform has non-finite entries")
        mean.setflags(write=False)
        projection.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "projection", projection)

    @property
    def in_dim(self) -> int:
        return self.projection.shape[1]

    @property
    def out_dim(self) -> int:
        return self.projection.shape[0]


@dataclass(frozen=True)
class ScatterStats:
    sw: np.ndarray
    sb: np.ndarray
    mu: np.ndarray
    class_means: np.ndarray


def compute_scatter(vectors: LabeledVectorSet) -> ScatterStats:
    """
    Compute unweighted within- and between-class scatter matrices.

    Sw sums outer products of vectors around their speaker mean; Sb sums
    outer products of speaker means around the mean of speaker means.

    Args:
        vectors: Training set with at least 2 speakers

    Returns:
        ScatterStats: Sw, Sb, the mean of class means and the class means

    Raises:
        ConfigError: If the set has fewer than 2 speakers
    """
    if vectors.n_speakers < 2:
        raise ConfigError(
            f"Scatter matrices need at least 2 speakers, got {vectors.n_speakers}"
        )
    class_means = np.array([group.mean for group in vectors.speakers])
    sw = np.zeros((vectors.dim, vectors.dim))
    for group, class_mean in zip(vectors.speakers, class_means):
        centered = group.vectors - class_mean
        sw += centered.T @ centered
    mu = class_means.mean(axis=0)
    between = class_means - mu
    sb = between.T @ between
    return ScatterStats(
        sw=(sw + sw.T) / 2.0,
        sb=(sb + sb.T) / 2.0,
        mu=mu,
        class_means=class_means
    )


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the first clearly nonzero coordinate of every column positive."""
    fixed = vectors.copy()
    for k in range(fixed.shape[1]):
        column = fixed[:, k]
        nonzero = np.flatnonzero(np.abs(column) > 1e-12 * np.linalg.norm(column))
        if nonzero.size and column[nonzero[0]] < 0:
            fixed[:, k] = -column
    return fixed


def fit_lda(vectors: LabeledVectorSet, out_dim: int) -> LdaTransform:
    """
    Fit an LDA projection maximizing det(V'SbV)/det(V'SwV).

    Rows are the top out_dim generalized eigenvectors of (Sb, Sw + ridge),
    ordered by decreasing eigenvalue, with the first nonzero coordinate
    of each row positive.

    Args:
        vectors: Training set
        out_dim: Output dimension, at most min(dim, speakers - 1)

    Returns:
        LdaTransform: Fitted transform (centering on the mean of class means)

    Raises:
        ConfigError: If out_dim is out of range
        NumericalError: If the regularized Sw is not positive definite
    """
    limit = min(vectors.dim, vectors.n_speakers - 1)
    if out_dim < 1 or out_dim > limit:
        raise ConfigError(
            f"LDA out_dim must be in [1, {limit}] for dim {vectors.dim} "
            f"and {vectors.n_speakers} speakers, got {out_dim}"
        )

    stats = compute_scatter(vectors)
    trace = float(np.trace(stats.sw))
    ridge = SW_RIDGE * trace / vectors.dim if trace > 0 else SW_RIDGE
    sw_reg = stats.sw + ridge * np.eye(vectors.dim)

    try:
        eigenvalues, eigenvectors = linalg.eigh(stats.sb, sw_reg)
    except linalg.LinAlgError as e:
        logger.error(f"LDA generalized eigensolve failed: {e}")
        raise NumericalError(f"Regularized within-class scatter is not positive definite: {e}") from e

    order = np.argsort(-eigenvalues, kind="stable")[:out_dim]
    projection = _fix_signs(eigenvectors[:, order]).T

    logger.info(
        f"Fitted LDA:\n"
        f"In dim: {vectors.dim}, out dim: {out_dim}, "
        f"leading eigenvalue: {eigenvalues[order[0]]:.6g}"
    )
    return LdaTransform(mean=stats.mu, projection=projection)


def length_normalize(x: np.ndarray) -> np.ndarray:
    """
    Scale a vector to unit Euclidean norm.

    Raises:
        InvariantError: If x is the zero vector
    """
    x = np.asarray(x, dtype=np.float64)
    norm = np.linalg.norm(x)
    if norm == 0.0:
        raise InvariantError("Cannot length-normalize a zero-norm vector")
    return x / norm


def length_normalize_rows(matrix: np.ndarray) -> np.ndarray:
    """Length-normalize every row of a matrix."""
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0.0):
        row = int(np.flatnonzero(norms == 0.0)[0])
        raise InvariantError(f"Cannot length-normalize a zero-norm vector (row {row})")
    return matrix / norms[:, np.newaxis]


def length_normalize_set(vectors: LabeledVectorSet) -> LabeledVectorSet:
    matrix, _ = vectors.stacked()
    return vectors.with_vectors(length_normalize_rows(matrix))


def project(transform: LdaTransform, matrix: np.ndarray, renormalize: bool) -> np.ndarray:
    """Apply a transform to the rows of a matrix."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape[-1] != transform.in_dim:
        raise InvariantError(
            f"Vectors have dimension {matrix.shape[-1]}, transform expects {transform.in_dim}"
        )
    projected = (matrix - transform.mean) @ transform.projection.T
    if renormalize:
        projected = length_normalize_rows(np.atleast_2d(projected)).reshape(projected.shape)
    return projected


def apply_transform(
    transform: LdaTransform,
    vectors: LabeledVectorSet,
    renormalize: bool
) -> LabeledVectorSet:
    """
    Map every vector to projection (x - mean), optionally length-normalized.

    Args:
        transform: Fitted LDA transform
        vectors: Set with dim == transform.in_dim
        renormalize: Length-normalize after projection

    Returns:
        LabeledVectorSet: Projected set with the same labels

    Raises:
        InvariantError: On a dimension mismatch
    """
    matrix, _ = vectors.stacked()
    return vectors.with_vectors(project(transform, matrix, renormalize))

