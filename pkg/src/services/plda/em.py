"""
E-step and M-step updates of sGPLDA training.
File: src/services/plda/em.py

Data are passed around as row matrices centered on the global mean, with
rows of one speaker contiguous and speakers in set order.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from core.exceptions import BracketError, InvariantError, SingularMatrixError
from core.logging import get_logger
from .models import DEFAULT_VARIANCE_FLOOR, PldaModel

logger = get_logger(__name__)

LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class FactorStats:
    """
    Centered vectors of every speaker with one factor estimate per speaker.

    covariances holds the posterior covariance of each factor when the
    update uses second moments; without it the factors act as point estimates.
    """

    centered: np.ndarray
    counts: np.ndarray
    factors: np.ndarray
    covariances: Optional[np.ndarray] = None

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if np.any(counts < 1):
            raise InvariantError("Every speaker needs at least one vector")
        if counts.sum() != self.centered.shape[0]:
            raise InvariantError(
                f"Counts sum to {counts.sum()}, got {self.centered.shape[0]} rows"
            )
        if self.factors.shape[0] != counts.shape[0]:
            raise InvariantError(
                f"{self.factors.shape[0]} factors for {counts.shape[0]} speakers"
            )
        if self.covariances is not None:
            rank = self.factors.shape[1]
            if self.covariances.shape != (counts.shape[0], rank, rank):
                raise InvariantError(
                    f"Factor covariances have shape {self.covariances.shape}, "
                    f"expected {(counts.shape[0], rank, rank)}"
                )

    @property
    def n_total(self) -> int:
        return int(self.counts.sum())

    @property
    def labels(self) -> np.ndarray:
        return np.repeat(np.arange(self.counts.shape[0]), self.counts)

    @property
    def sums(self) -> np.ndarray:
        return group_sums(self.centered, self.counts)

    @property
    def weighted_covariance(self) -> np.ndarray:
        """sum_s n_s C_s, zero for point estimates."""
        rank = self.factors.shape[1]
        if self.covariances is None:
            return np.zeros((rank, rank))
        return np.einsum("s,sij->ij", self.counts.astype(np.float64), self.covariances)

    @property
    def second_moment(self) -> np.ndarray:
        """sum_s n_s (h_s h_s' + C_s)."""
        H = self.factors
        return (H.T * self.counts) @ H + self.weighted_covariance


def group_sums(centered: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Per-speaker sums of contiguous row groups."""
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    return np.add.reduceat(centered, offsets, axis=0)


def _solve_pos(matrix: np.ndarray, rhs: np.ndarray, name: str) -> np.ndarray:
    try:
        return linalg.solve(matrix, rhs, assume_a="pos")
    except (linalg.LinAlgError, ValueError) as e:
        raise SingularMatrixError(f"Cannot invert {name}: {e}") from e


def factor_posteriors(
    F: np.ndarray,
    sigma: np.ndarray,
    sums: np.ndarray,
    counts: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Posterior means and covariances of the factors for a batch of speakers.

    h_s = C_s F' S^-1 sum_i (x_si - mu) with C_s = (n_s F' S^-1 F + I)^-1,
    one solve per distinct session count.

    Args:
        F: Speaker space (d x r)
        sigma: Residual covariance (d x d)
        sums: Per-speaker sums of centered vectors (S x d)
        counts: Sessions per speaker (S,)

    Returns:
        Tuple[np.ndarray, np.ndarray]: Factors (S x r) and covariances (S x r x r)

    Raises:
        SingularMatrixError: If sigma or a precision bracket cannot be inverted
    """
    rank = F.shape[1]
    sigma_inv_F = _solve_pos(sigma, F, "residual covariance")
    FtSF = F.T @ sigma_inv_F
    FtSF = (FtSF + FtSF.T) / 2.0
    projected = sums @ sigma_inv_F

    factors = np.empty((sums.shape[0], rank))
    covariances = np.empty((sums.shape[0], rank, rank))
    counts = np.asarray(counts)
    for count in np.unique(counts):
        rows = np.flatnonzero(counts == count)
        precision = count * FtSF + np.eye(rank)
        factors[rows] = _solve_pos(precision, projected[rows].T, "factor precision").T
        covariance = _solve_pos(precision, np.eye(rank), "factor precision")
        covariances[rows] = (covariance + covariance.T) / 2.0
    return factors, covariances


def posterior_factors(
    F: np.ndarray,
    sigma: np.ndarray,
    sums: np.ndarray,
    counts: np.ndarray
) -> np.ndarray:
    """Posterior means only; see factor_posteriors."""
    return factor_posteriors(F, sigma, sums, counts)[0]


def estep_h(model: PldaModel, vectors: np.ndarray) -> np.ndarray:
    """
    Within-class factor of one speaker.

    Args:
        model: Current model (mu, F, sigma_w)
        vectors: The speaker's vectors, one per row

    Returns:
        np.ndarray: h_s of length r
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    total = (vectors - model.mu).sum(axis=0)
    return posterior_factors(model.F, model.sigma_w, total[np.newaxis, :], [vectors.shape[0]])[0]


def estep_g(model: PldaModel, vectors: np.ndarray) -> np.ndarray:
    """Between-class factor of one speaker, from its between-class vectors."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    total = (vectors - model.mu).sum(axis=0)
    return posterior_factors(model.F, model.sigma_b, total[np.newaxis, :], [vectors.shape[0]])[0]


def _check_bracket(bracket: np.ndarray, iteration: Optional[int]) -> None:
    where = f" at iteration {iteration}" if iteration is not None else ""
    eigenvalues = linalg.eigvalsh(bracket)
    scale = float(np.max(np.abs(eigenvalues)))
    if scale == 0.0 or abs(eigenvalues[0]) <= 1e-12 * scale:
        raise BracketError(
            f"Speaker-space update bracket is singular{where}; reduce the rank"
        )
    if eigenvalues[0] < 0.0:
        raise BracketError(
            f"Speaker-space update bracket is not positive definite{where} "
            f"(min eigenvalue {eigenvalues[0]:.3g}); increase alpha"
        )


def mstep_F(
    within: FactorStats,
    between: Optional[FactorStats],
    alpha: float,
    iteration: Optional[int] = None
) -> np.ndarray:
    """
    Update the shared speaker space.

    F = (a/Nw sum (x-mu) h' - 1/Nb sum (y-mu) g') (a/Nw sum E[h h'] - 1/Nb sum E[g g'])^-1.
    E[h h'] = h h' + C_h when within carries factor covariances, h h' otherwise;
    the same holds for g. Without between statistics the g-terms vanish and
    alpha is forced to 1, which is the single-objective update.

    Args:
        within: Within-class vectors and h factors
        between: Between-class vectors and g factors, or None
        alpha: Balance factor
        iteration: Iteration index for error messages

    Returns:
        np.ndarray: New F (d x r)

    Raises:
        BracketError: If the r x r bracket is singular or indefinite
    """
    weight = alpha if between is not None else 1.0
    numerator = weight / within.n_total * (within.sums.T @ within.factors)
    bracket = weight / within.n_total * within.second_moment
    if between is not None:
        numerator = numerator - 1.0 / between.n_total * (between.sums.T @ between.factors)
        bracket = bracket - 1.0 / between.n_total * between.second_moment
    bracket = (bracket + bracket.T) / 2.0

    _check_bracket(bracket, iteration)
    return linalg.solve(bracket, numerator.T, assume_a="sym").T


def floor_covariance(matrix: np.ndarray, floor: float = DEFAULT_VARIANCE_FLOOR) -> np.ndarray:
    """Symmetrize and raise eigenvalues below floor to floor."""
    matrix = (matrix + matrix.T) / 2.0
    eigenvalues, eigenvectors = linalg.eigh(matrix)
    if eigenvalues[0] >= floor:
        return matrix
    floored = (eigenvectors * np.maximum(eigenvalues, floor)) @ eigenvectors.T
    return (floored + floored.T) / 2.0


def residual_covariance(stats: FactorStats, F: np.ndarray, floor: float) -> np.ndarray:
    """1/N sum E[(x - F h)(x - F h)'], floored."""
    residuals = stats.centered - stats.factors[stats.labels] @ F.T
    scatter = residuals.T @ residuals + F @ stats.weighted_covariance @ F.T
    return floor_covariance(scatter / stats.n_total, floor)


def mstep_covariances(
    within: FactorStats,
    between: Optional[FactorStats],
    F: np.ndarray,
    floor: float = DEFAULT_VARIANCE_FLOOR
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Update the within-class and (when present) between-class covariances.

    Args:
        within: Within-class vectors and h factors
        between: Between-class vectors and g factors, or None
        F: Speaker space from the same M-step
        floor: Eigenvalue floor

    Returns:
        Tuple[np.ndarray, Optional[np.ndarray]]: (sigma_w, sigma_b or None)
    """
    sigma_w = residual_covariance(within, F, floor)
    sigma_b = residual_covariance(between, F, floor) if between is not None else None
    return sigma_w, sigma_b


def log_objective(stats: FactorStats, F: np.ndarray, sigma: np.ndarray) -> float:
    """
    Per-vector log-likelihood with the factor integrated out once per speaker.

    (1/N) sum_s log N(x_s1..x_sn; mu, I (x) sigma + 11' (x) F F'), normalizing
    constants included. The factors stored in stats are not used.

    Raises:
        SingularMatrixError: If sigma or a factor precision cannot be factored
    """
    try:
        chol = linalg.cholesky(sigma, lower=True)
    except linalg.LinAlgError as e:
        raise SingularMatrixError(f"Cannot factor covariance for the objective: {e}") from e

    d = F.shape[0]
    rank = F.shape[1]
    whitened = linalg.solve_triangular(chol, stats.centered.T, lower=True)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    data_term = -0.5 * (stats.n_total * (d * LOG_2PI + logdet) + np.sum(whitened ** 2))

    whitened_F = linalg.solve_triangular(chol, F, lower=True)
    FtSF = whitened_F.T @ whitened_F
    projected = stats.sums @ linalg.solve_triangular(chol.T, whitened_F, lower=False)

    factor_term = 0.0
    for count in np.unique(stats.counts):
        rows = np.flatnonzero(stats.counts == count)
        precision = count * FtSF + np.eye(rank)
        try:
            factor = linalg.cho_factor(precision, lower=True)
        except linalg.LinAlgError as e:
            raise SingularMatrixError(f"Cannot factor the factor precision: {e}") from e
        b = projected[rows]
        quadratic = np.sum(b * linalg.cho_solve(factor, b.T).T)
        logdet_precision = 2.0 * np.sum(np.log(np.diag(factor[0])))
        factor_term += 0.5 * quadratic - 0.5 * rows.size * logdet_precision
    return float((data_term + factor_term) / stats.n_total)
