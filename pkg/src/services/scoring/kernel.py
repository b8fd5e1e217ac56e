"""
Two-covariance log-likelihood-ratio scoring kernel.
File: src/services/scoring/kernel.py
"""

from typing import Union

import numpy as np
from scipy import linalg

from core.exceptions import InvariantError, SingularMatrixError
from core.logging import get_logger
from services.plda.models import PldaModel
from .models import KernelMode, ScoringKernel

logger = get_logger(__name__)


def _inverse(matrix: np.ndarray, name: str) -> np.ndarray:
    try:
        inverse = linalg.inv(matrix, check_finite=True)
    except (linalg.LinAlgError, ValueError) as e:
        logger.error(f"Kernel construction failed inverting {name}: {e}")
        raise SingularMatrixError(f"Cannot invert {name}: {e}") from e
    if not np.all(np.isfinite(inverse)):
        raise SingularMatrixError(f"Cannot invert {name}: result is not finite")
    return inverse


def build_kernel(model: PldaModel, mode: Union[KernelMode, str] = KernelMode.BETWEEN) -> ScoringKernel:
    """
    Precompute Q and P for fast pairwise scoring.

    With ac = FF', tot_w = ac + sigma_w, tot_b = ac + sigma_b and
    cond = tot_w - ac tot_w^-1 ac:
    P = tot_w^-1 ac cond^-1 and Q = tot_x^-1 - cond^-1, where tot_x is
    tot_b in between mode and tot_w in within mode.

    Args:
        model: Trained model
        mode: between (default) or within

    Returns:
        ScoringKernel: Symmetrized Q and P with the model mean

    Raises:
        SingularMatrixError: Naming the matrix whose inverse failed
    """
    mode = KernelMode(mode)
    ac = model.F @ model.F.T
    tot_w = ac + model.sigma_w
    tot_w_inv = _inverse(tot_w, "total within covariance FF' + sigma_w")
    cond = tot_w - ac @ tot_w_inv @ ac
    cond_inv = _inverse(cond, "conditional covariance tot_w - ac tot_w^-1 ac")

    if mode is KernelMode.BETWEEN:
        tot_x_inv = _inverse(ac + model.sigma_b, "total between covariance FF' + sigma_b")
    else:
        tot_x_inv = tot_w_inv

    Q = tot_x_inv - cond_inv
    P = tot_w_inv @ ac @ cond_inv
    return ScoringKernel(
        Q=(Q + Q.T) / 2.0,
        P=(P + P.T) / 2.0,
        mu=model.mu,
        mode=mode
    )


def score_pair(kernel: ScoringKernel, x1: np.ndarray, x2: np.ndarray) -> float:
    """
    Score one pair: a'Qa + b'Qb + 2a'Pb with a = x1 - mu, b = x2 - mu.

    The additive constant is 0. Symmetric in its arguments bit for bit.

    Raises:
        InvariantError: If a vector does not have dimension d
    """
    a = np.asarray(x1, dtype=np.float64)
    b = np.asarray(x2, dtype=np.float64)
    if a.shape != (kernel.d,) or b.shape != (kernel.d,):
        raise InvariantError(
            f"Expected vectors of dimension {kernel.d}, got {a.shape} and {b.shape}"
        )
    a = a - kernel.mu
    b = b - kernel.mu
    cross = 0.5 * (a @ kernel.P @ b + b @ kernel.P @ a)
    return float(a @ kernel.Q @ a + b @ kernel.Q @ b + 2.0 * cross)


def score_matrix(kernel: ScoringKernel, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """
    Score every row of left against every row of right.

    Args:
        kernel: Scoring kernel
        left: Enrollment side, one vector per row
        right: Test side, one vector per row

    Returns:
        np.ndarray: Scores of shape (len(left), len(right))
    """
    left = np.atleast_2d(np.asarray(left, dtype=np.float64))
    right = np.atleast_2d(np.asarray(right, dtype=np.float64))
    if left.shape[1] != kernel.d or right.shape[1] != kernel.d:
        raise InvariantError(
            f"Expected vectors of dimension {kernel.d}, got {left.shape[1]} and {right.shape[1]}"
        )
    a = left - kernel.mu
    b = right - kernel.mu
    qa = np.einsum("ij,jk,ik->i", a, kernel.Q, a)
    qb = np.einsum("ij,jk,ik->i", b, kernel.Q, b)
    cross = 0.5 * ((a @ kernel.P) @ b.T + ((b @ kernel.P) @ a.T).T)
    return qa[:, np.newaxis] + qb[np.newaxis, :] + 2.0 * cross
