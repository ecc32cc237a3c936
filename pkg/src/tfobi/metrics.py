"""
Minimum distance index (MDI) of an unmixing estimate.

For the gain matrix ``G = Γ̂ Ω`` the index is

    D = (p - 1)^{-1/2} inf_{C = PJD} || C G - I ||_F.

The infimum separates: once row ``g`` of ``G`` is assigned to target
position ``j``, the best signed scale ``c`` minimizes ``||c g - e_j||^2`` at
``c = g_j / ||g||^2`` with residual ``1 - g_j^2 / ||g||^2``, the share of
the row's squared norm lying off position ``j``. What remains is a linear
assignment of rows to positions minimizing the summed residuals, solved
exactly.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.optimize import linear_sum_assignment

MAX_KRON_DIM = 4096


@dataclass(frozen=True)
class MdiResult:
    d: float
    transformed: float
    gain_matrix: np.ndarray
    best_assignment: np.ndarray  # best_assignment[j] = row of G placed at position j


def _residuals(G):
    sq = G * G
    norms = sq.sum(axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("gain matrix has a zero row; the unmixing estimate is singular")
    # off-position mass per (row, position) as exclusive prefix + suffix sums,
    # so a near-perfect row keeps its tiny residual instead of cancelling
    def exclusive_cumsum(a):
        return np.cumsum(np.hstack([np.zeros((a.shape[0], 1)), a[:, :-1]]), axis=1)

    before = exclusive_cumsum(sq)
    after = exclusive_cumsum(sq[:, ::-1])[:, ::-1]
    return (before + after) / norms


def mdi(gamma_hat, omega, n=1):
    """Minimum distance index of ``gamma_hat`` as an estimate of ``inv(omega)``.

    Parameters
    ----------
    gamma_hat, omega : ndarray
        Square matrices of the same size ``p >= 2``.
    n : int
        Sample size used for ``transformed = n (p - 1) d^2``.
    """
    gamma_hat = np.asarray(gamma_hat, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if gamma_hat.ndim != 2 or gamma_hat.shape[0] != gamma_hat.shape[1]:
        raise ValueError(f"expected a square unmixing matrix, got {gamma_hat.shape}")
    if omega.shape != gamma_hat.shape:
        raise ValueError(f"shape mismatch: {gamma_hat.shape} vs {omega.shape}")
    p = gamma_hat.shape[0]
    if p < 2:
        raise ValueError("the minimum distance index is undefined for p = 1")
    G = gamma_hat @ omega
    cost = _residuals(G)
    rows, cols = linear_sum_assignment(cost)
    total = float(cost[rows, cols].sum())
    d = float(min(1.0, np.sqrt(max(total, 0.0) / (p - 1))))
    assignment = np.empty(p, dtype=int)
    assignment[cols] = rows
    return MdiResult(d, n * (p - 1) * d * d, G, assignment)


def kron_mdi(gammas, omegas, n=1):
    """MDI of ``Γ̂_r ⊗ ... ⊗ Γ̂_1`` against ``Ω_r ⊗ ... ⊗ Ω_1``."""
    if len(gammas) != len(omegas) or not gammas:
        raise ValueError("need one mixing matrix per unmixing matrix")
    for m, (g, o) in enumerate(zip(gammas, omegas), start=1):
        if np.shape(g) != np.shape(o):
            raise ValueError(f"mode {m}: shape mismatch {np.shape(g)} vs {np.shape(o)}")
    p = int(np.prod([np.shape(g)[0] for g in gammas]))
    if p > MAX_KRON_DIM:
        raise ValueError(f"Kronecker dimension {p} exceeds the cap {MAX_KRON_DIM}")
    big_gamma = reduce(np.kron, [np.asarray(g, dtype=float) for g in gammas[::-1]])
    big_omega = reduce(np.kron, [np.asarray(o, dtype=float) for o in omegas[::-1]])
    return mdi(big_gamma, big_omega, n)


def comparable_transformed(d, n, p_own, p_other):
    """``n * p_other * (p_own - 1) * d^2``.

    Puts transformed indices of ``p_own x p_own`` and ``p_other x p_other``
    estimates on a common scale.
    """
    return n * p_other * (p_own - 1) * d * d
