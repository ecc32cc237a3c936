"""
Sample m-mode moment matrices of a tensor sample.

All functionals use the plug-in (divide by ``n``) convention and are
normalized by ``rho_m = prod_{s != m} p_s`` once, so that for standardized
independent components the FOBI matrices have eigenvalues
``a_N + mean kurtosis of the m-mode face``.
"""

from dataclasses import dataclass

import numpy as np

from .tensor import _check_mode, sample_unfold

# observations per block in the fixed-chunk reductions
CHUNK = 65536


@dataclass(frozen=True)
class MomentSet:
    mode: int
    cov: np.ndarray
    b0: np.ndarray = None
    b1: np.ndarray = None
    n: int = 0
    rho: int = 1


def _stack(sample, min_n=1):
    X = np.asarray(sample, dtype=float)
    if X.ndim < 2:
        raise ValueError("a sample must have shape (n, p_1, ..., p_r)")
    if X.shape[0] < min_n:
        raise ValueError(f"need at least {min_n} observations, got {X.shape[0]}")
    return X


def _rho(X, m):
    _check_mode(X.ndim - 1, m)
    return X[0].size // X.shape[m]


def _chunked_sum(X, m, fn):
    """Sum ``fn(U)`` over fixed blocks of the m-unfolded stack ``U``."""
    total = None
    for start in range(0, X.shape[0], CHUNK):
        part = fn(sample_unfold(X[start:start + CHUNK], m))
        total = part if total is None else total + part
    return total


def _weighted_gram(U, w=None):
    """``sum_i w_i U_i U_i^T`` as one matrix product over the stacked columns."""
    p = U.shape[1]
    M = U.transpose(1, 0, 2).reshape(p, -1)
    if w is None:
        return M @ M.T
    Mw = (U * w[:, None, None]).transpose(1, 0, 2).reshape(p, -1)
    return Mw @ M.T


def _grams(U):
    """Per-observation ``U_i U_i^T``, one row block at a time (fast for small p_m)."""
    n, p, _ = U.shape
    G = np.empty((n, p, p))
    for a in range(p):
        G[:, a, :] = np.einsum("nj,nkj->nk", U[:, a, :], U)
    return G


def _sym(M):
    return (M + M.T) / 2


def m_mode_covariance(sample, m):
    """``(1 / (n rho_m)) sum_i X_i ⊙_{-m} X_i`` for a centered sample."""
    X = _stack(sample, min_n=2)
    n = X.shape[0]
    rho = _rho(X, m)
    S = _chunked_sum(X, m, _weighted_gram)
    return _sym(S / (n * rho))


def _fobi0_block(U):
    n, p, rho = U.shape
    if rho == 1:
        # (x x^T)^2 = ||x||^2 x x^T
        return _weighted_gram(U, np.einsum("nij,nij->n", U, U))
    G = _grams(U)
    # sum_i G_i G_i as a single product
    return G.transpose(1, 0, 2).reshape(p, -1) @ G.reshape(-1, p)


def m_mode_fobi0(sample, m):
    """``(1 / (n rho_m)) sum_i (X_i ⊙_{-m} X_i)^2`` for a standardized sample."""
    X = _stack(sample)
    n = X.shape[0]
    rho = _rho(X, m)
    return _sym(_chunked_sum(X, m, _fobi0_block) / (n * rho))


def m_mode_fobi1(sample, m):
    """``(1 / (n rho_m)) sum_i ||X_i||_F^2 (X_i ⊙_{-m} X_i)`` for a standardized sample."""
    X = _stack(sample)
    n = X.shape[0]
    rho = _rho(X, m)

    def block(U):
        return _weighted_gram(U, np.einsum("nij,nij->n", U, U))

    return _sym(_chunked_sum(X, m, block) / (n * rho))


def m_mode_fobi(sample, m, variant=0):
    if variant == 0:
        return m_mode_fobi0(sample, m)
    if variant == 1:
        return m_mode_fobi1(sample, m)
    raise ValueError(f"variant must be 0 or 1, got {variant!r}")


def moment_set(sample, m, standardized=False):
    """Covariance, and the FOBI matrices too when ``standardized`` is true."""
    X = _stack(sample, min_n=2)
    rho = _rho(X, m)
    cov = m_mode_covariance(X, m)
    if not standardized:
        return MomentSet(m, cov, n=X.shape[0], rho=rho)
    return MomentSet(m, cov, m_mode_fobi0(X, m), m_mode_fobi1(X, m), X.shape[0], rho)
