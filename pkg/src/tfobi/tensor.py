"""
Dense multilinear primitives on numpy arrays.

A tensor of order ``r`` is an ``ndarray`` with ``r`` axes stored in C order
(last index fastest). A sample of ``n`` tensors is an array of shape
``(n, p_1, ..., p_r)``. Mode indices ``m`` are 1-based throughout, so that
``m = 1`` addresses the first axis of a tensor.
"""

from functools import reduce

import numpy as np


def _check_mode(ndim, m):
    if not 1 <= m <= ndim:
        raise ValueError(f"mode {m} out of range for a tensor of order {ndim}")


def _cyclic_axes(ndim, m):
    """Axis order (m, m+1, ..., r, 1, ..., m-1), zero-based."""
    k = m - 1
    return [k] + list(range(k + 1, ndim)) + list(range(k))


def m_mode_product(A, B, m):
    """Transform every m-mode vector of ``A`` by the matrix ``B``.

    Entry ``(i_1, ..., j_m, ..., i_r)`` of the result is
    ``sum_{i_m} A[i_1, ..., i_m, ..., i_r] * B[j_m, i_m]``.

    Parameters
    ----------
    A : ndarray
        Tensor of order r.
    B : ndarray
        Matrix of shape ``(q, p_m)``.
    m : int
        1-based mode.

    Returns
    -------
    ndarray
        Tensor whose m-th dimension is ``q``.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    _check_mode(A.ndim, m)
    if B.ndim != 2 or B.shape[1] != A.shape[m - 1]:
        raise ValueError(
            f"mode {m}: matrix of shape {B.shape} cannot act on dimension "
            f"{A.shape[m - 1]}"
        )
    out = np.tensordot(B, A, axes=(1, m - 1))
    return np.moveaxis(out, 0, m - 1)


def multi_mode_product(A, Bs):
    """Apply ``A ⊙_1 B_1 ... ⊙_r B_r``; ``None`` entries act as identities."""
    A = np.asarray(A, dtype=float)
    if len(Bs) != A.ndim:
        raise ValueError(f"expected {A.ndim} matrices, got {len(Bs)}")
    for m, B in enumerate(Bs, start=1):
        if B is not None:
            A = m_mode_product(A, B, m)
    return A


def sample_mode_product(X, Bs):
    """``multi_mode_product`` applied to every tensor of a sample stack."""
    X = np.asarray(X, dtype=float)
    if len(Bs) != X.ndim - 1:
        raise ValueError(f"expected {X.ndim - 1} matrices, got {len(Bs)}")
    for m, B in enumerate(Bs, start=1):
        if B is None:
            continue
        B = np.asarray(B, dtype=float)
        if B.ndim != 2 or B.shape[1] != X.shape[m]:
            raise ValueError(
                f"mode {m}: matrix of shape {B.shape} cannot act on dimension "
                f"{X.shape[m]}"
            )
        X = np.moveaxis(np.tensordot(B, X, axes=(1, m)), 0, m)
    return X


def unfold(A, m):
    """Cyclical m-unfolding, a ``p_m x rho_m`` matrix.

    The column of indices ``(i_1, ..., i_{m-1}, i_{m+1}, ..., i_r)`` is the
    mixed-radix rank of ``(i_{m+1}, ..., i_r, i_1, ..., i_{m-1})`` with the
    first element varying slowest. With this order

        unfold(A ⊙_1 B_1 ... ⊙_r B_r, m)
            = B_m @ unfold(A, m) @ cyclic_kron(Bs, m).T
    """
    A = np.asarray(A, dtype=float)
    _check_mode(A.ndim, m)
    return np.transpose(A, _cyclic_axes(A.ndim, m)).reshape(A.shape[m - 1], -1)


def sample_unfold(X, m):
    """Unfold every tensor of a stack; returns shape ``(n, p_m, rho_m)``."""
    X = np.asarray(X, dtype=float)
    _check_mode(X.ndim - 1, m)
    axes = [0] + [a + 1 for a in _cyclic_axes(X.ndim - 1, m)]
    return np.transpose(X, axes).reshape(X.shape[0], X.shape[m], -1)


def cyclic_kron(Bs, m):
    """``B_{m+1} ⊗ ... ⊗ B_r ⊗ B_1 ⊗ ... ⊗ B_{m-1}`` (1x1 identity if r = 1)."""
    r = len(Bs)
    _check_mode(r, m)
    order = [Bs[k] for k in _cyclic_axes(r, m)[1:]]
    return reduce(np.kron, order, np.ones((1, 1)))


def m_mode_self_product(A, B, m):
    """The ``p_m x p_m`` matrix ``A ⊙_{-m} B``.

    Entry ``(s, t)`` sums ``A[..., s, ...] * B[..., t, ...]`` over every index
    except the m-th.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")
    return unfold(A, m) @ unfold(B, m).T


def face_means(A, m):
    """Mean of each m-mode face (row means of the m-unfolding)."""
    return unfold(A, m).mean(axis=1)


def frobenius_sq(A):
    A = np.asarray(A, dtype=float)
    return float(np.sum(A * A))


def vectorize(A):
    """Values of ``A`` in storage order (last index fastest)."""
    return np.asarray(A, dtype=float).reshape(-1)


def center_sample(X):
    """Return ``(mean, X - mean)`` for a sample stack of shape ``(n, ...)``."""
    X = np.asarray(X, dtype=float)
    if X.ndim < 2 or X.shape[0] == 0:
        raise ValueError("cannot center an empty sample")
    mean = X.mean(axis=0)
    return mean, X - mean
