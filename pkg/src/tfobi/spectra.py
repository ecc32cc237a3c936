"""Symmetric eigenproblems with a canonical ordering and sign."""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, SingularCovarianceError

# smallest eigenvalue must exceed this fraction of the largest
PD_THRESHOLD = 1e-10
# consecutive eigenvalue gap below this fraction of max(range, max |λ|) is a near tie
TIE_THRESHOLD = 1e-6


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns aligned with eigenvalues

    @property
    def dim(self):
        return self.eigenvalues.shape[0]


def _as_symmetric(S):
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise NumericalError("matrix has non-finite entries")
    return (S + S.T) / 2


def sym_eigen(S):
    """Eigendecomposition of a symmetric matrix.

    Eigenvalues are returned in descending order and every eigenvector is
    flipped so that its largest-magnitude entry is positive (the first such
    entry when magnitudes tie).
    """
    S = _as_symmetric(S)
    try:
        values, vectors = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        off = np.linalg.norm(S - np.diag(np.diag(S)))
        raise NumericalError(
            f"symmetric eigensolver did not converge (off-diagonal norm {off:.3e})"
        ) from exc
    values = values[::-1].copy()
    vectors = vectors[:, ::-1].copy()
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    vectors *= signs
    return EigenSystem(values, vectors)


def sym_inv_sqrt(S, threshold=PD_THRESHOLD):
    """The symmetric inverse square root ``U D^{-1/2} U^T``.

    Raises
    ------
    SingularCovarianceError
        If the smallest eigenvalue is not above ``threshold`` times the
        largest one.
    """
    es = sym_eigen(S)
    lam = es.eigenvalues
    if lam[0] <= 0 or lam[-1] <= threshold * lam[0]:
        raise SingularCovarianceError(
            f"matrix is not positive definite: smallest eigenvalue {lam[-1]:.6e} "
            f"(largest {lam[0]:.6e})",
            eigenvalue=float(lam[-1]),
        )
    U = es.eigenvectors
    return (U / np.sqrt(lam)) @ U.T


def sym_sqrt(S):
    """Symmetric square root of a positive semidefinite matrix."""
    es = sym_eigen(S)
    U = es.eigenvectors
    return (U * np.sqrt(np.clip(es.eigenvalues, 0, None))) @ U.T


def tie_gap(eigenvalues):
    """Smallest gap between consecutive sorted eigenvalues (inf if fewer than two)."""
    lam = np.sort(np.asarray(eigenvalues, dtype=float))
    if lam.size < 2:
        return np.inf
    return float(np.min(np.diff(lam)))


def has_near_tie(eigenvalues, threshold=TIE_THRESHOLD):
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size < 2:
        return False
    # the range alone is degenerate for two eigenvalues (gap == range), so
    # the magnitude also sets the scale
    scale = max(lam.max() - lam.min(), np.abs(lam).max())
    return tie_gap(lam) <= threshold * scale
