"""
FOBI, MFOBI and TFOBI unmixing estimators.

Every mode is handled the same way: standardize the sample from all modes
with symmetric inverse square roots of the m-mode covariances, then rotate
each mode by the eigenvectors of an m-mode FOBI matrix of the standardized
sample. The unmixing matrix of mode m is ``W_m^T S_m^{-1/2}``.

Two standardizations are available:

``"joint"`` (default)
    The per-mode covariances ``S_m`` are iterated to the fixed point of
    ``S_m = cov_m(X ⊙_{s != m} S_s^{-1/2})``, with their overall scales
    balanced across modes. Every m-mode covariance of the standardized
    sample is then the identity. The first update of each mode equals the
    single-step covariance when the other modes are still untouched.
``"single"``
    One symmetric inverse square root per mode, each computed from the raw
    centered sample. For tensors of order two or more the m-mode
    covariances of the result are identity only in the population.

For ``r = 1`` both coincide with classical FOBI.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import IdentifiabilityWarning, NumericalError
from .moments import m_mode_covariance, m_mode_fobi
from .spectra import has_near_tie, sym_eigen, sym_inv_sqrt
from .tensor import cyclic_kron, sample_mode_product, sample_unfold

WHITENINGS = ("joint", "single")
# sweeps stop once the whitened change stalls below this level, raised to
# a multiple of eps * cond(S_m) for ill-conditioned covariances
NOISE_FLOOR = 1e-9


@dataclass(frozen=True)
class UnmixingModel:
    """A fitted unmixing model; all arrays are read-only."""

    gammas: tuple
    eigenvalues: tuple
    mean: np.ndarray
    n_variant: tuple
    scale: float
    dims: tuple
    n: int
    whitening: tuple = None
    method: str = "joint"
    warnings: tuple = field(default_factory=tuple)

    @property
    def order(self):
        return len(self.dims)

    @property
    def covariances(self):
        """The m-mode covariances ``S_m`` matching the stored whitening matrices."""
        if self.whitening is None:
            return None
        return tuple(np.linalg.inv(H @ H) for H in self.whitening)

    @property
    def left(self):
        return self.gammas[0]

    @property
    def right(self):
        if self.order != 2:
            raise AttributeError("left/right unmixing matrices exist only for matrix data")
        return self.gammas[1]


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _variants(n_variant, r):
    if np.isscalar(n_variant):
        n_variant = (n_variant,) * r
    n_variant = tuple(int(v) for v in n_variant)
    if len(n_variant) != r:
        raise ValueError(f"expected {r} variant flags, got {len(n_variant)}")
    if any(v not in (0, 1) for v in n_variant):
        raise ValueError(f"variant flags must be 0 or 1, got {n_variant}")
    return n_variant


def _whiten_single(Xc):
    r = Xc.ndim - 1
    return [sym_inv_sqrt(m_mode_covariance(Xc, m)) for m in range(1, r + 1)]


def _noise_floor(S):
    cond = max(np.linalg.cond(s) for s in S)
    return max(NOISE_FLOOR, 10 * np.finfo(float).eps * cond)


def _whiten_joint(Xc, tol, max_iter):
    r = Xc.ndim - 1
    if r == 1:
        return _whiten_single(Xc)
    n, dims = Xc.shape[0], Xc.shape[1:]
    # cov_m(X ⊙_{s != m} H_s) = (1 / (n rho)) sum_i U_i Q U_i^T with
    # Q = cyclic_kron(H_s^2) and U_i the fixed m-unfoldings, so the sample
    # is unfolded once and every update is two matrix products
    unfolded = [
        np.ascontiguousarray(sample_unfold(Xc, m).transpose(1, 0, 2)) for m in range(1, r + 1)
    ]
    S = [None] * r
    H = [None] * r
    inv = [np.eye(p) for p in dims]
    previous = np.inf
    for sweep in range(max_iter):
        change = 0.0
        for m in range(1, r + 1):
            U = unfolded[m - 1]
            p, rho = U.shape[0], U.shape[2]
            Q = cyclic_kron(inv, m)
            S_new = (U.reshape(-1, rho) @ Q).reshape(p, -1) @ U.reshape(p, -1).T / (n * rho)
            S_new = (S_new + S_new.T) / 2
            if S[m - 1] is not None:
                # change seen in the previous whitened coordinates, free of
                # the conditioning of S and of the per-mode scale split
                M = H[m - 1] @ S_new @ H[m - 1]
                M /= np.trace(M) / M.shape[0]
                change = max(change, np.max(np.abs(M - np.eye(M.shape[0]))))
            S[m - 1] = S_new
            H[m - 1] = sym_inv_sqrt(S_new)
            inv[m - 1] = H[m - 1] @ H[m - 1]
        if sweep > 0 and change <= tol:
            break
        # rounding floor of an ill-conditioned sample: no further progress
        floor = _noise_floor(S)
        if sweep > 1 and change <= floor and change >= previous:
            break
        previous = change
    if change > max(tol, _noise_floor(S)):
        warnings.warn(
            f"joint standardization stopped after {max_iter} sweeps "
            f"(whitened covariance change {change:.3e})",
            RuntimeWarning,
            stacklevel=3,
        )
    # only the product of the per-mode scales is determined; balance them
    level = np.array([np.trace(s) / s.shape[0] for s in S])
    common = np.exp(np.mean(np.log(level)))
    return [h * np.sqrt(lv / common) for h, lv in zip(H, level)]


def tfobi_fit(sample, n_variant=0, whitening="joint", tol=1e-12, max_iter=200):
    """Fit TFOBI to a sample of tensors.

    Parameters
    ----------
    sample : array_like
        Shape ``(n, p_1, ..., p_r)``.
    n_variant : int or sequence of int
        FOBI functional per mode: 0 uses ``(X ⊙_{-m} X)^2``, 1 uses
        ``||X||^2 (X ⊙_{-m} X)``. A scalar applies to every mode.
    whitening : {"joint", "single"}
        See the module docstring.
    tol, max_iter
        Convergence control of the joint standardization: the largest
        entrywise deviation from identity of each updated covariance, seen
        in the previous sweep's whitened coordinates and scale-normalized.

    Returns
    -------
    UnmixingModel

    Raises
    ------
    SingularCovarianceError
        If some m-mode covariance is not positive definite.
    """
    return tfobi_fit_variants(sample, [n_variant], whitening, tol, max_iter)[0]


def tfobi_fit_variants(sample, variants, whitening="joint", tol=1e-12, max_iter=200):
    """Fit several FOBI-functional choices sharing one standardization.

    Equivalent to ``[tfobi_fit(sample, v, ...) for v in variants]`` but the
    centering and whitening are computed once.
    """
    X = np.asarray(sample, dtype=float)
    if X.ndim < 2:
        raise ValueError("sample must have shape (n, p_1, ..., p_r)")
    n = X.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 observations, got {n}")
    if whitening not in WHITENINGS:
        raise ValueError(f"whitening must be one of {WHITENINGS}, got {whitening!r}")
    dims = X.shape[1:]
    r = len(dims)
    variant_sets = [_variants(v, r) for v in variants]

    mean = X.mean(axis=0)
    Xc = X - mean
    if whitening == "joint":
        H = _whiten_joint(Xc, tol, max_iter)
    else:
        H = _whiten_single(Xc)
    Y = sample_mode_product(Xc, H)

    # each (mode, variant) rotation is shared by every variant set using it
    rotations = {}
    for vs in variant_sets:
        for m, v in enumerate(vs, start=1):
            if (m, v) not in rotations:
                rotations[m, v] = sym_eigen(m_mode_fobi(Y, m, v))

    models = []
    for vs in variant_sets:
        gammas, eigenvalues, notes = [], [], []
        for m, v in enumerate(vs, start=1):
            es = rotations[m, v]
            if has_near_tie(es.eigenvalues):
                msg = (
                    f"mode {m}: near-tied FOBI eigenvalues {np.round(es.eigenvalues, 6)}; "
                    "the mean kurtoses of the m-mode faces may not be distinct"
                )
                warnings.warn(msg, IdentifiabilityWarning, stacklevel=3)
                notes.append(msg)
            gammas.append(es.eigenvectors.T @ H[m - 1])
            eigenvalues.append(es.eigenvalues)

        Z = sample_mode_product(Xc, gammas)
        var = float(np.mean(Z * Z))
        if not var > 0:
            raise NumericalError("recovered sources have zero variance")
        models.append(UnmixingModel(
            gammas=tuple(_frozen(g) for g in gammas),
            eigenvalues=tuple(_frozen(v) for v in eigenvalues),
            mean=_frozen(mean),
            n_variant=vs,
            scale=1.0 / np.sqrt(var),
            dims=tuple(dims),
            n=n,
            whitening=tuple(_frozen(h) for h in H),
            method=whitening,
            warnings=tuple(notes),
        ))
    return models


def mfobi_fit(sample, n_variant_left=0, n_variant_right=0, **kwargs):
    """MFOBI for a sample of matrices, shape ``(n, p, q)``.

    Identical to ``tfobi_fit`` with ``r = 2``; the left unmixing matrix is
    ``model.left`` and the right one ``model.right``.
    """
    X = np.asarray(sample, dtype=float)
    if X.ndim != 3:
        raise ValueError(f"MFOBI expects a sample of matrices, got shape {X.shape}")
    return tfobi_fit(X, (n_variant_left, n_variant_right), **kwargs)


def fobi_fit(sample, **kwargs):
    """Classical FOBI for a sample of vectors, shape ``(n, p)``."""
    X = np.asarray(sample, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"FOBI expects a sample of vectors, got shape {X.shape}")
    return tfobi_fit(X, 0, **kwargs)


def recover_sources(model, sample):
    """Estimated sources ``scale * (X_i - mean) ⊙_1 Γ_1 ... ⊙_r Γ_r``."""
    X = np.asarray(sample, dtype=float)
    if X.shape[1:] != tuple(model.dims):
        raise ValueError(f"sample dims {X.shape[1:]} do not match model dims {model.dims}")
    return model.scale * sample_mode_product(X - model.mean, model.gammas)


def component_kurtosis(sources):
    """Per-cell sample kurtosis ``m_4 / m_2^2`` of a sample stack."""
    Z = np.asarray(sources, dtype=float)
    if Z.shape[0] < 4:
        raise ValueError(f"need at least 4 observations, got {Z.shape[0]}")
    Zc = Z - Z.mean(axis=0)
    m2 = np.mean(Zc ** 2, axis=0)
    if np.any(m2 <= 0):
        bad = tuple(int(i) + 1 for i in np.argwhere(m2 <= 0)[0])
        raise ValueError(f"component {bad} has zero sample variance")
    return np.mean(Zc ** 4, axis=0) / m2 ** 2


def select_extreme_components(kurtosis, k_low=1, k_high=1):
    """1-based index tuples of the ``k_low`` lowest and ``k_high`` highest cells.

    Lowest come first (ascending), then highest (descending).
    """
    kurt = np.asarray(kurtosis, dtype=float)
    flat = kurt.reshape(-1)
    order = np.argsort(flat, kind="stable")
    picks = list(order[:k_low]) + list(order[::-1][:k_high])
    return [tuple(int(i) + 1 for i in np.unravel_index(k, kurt.shape)) for k in picks]
