"""
Asymptotic variances of FOBI/MFOBI/TFOBI unmixing matrices under identity
(equivalently, orthogonal) mixing, and the limiting mean of the transformed
minimum distance index.
"""

from dataclasses import dataclass

import numpy as np

from .errors import IdentifiabilityError
from .tensor import unfold


@dataclass(frozen=True)
class MomentProfile:
    """Standardized moments of the independent components, one value per cell.

    ``omega`` is ``var(z^3) = E z^6 - (E z^3)^2``.
    """

    beta: np.ndarray
    gamma3: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        shapes = {np.shape(self.beta), np.shape(self.gamma3), np.shape(self.omega)}
        if len(shapes) != 1:
            raise ValueError(f"moment arrays differ in shape: {shapes}")

    @classmethod
    def from_moments(cls, beta, gamma3, m6):
        beta = np.asarray(beta, dtype=float)
        gamma3 = np.asarray(gamma3, dtype=float)
        m6 = np.asarray(m6, dtype=float)
        return cls(beta, gamma3, m6 - gamma3 ** 2)

    @property
    def dims(self):
        return np.shape(self.beta)


@dataclass(frozen=True)
class AsvTable:
    """ASV of every entry of one mode's unmixing matrix."""

    mode: int
    variant: int
    asv: np.ndarray

    @property
    def e_sum(self):
        """Sum of the off-diagonal ASVs (the limiting mean of ``n (p_m - 1) D_m^2``)."""
        return float(self.asv.sum() - np.trace(self.asv))


def _check_distinct(means, what):
    p = means.size
    for k in range(p):
        for l in range(k + 1, p):
            if np.isclose(means[k], means[l], rtol=1e-12, atol=1e-12):
                raise IdentifiabilityError(
                    f"{what} {k + 1} and {l + 1} are tied ({means[k]:.6g}); "
                    "the unmixing matrix is not identifiable"
                )


def fobi_asv(profile):
    """Classical FOBI ASVs for a vector of independent components."""
    beta = np.asarray(profile.beta, dtype=float).reshape(-1)
    omega = np.asarray(profile.omega, dtype=float).reshape(-1)
    _check_distinct(beta, "kurtoses of components")
    p = beta.size
    asv = np.empty((p, p))
    excess = beta - 1
    total = excess.sum()
    for k in range(p):
        asv[k, k] = excess[k] / 4
        for l in range(p):
            if l == k:
                continue
            rest = total - excess[k] - excess[l]
            num = omega[k] + omega[l] - beta[k] ** 2 - 6 * beta[l] + 9 + rest
            asv[k, l] = num / (beta[k] - beta[l]) ** 2
    return AsvTable(1, 0, asv)


def _row_stats(beta, omega):
    q = beta.shape[1]
    bbar = beta.mean(axis=1)
    wbar = omega.mean(axis=1)
    delta = beta @ beta.T / q - np.outer(bbar, bbar)
    return bbar, wbar, delta


def mfobi_asv(profile, n_variant=0, mode=1):
    """Left-mode MFOBI ASVs for a ``p x q`` grid of components.

    The right-mode table is ``mfobi_asv`` of the transposed grid.
    """
    beta = np.asarray(profile.beta, dtype=float)
    omega = np.asarray(profile.omega, dtype=float)
    if beta.ndim != 2:
        raise ValueError(f"expected a p x q moment grid, got shape {beta.shape}")
    if n_variant not in (0, 1):
        raise ValueError(f"variant must be 0 or 1, got {n_variant!r}")
    p, q = beta.shape
    bbar, wbar, delta = _row_stats(beta, omega)
    _check_distinct(bbar, "mean kurtoses of rows")
    total = bbar.sum()
    asv = np.empty((p, p))
    for k in range(p):
        asv[k, k] = (bbar[k] - 1) / (4 * q)
        for l in range(p):
            if l == k:
                continue
            rest = total - bbar[k] - bbar[l]
            if n_variant == 0:
                c = rest + p * q - 2 * p - 4 * q + 15
            else:
                c = q * rest - p * q + 11
            num = (
                wbar[k] + wbar[l] - bbar[k] ** 2 + 2 * delta[k, l]
                + (q - 1) * bbar[k] + (q - 7) * bbar[l] + c
            )
            asv[k, l] = num / (q * (bbar[k] - bbar[l]) ** 2)
    return AsvTable(mode, n_variant, asv)


def b_constant(p, q, n_variant):
    """Eigenvalue shift constant ``b_N`` of the off-diagonal expansion."""
    return 2 * q + p - 1 if n_variant == 0 else q * p + 1


def _unfold_profile(profile, m):
    beta = np.asarray(profile.beta, dtype=float)
    omega = np.asarray(profile.omega, dtype=float)
    gamma3 = np.asarray(profile.gamma3, dtype=float)
    if beta.ndim == 1:
        beta, omega, gamma3 = beta[:, None], omega[:, None], gamma3[:, None]
        if m != 1:
            raise ValueError(f"mode {m} out of range for a vector profile")
        return MomentProfile(beta, gamma3, omega)
    return MomentProfile(unfold(beta, m), unfold(gamma3, m), unfold(omega, m))


def tfobi_asv(profile, mode=1, n_variant=0):
    """ASVs of the mode-``mode`` TFOBI unmixing matrix.

    The moment grid is unfolded along the mode and treated as MFOBI's left
    side with ``q = rho_m``.
    """
    flat = _unfold_profile(profile, mode)
    table = mfobi_asv(flat, n_variant)
    return AsvTable(mode, n_variant, table.asv)


def all_mode_asv(profile, variants=0):
    r = max(1, len(profile.dims))
    if np.isscalar(variants):
        variants = (variants,) * r
    return [tfobi_asv(profile, m, v) for m, v in zip(range(1, r + 1), variants)]


def expected_limit_mdi(tables, dims):
    """Limiting mean of the transformed MDI of the Kronecker estimate.

    ``sum_m (p / p_m) E_m`` with ``p = prod(dims)``; for a single mode this
    is just ``E_1``.
    """
    dims = tuple(int(d) for d in dims)
    if len(tables) != len(dims):
        raise ValueError(f"expected {len(dims)} ASV tables, got {len(tables)}")
    p = int(np.prod(dims))
    total = 0.0
    for table, pm in zip(tables, dims):
        if table is None:
            raise ValueError("missing ASV table")
        if table.asv.shape != (pm, pm):
            raise ValueError(f"ASV table of shape {table.asv.shape} does not match p_m = {pm}")
        total += (p / pm) * table.e_sum
    return total


def variant_superiority(profile, mode, k, k2):
    """Which FOBI functional gives the smaller ASV of entry ``(k, k2)``.

    Returns ``"N1_better"``, ``"N0_better"`` or ``"equivalent"``. Indices are
    1-based. The normed functional wins exactly when the faces other than
    ``k`` and ``k2`` have average kurtosis below 2; modes of length two (and
    single-column unfoldings) make the two choices equivalent.
    """
    flat = _unfold_profile(profile, mode)
    bbar = np.asarray(flat.beta).mean(axis=1)
    p, q = np.shape(flat.beta)
    if not (1 <= k <= p and 1 <= k2 <= p) or k == k2:
        raise ValueError(f"need two distinct components in 1..{p}, got {k}, {k2}")
    if p == 2 or q == 1:
        return "equivalent"
    rest = (bbar.sum() - bbar[k - 1] - bbar[k2 - 1]) / (p - 2)
    if np.isclose(rest, 2.0, rtol=0, atol=1e-12):
        return "equivalent"
    return "N1_better" if rest < 2 else "N0_better"
