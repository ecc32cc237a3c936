"""Source grids, mixing matrices and the seeded IC-model sampler."""

from dataclasses import dataclass

import numpy as np

from ..asymptotics import MomentProfile
from ..tensor import sample_mode_product
from .distributions import get_distribution

REGIMES = ("identity", "gaussian", "uniform", "haar")
MAX_REDRAWS = 100


@dataclass(frozen=True)
class SourceGrid:
    """Tensor-shaped grid of catalog distribution names."""

    names: np.ndarray

    def __post_init__(self):
        names = np.asarray(self.names, dtype=object)
        for name in names.reshape(-1):
            get_distribution(name)
        object.__setattr__(self, "names", names)

    @classmethod
    def from_rows(cls, rows):
        return cls(np.array(rows, dtype=object))

    @property
    def dims(self):
        return self.names.shape

    def profile(self):
        """Analytic moment profile of the standardized sources."""
        dists = [get_distribution(n) for n in self.names.reshape(-1)]
        beta = np.array([d.beta for d in dists]).reshape(self.dims)
        gamma3 = np.array([d.gamma3 for d in dists]).reshape(self.dims)
        m6 = np.array([d.m6 for d in dists]).reshape(self.dims)
        return MomentProfile.from_moments(beta, gamma3, m6)


@dataclass(frozen=True)
class MixingSpec:
    regime: str
    matrices: tuple

    @property
    def kron(self):
        """``Ω_r ⊗ ... ⊗ Ω_1``, the mixing of the column-major vectorization."""
        out = np.ones((1, 1))
        for M in self.matrices[::-1]:
            out = np.kron(out, M)
        return out


# Table-3 grid of the separation study (kurtoses 1.8 ... 18 column by column)
TABLE3 = SourceGrid.from_rows([
    ["uniform", "t10", "chisq3", "chisq1.5"],
    ["triangular", "gamma3", "gamma1.2", "chisq1.2"],
    ["normal", "laplace", "exp", "invgauss"],
])

# the two 3x3 settings of the variant comparison
VARIANT_SETTINGS = {
    1: SourceGrid.from_rows([
        ["normal", "bernoulli", "bernoulli"],
        ["bernoulli", "uniform", "bernoulli"],
        ["bernoulli", "bernoulli", "bernoulli"],
    ]),
    2: SourceGrid.from_rows([
        ["bernoulli", "normal", "normal"],
        ["normal", "uniform", "normal"],
        ["normal", "normal", "normal"],
    ]),
}


def as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def derive_seed(master, *keys):
    """Integer seed of the stream ``keys`` below ``master``.

    Uses ``SeedSequence(master, spawn_key=keys)``, numpy's splitting rule, so
    distinct key tuples give independent streams. ``default_rng(seed)``
    reproduces the stream.
    """
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])


def haar_orthogonal(p, rng):
    Q, R = np.linalg.qr(rng.standard_normal((p, p)))
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def _one_matrix(regime, p, rng):
    if regime == "identity":
        return np.eye(p)
    for _ in range(MAX_REDRAWS):
        if regime == "gaussian":
            M = rng.standard_normal((p, p))
        elif regime == "uniform":
            M = rng.uniform(-1.0, 1.0, (p, p))
        else:
            M = haar_orthogonal(p, rng)
        if np.linalg.matrix_rank(M) == p:
            return M
    raise RuntimeError(f"could not draw a full-rank {regime} matrix in {MAX_REDRAWS} tries")


def gen_mixing(regime, dims, seed=None):
    if regime not in REGIMES:
        raise ValueError(f"unknown mixing regime {regime!r}; expected one of {REGIMES}")
    rng = as_rng(seed)
    return MixingSpec(regime, tuple(_one_matrix(regime, int(p), rng) for p in dims))


def sample_sources(grid, n, seed=None):
    """Standardized independent sources, shape ``(n, *grid.dims)``."""
    rng = as_rng(seed)
    Z = np.empty((n,) + grid.dims)
    for idx in np.ndindex(*grid.dims):
        Z[(slice(None),) + idx] = get_distribution(grid.names[idx]).sample(rng, n)
    return Z


def sample_ic(grid, mixing, n, seed=None, return_sources=False):
    """Draw ``X_i = Z_i ⊙_1 Ω_1 ... ⊙_r Ω_r`` from the IC model."""
    Z = sample_sources(grid, n, seed)
    X = sample_mode_product(Z, mixing.matrices)
    return (X, Z) if return_sources else X
