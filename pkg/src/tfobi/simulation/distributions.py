"""
Catalog of source laws used in the simulation studies.

Each entry samples a raw law and standardizes it with its analytic mean and
standard deviation. The standardized third, fourth and sixth moments are
closed-form values.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

SQRT3 = np.sqrt(3.0)
SQRT6 = np.sqrt(6.0)


@dataclass(frozen=True)
class SourceDistribution:
    name: str
    sampler: Callable  # (rng, size) -> raw draws
    mean: float
    sd: float
    gamma3: float  # E z^3
    beta: float  # E z^4
    m6: float  # E z^6

    def sample(self, rng, size):
        return (self.sampler(rng, size) - self.mean) / self.sd

    @property
    def omega(self):
        return self.m6 - self.gamma3 ** 2


def _gamma_moments(k):
    # standardized moments of Gamma(k, .) from its cumulants k (j-1)!
    return 2 / np.sqrt(k), 3 + 6 / k, 15 + 130 / k + 120 / k ** 2


def _gamma(name, shape, rate):
    g, b, m6 = _gamma_moments(shape)
    return SourceDistribution(
        name, lambda rng, size: rng.gamma(shape, 1 / rate, size),
        shape / rate, np.sqrt(shape) / rate, g, b, m6,
    )


def _chisq(name, df):
    g, b, m6 = _gamma_moments(df / 2)
    return SourceDistribution(
        name, lambda rng, size: rng.chisquare(df, size), df, np.sqrt(2 * df), g, b, m6,
    )


def _t(name, df):
    beta = 3 * (df - 2) / (df - 4)
    m6 = 15 * (df - 2) ** 2 / ((df - 4) * (df - 6))
    return SourceDistribution(
        name, lambda rng, size: rng.standard_t(df, size), 0.0, np.sqrt(df / (df - 2)), 0.0, beta, m6,
    )


CATALOG = {
    d.name: d
    for d in [
        SourceDistribution("uniform", lambda rng, s: rng.uniform(-SQRT3, SQRT3, s), 0.0, 1.0, 0.0, 9 / 5, 27 / 7),
        SourceDistribution("triangular", lambda rng, s: rng.triangular(-SQRT6, 0.0, SQRT6, s), 0.0, 1.0, 0.0, 12 / 5, 54 / 7),
        SourceDistribution("normal", lambda rng, s: rng.standard_normal(s), 0.0, 1.0, 0.0, 3.0, 15.0),
        _t("t10", 10),
        _gamma("gamma3", 3.0, SQRT3),
        SourceDistribution("laplace", lambda rng, s: rng.laplace(0.0, 1 / np.sqrt(2), s), 0.0, 1.0, 0.0, 6.0, 90.0),
        _chisq("chisq3", 3.0),
        _gamma("gamma1.2", 1.2, np.sqrt(1.2)),
        SourceDistribution("exp", lambda rng, s: rng.exponential(1.0, s), 1.0, 1.0, 2.0, 9.0, 265.0),
        _chisq("chisq1.5", 1.5),
        _chisq("chisq1.2", 1.2),
        # InvGauss(mean 1, shape 1): cumulants 1, 3, 15, 105, 945
        SourceDistribution("invgauss", lambda rng, s: rng.wald(1.0, 1.0, s), 1.0, 1.0, 3.0, 18.0, 1275.0),
        SourceDistribution("bernoulli", lambda rng, s: 2.0 * rng.integers(0, 2, s) - 1.0, 0.0, 1.0, 0.0, 1.0, 1.0),
    ]
}


def get_distribution(name):
    try:
        return CATALOG[name]
    except KeyError:
        raise ValueError(
            f"unknown distribution {name!r}; known: {', '.join(sorted(CATALOG))}"
        ) from None
