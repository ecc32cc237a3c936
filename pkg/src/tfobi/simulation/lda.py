"""Two-class linear discriminant analysis with training-proportion priors."""

from dataclasses import dataclass

import numpy as np

from ..errors import SingularCovarianceError


@dataclass(frozen=True)
class LdaModel:
    classes: np.ndarray
    coef: np.ndarray  # per-class linear weights, shape (2, d)
    intercept: np.ndarray  # per-class constants, shape (2,)


def lda_fit(features, labels):
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(labels)
    classes = np.unique(y)
    if classes.size != 2:
        raise ValueError(f"LDA here needs exactly two classes, got {classes.size}")
    n = X.shape[0]
    means, priors = [], []
    pooled = np.zeros((X.shape[1], X.shape[1]))
    for c in classes:
        Xc = X[y == c]
        mu = Xc.mean(axis=0)
        means.append(mu)
        priors.append(Xc.shape[0] / n)
        D = Xc - mu
        pooled += D.T @ D
    pooled /= n - 2
    lam = np.linalg.eigvalsh(pooled)
    if lam[0] <= 1e-12 * max(lam[-1], 1e-300):
        raise SingularCovarianceError(
            f"pooled covariance is singular (smallest eigenvalue {lam[0]:.3e})",
            eigenvalue=float(lam[0]),
        )
    means = np.array(means)
    coef = np.linalg.solve(pooled, means.T).T
    intercept = -0.5 * np.einsum("kd,kd->k", coef, means) + np.log(priors)
    return LdaModel(classes, coef, intercept)


def lda_predict(model, features):
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    scores = X @ model.coef.T + model.intercept
    return model.classes[np.argmax(scores, axis=1)]
