"""Surrogate regression from contact patterns to transferability scores.

Every transfer to the pseudo-real robot yields one exact score; the surrogate
generalizes those scores to the whole repertoire through a ridge regression on
the flattened stance matrix (600 zero/one features for a 100-tick episode).
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .simulator import SimOutcome

DESCRIPTOR_BITS = 600


def contact_descriptor(outcome: SimOutcome) -> np.ndarray:
    """Tick-major flattening of the stance matrix into a 0/1 vector."""
    bits = np.asarray(outcome.contacts, dtype=np.uint8).ravel()
    if bits.size != DESCRIPTOR_BITS:
        raise ValueError(
            f"expected a {DESCRIPTOR_BITS}-bit contact descriptor, got {bits.size}"
        )
    return bits


@dataclass(frozen=True)
class TransferRecord:
    """One ground-truth transfer: genotype, descriptor, both endpoints, exact score."""

    genotype: np.ndarray
    descriptor: np.ndarray
    sim_endpoint: np.ndarray
    real_endpoint: np.ndarray
    score: float

    def __post_init__(self):
        gap = float(np.hypot(*(np.asarray(self.sim_endpoint) - np.asarray(self.real_endpoint))))
        if abs(self.score + gap) > 1e-9:
            raise ValueError("transfer score must equal minus the endpoint gap")


class TransferabilityModel(RegressorMixin, BaseEstimator):
    """Ridge regression with intercept over contact-descriptor bits.

    Closed form on centered data; deterministic.  An unfitted model predicts
    the neutral score 0 for every descriptor instead of raising, so the
    evolution loop can rank controllers before the first transfer happens.
    """

    def __init__(self, alpha: float = 1e-3):
        self.alpha = alpha

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be 2-D (records x descriptor bits)")
        if X.shape[0] != y.shape[0] or X.shape[0] < 1:
            raise ValueError("need at least one record with matching X and y lengths")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        x_mean = X.mean(axis=0)
        y_mean = float(y.mean())
        xc = X - x_mean
        yc = y - y_mean
        gram = xc.T @ xc
        gram[np.diag_indices_from(gram)] += self.alpha
        self.coef_ = np.linalg.solve(gram, xc.T @ yc)
        self.intercept_ = y_mean - float(x_mean @ self.coef_)
        self.n_samples_ = X.shape[0]
        return self

    @property
    def is_fitted(self) -> bool:
        return hasattr(self, "coef_")

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        if single:
            X = X.reshape(1, -1)
        if not self.is_fitted:
            out = np.zeros(X.shape[0])
        else:
            out = self.intercept_ + X @ self.coef_
        return float(out[0]) if single else out
