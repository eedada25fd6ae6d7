"""From-scratch Gaussian-process regression with UCB acquisition.

The surrogate is a zero-mean GP with a squared-exponential kernel,

    k(x, x') = variance * exp(-||x - x'||^2 / (2 * lengthscale^2)),

fit by Cholesky factorization of ``K + jitter * I``. Targets are standardized
to zero mean / unit variance internally by default (the inverse transform is
applied on prediction), so the kernel variance is expressed in standardized
units. Posterior queries do not add the jitter term, hence the posterior mean
interpolates the training targets up to O(jitter).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.spatial.distance import cdist


class GpNumericalError(RuntimeError):
    """Raised when the kernel matrix stays indefinite after jitter escalation."""


@dataclass(frozen=True)
class GpHyperparams:
    """Kernel and conditioning knobs shared by all GP instances."""

    lengthscale: float = 0.25
    variance: float = 1.0
    jitter: float = 1e-8
    standardize: bool = True

    def __post_init__(self) -> None:
        if self.lengthscale <= 0 or self.variance <= 0 or self.jitter <= 0:
            raise ValueError("lengthscale, variance and jitter must be positive")


@dataclass(frozen=True)
class UcbParams:
    """Exploration weight of the upper-confidence-bound acquisition score."""

    kappa: float

    def __post_init__(self) -> None:
        if self.kappa < 0:
            raise ValueError("kappa must be nonnegative")


class GpModel:
    """An immutable fitted GP. Build with :func:`gp_fit` or :meth:`prior`."""

    def __init__(
        self,
        x: np.ndarray,
        y: np.ndarray,
        hyperparams: GpHyperparams,
        chol: np.ndarray | None,
        alpha: np.ndarray | None,
        y_mean: float,
        y_scale: float,
        effective_jitter: float,
    ):
        self.x = x
        self.y = y
        self.hyperparams = hyperparams
        self._chol = chol
        self._alpha = alpha
        self.y_mean = y_mean
        self.y_scale = y_scale
        self.effective_jitter = effective_jitter

    @classmethod
    def prior(cls, dim: int, hyperparams: GpHyperparams = GpHyperparams()) -> "GpModel":
        """The data-free model: constant mean 0 and prior standard deviation."""
        empty = np.empty((0, dim))
        return cls(empty, np.empty(0), hyperparams, None, None, 0.0, 1.0, hyperparams.jitter)

    @property
    def n_observations(self) -> int:
        return self.x.shape[0]

    def _kernel(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        hp = self.hyperparams
        sq = cdist(a, b, "sqeuclidean")
        return hp.variance * np.exp(-sq / (2.0 * hp.lengthscale**2))

    def predict(self, queries) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and standard deviation at each query point.

        Accepts an (m, d) array; returns two length-m arrays. Round-off can
        push the posterior variance a hair below zero, which is clipped.
        """
        queries = np.atleast_2d(np.asarray(queries, dtype=float))
        hp = self.hyperparams
        if self.n_observations == 0:
            mean = np.full(queries.shape[0], self.y_mean)
            std = np.full(queries.shape[0], np.sqrt(hp.variance) * self.y_scale)
            return mean, std
        k_star = self._kernel(self.x, queries)
        mean_std_units = k_star.T @ self._alpha
        v = solve_triangular(self._chol, k_star, lower=True)
        var = np.clip(hp.variance - np.einsum("ij,ij->j", v, v), 0.0, None)
        mean = self.y_mean + self.y_scale * mean_std_units
        std = self.y_scale * np.sqrt(var)
        return mean, std

    def predict_one(self, query) -> tuple[float, float]:
        mean, std = self.predict(np.asarray(query, dtype=float).reshape(1, -1))
        return float(mean[0]), float(std[0])


def gp_fit(points, targets, hyperparams: GpHyperparams = GpHyperparams()) -> GpModel:
    """Fit a GP to observations, escalating jitter (x10, three retries) if needed."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    y = np.asarray(targets, dtype=float).ravel()
    if x.shape[0] == 0:
        raise ValueError("gp_fit requires at least one observation")
    if x.shape[0] != y.shape[0]:
        raise ValueError("points and targets length mismatch")

    if hyperparams.standardize:
        y_mean = float(y.mean())
        y_scale = float(y.std())
        if y_scale < 1e-12:
            y_scale = 1.0
    else:
        y_mean, y_scale = 0.0, 1.0
    t = (y - y_mean) / y_scale

    sq = cdist(x, x, "sqeuclidean")
    k = hyperparams.variance * np.exp(-sq / (2.0 * hyperparams.lengthscale**2))
    jitter = hyperparams.jitter
    chol = None
    for _ in range(4):  # initial attempt + 3 escalations
        try:
            chol = cholesky(k + jitter * np.eye(x.shape[0]), lower=True)
            break
        except np.linalg.LinAlgError:
            jitter *= 10.0
    else:
        raise GpNumericalError(
            f"kernel matrix not positive definite up to jitter {jitter / 10.0:g}"
        )
    alpha = cho_solve((chol, True), t)
    return GpModel(x, y, hyperparams, chol, alpha, y_mean, y_scale, jitter)


def gp_predict(model: GpModel, query_point) -> tuple[float, float]:
    """Posterior (mean, std) at a single point."""
    return model.predict_one(query_point)


def ucb_scores(model: GpModel, candidates, params: UcbParams) -> np.ndarray:
    """UCB score ``mean + kappa * std`` for each candidate point."""
    mean, std = model.predict(candidates)
    return mean + params.kappa * std


def ucb_acquire(model: GpModel, candidates, params: UcbParams) -> np.ndarray:
    """The candidate maximizing the UCB score; ties go to the lowest index."""
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    if candidates.shape[0] == 0:
        raise ValueError("candidates must be nonempty")
    scores = ucb_scores(model, candidates, params)
    return candidates[int(np.argmax(scores))]
