"""Logistic regression, plain and with a covariance fairness penalty.

Both are trained by full-batch gradient descent from zero on internally
standardized features (train mean/std; zero-variance features are dropped).
Fitted coefficients are mapped back to the raw feature space, so scoring
is a plain ``sigmoid(X @ coef + intercept)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from ..errors import MethodError, NonFiniteLoss
from .base import Estimator, Param, register

Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]


def sigmoid(z: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -z))


def _augment(Z: np.ndarray) -> np.ndarray:
    return np.hstack([Z, np.ones((Z.shape[0], 1))])


def logistic_objective(
    theta: np.ndarray, Z: np.ndarray, y: np.ndarray, sample_weight: np.ndarray, l2_penalty: float
) -> tuple[float, np.ndarray]:
    """Weighted mean log-loss + (l2/2)*||w||^2; ``theta = [w..., intercept]``."""
    A = _augment(Z)
    z = A @ theta
    wsum = sample_weight.sum()
    loss = float(np.sum(sample_weight * (np.logaddexp(0.0, z) - y * z)) / wsum)
    grad = A.T @ (sample_weight * (sigmoid(z) - y)) / wsum
    w = theta[:-1]
    loss += 0.5 * l2_penalty * float(w @ w)
    grad[:-1] += l2_penalty * w
    return loss, grad


def group_indicators(s: np.ndarray) -> tuple[np.ndarray, list[str]]:
    """Centered group indicator columns used by the fairness penalty.

    Two groups use a single column (indicator of the second level in symbol
    order); three or more use one column per group (one-vs-rest). One group
    yields no columns and therefore no penalty.
    """
    groups = np.asarray([str(g) for g in s], dtype=object)
    levels = sorted(set(groups.tolist()))
    if len(levels) < 2:
        return np.zeros((len(groups), 0)), levels
    used = levels[1:] if len(levels) == 2 else levels
    S = np.column_stack([(groups == g).astype(np.float64) for g in used])
    return S - S.mean(axis=0), levels


def covariance_penalty(theta: np.ndarray, Z: np.ndarray, S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column empirical covariances mean(s_j * (w.x + b)) and their Jacobian rows."""
    A = _augment(Z)
    n = Z.shape[0]
    z = A @ theta
    cov = S.T @ z / n
    jac = S.T @ A / n  # d cov_j / d theta
    return cov, jac


def fair_objective(
    theta: np.ndarray,
    Z: np.ndarray,
    y: np.ndarray,
    sample_weight: np.ndarray,
    S: np.ndarray,
    l2_penalty: float,
    fairness_lambda: float,
) -> tuple[float, np.ndarray]:
    loss, grad = logistic_objective(theta, Z, y, sample_weight, l2_penalty)
    if S.shape[1] and fairness_lambda:
        cov, jac = covariance_penalty(theta, Z, S)
        loss += fairness_lambda * float(cov @ cov)
        grad = grad + 2.0 * fairness_lambda * (jac.T @ cov)
    return loss, grad


@dataclass
class DescentResult:
    theta: np.ndarray
    n_iter: int
    converged: bool
    history: list[float] = field(default_factory=list)


def gradient_descent(fun: Objective, theta0: np.ndarray, learning_rate: float, max_iters: int, tol: float) -> DescentResult:
    """Fixed-step descent; stops when ``max|grad| < tol`` or after ``max_iters`` steps."""
    theta = np.array(theta0, dtype=np.float64)
    history: list[float] = []
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(max_iters + 1):
            value, grad = fun(theta)
            if not np.isfinite(value) or not np.all(np.isfinite(grad)):
                raise NonFiniteLoss(it, value)
            history.append(value)
            if np.max(np.abs(grad), initial=0.0) < tol:
                return DescentResult(theta, it, True, history)
            if it == max_iters:
                break
            theta = theta - learning_rate * grad
    return DescentResult(theta, max_iters, False, history)


@dataclass
class Standardizer:
    mean: np.ndarray
    std: np.ndarray
    keep: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> Standardizer:
        X = np.asarray(X, dtype=np.float64)
        std = X.std(axis=0)
        return cls(X.mean(axis=0), std, std > 0)

    def transform(self, X: np.ndarray) -> np.ndarray:
        k = self.keep
        return (np.asarray(X, dtype=np.float64)[:, k] - self.mean[k]) / self.std[k]

    def to_raw(self, theta: np.ndarray) -> tuple[np.ndarray, float]:
        """Map standardized-space ``[w, b]`` to raw-space coefficients and intercept."""
        coef = np.zeros(len(self.keep))
        w = theta[:-1]
        coef[self.keep] = w / self.std[self.keep]
        intercept = float(theta[-1] - np.sum(w * self.mean[self.keep] / self.std[self.keep]))
        return coef, intercept


@dataclass
class LogisticFit:
    coef: np.ndarray
    intercept: float
    theta: np.ndarray  # standardized-space parameters
    n_iter: int
    converged: bool
    history: list[float]


def _prepare(X, y, sample_weight):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y) or len(y) == 0:
        raise MethodError("features must be a non-empty 2-D array matching labels")
    if not np.all(np.isfinite(X)):
        raise MethodError("features must be finite")
    w = np.ones(len(y)) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    if len(w) != len(y) or np.any(w < 0) or w.sum() <= 0:
        raise MethodError("sample weights must be non-negative with positive total")
    scaler = Standardizer.fit(X)
    return scaler, scaler.transform(X), y, w


def _finish(scaler: Standardizer, res: DescentResult) -> LogisticFit:
    coef, intercept = scaler.to_raw(res.theta)
    return LogisticFit(coef, intercept, res.theta, res.n_iter, res.converged, res.history)


def logreg_fit(
    X: np.ndarray,
    y: np.ndarray,
    sample_weight: np.ndarray | None = None,
    *,
    learning_rate: float = 0.1,
    l2_penalty: float = 1e-3,
    max_iters: int = 500,
    tol: float = 1e-6,
) -> LogisticFit:
    scaler, Z, y, w = _prepare(X, y, sample_weight)
    res = gradient_descent(
        lambda th: logistic_objective(th, Z, y, w, l2_penalty),
        np.zeros(Z.shape[1] + 1),
        learning_rate,
        max_iters,
        tol,
    )
    return _finish(scaler, res)


def fair_logreg_fit(
    X: np.ndarray,
    y: np.ndarray,
    s: np.ndarray,
    sample_weight: np.ndarray | None = None,
    *,
    learning_rate: float = 0.1,
    l2_penalty: float = 1e-3,
    max_iters: int = 500,
    tol: float = 1e-6,
    fairness_lambda: float = 1.0,
) -> LogisticFit:
    """Logistic regression plus ``fairness_lambda * sum_j cov_j^2``.

    ``cov_j`` is the unweighted empirical mean of the centered group
    indicator times the linear score ``w.x + b`` on standardized features.
    """
    scaler, Z, y, w = _prepare(X, y, sample_weight)
    S, _ = group_indicators(s)
    res = gradient_descent(
        lambda th: fair_objective(th, Z, y, w, S, l2_penalty, fairness_lambda),
        np.zeros(Z.shape[1] + 1),
        learning_rate,
        max_iters,
        tol,
    )
    return _finish(scaler, res)


_GD_PARAMS = {
    "learning_rate": Param("float", 0.1, low=0.0, low_inclusive=False, doc="gradient step size"),
    "l2_penalty": Param("float", 1e-3, low=0.0),
    "max_iters": Param("int", 500, low=1),
    "tol": Param("float", 1e-6, low=0.0),
}


class _LinearScorer(Estimator):
    def predict_scores(self, X, s=None):
        self._require_fit()
        return sigmoid(np.asarray(X, dtype=np.float64) @ self.coef_ + self.intercept_)

    def _store(self, fit: LogisticFit) -> None:
        self.coef_ = fit.coef
        self.intercept_ = fit.intercept
        self.n_iter_ = fit.n_iter
        self.converged_ = fit.converged
        self.objective_history_ = fit.history
        self._fitted = True

    def learned_state(self) -> dict[str, Any]:
        return {"weights": self.coef_.tolist(), "intercept": self.intercept_, "n_iter": self.n_iter_}

    def load_state(self, state: Mapping[str, Any]) -> None:
        self.coef_ = np.asarray(state["weights"], dtype=np.float64)
        self.intercept_ = float(state["intercept"])
        self.n_iter_ = int(state.get("n_iter", 0))


@register
class LogisticRegression(_LinearScorer):
    kind = "logreg"
    PARAMS = dict(_GD_PARAMS)

    def fit(self, X, y, s=None, sample_weight=None):
        self._store(logreg_fit(X, y, sample_weight, **self.params))
        return self


@register
class FairLogisticRegression(_LinearScorer):
    kind = "fair_logreg"
    PARAMS = {**_GD_PARAMS, "fairness_lambda": Param("float", 1.0, low=0.0)}

    def fit(self, X, y, s=None, sample_weight=None):
        if s is None:
            raise MethodError("fair_logreg needs the sensitive attribute at fit time")
        self._store(fair_logreg_fit(X, y, s, sample_weight, **self.params))
        return self
