"""Feature-space end model trained on label-model scores.

Kernel ridge regression with an RBF kernel. Training targets come from
the label model: covered records keep their scores, uncovered records
fall back to a policy constant (default 0, i.e. treated as negative).
The end model generalizes past coverage because it scores features, not
votes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve


@dataclass(frozen=True)
class TargetPolicy:
    """How to fill regression targets where no labeling function fired."""

    uncovered_target: float = 0.0


def make_targets(
    scores: np.ndarray,
    coverage: np.ndarray,
    policy: TargetPolicy | None = None,
) -> np.ndarray:
    """Regression targets: label-model scores with uncovered rows replaced."""
    policy = policy if policy is not None else TargetPolicy()
    scores = np.asarray(scores, dtype=np.float64)
    coverage = np.asarray(coverage)
    if scores.shape != coverage.shape or scores.ndim != 1:
        raise ValueError("scores and coverage must be aligned 1-D arrays")
    targets = scores.copy()
    targets[~coverage.astype(bool)] = policy.uncovered_target
    return targets


@dataclass(frozen=True, eq=False)
class KRRModel:
    """Fitted kernel ridge regressor: support points plus dual coefficients."""

    support: np.ndarray
    coefficients: np.ndarray
    gamma: float
    alpha: float

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "support": [[float(x) for x in row] for row in self.support],
            "coefficients": [float(c) for c in self.coefficients],
            "gamma": self.gamma,
            "alpha": self.alpha,
        }

    @classmethod
    def from_json_dict(cls, payload: dict[str, Any]) -> "KRRModel":
        return cls(
            support=np.array(payload["support"], dtype=np.float64),
            coefficients=np.array(payload["coefficients"], dtype=np.float64),
            gamma=float(payload["gamma"]),
            alpha=float(payload["alpha"]),
        )


def rbf_kernel(x: np.ndarray, y: np.ndarray, gamma: float) -> np.ndarray:
    """exp(-gamma * squared distance) for every row pair."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"feature widths differ ({x.shape[1]} vs {y.shape[1]})")
    sq = (
        (x * x).sum(axis=1)[:, None]
        + (y * y).sum(axis=1)[None, :]
        - 2.0 * (x @ y.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def default_gamma(features: np.ndarray) -> float:
    """Median-free bandwidth heuristic: 1 / (F * var(features))."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    var = float(features.var())
    if var <= 0.0:
        return 1.0
    return 1.0 / (features.shape[1] * var)


def fit_krr(
    features: np.ndarray,
    targets: np.ndarray,
    gamma: float | None = None,
    alpha: float = 1.0,
) -> KRRModel:
    """Solve (K + alpha * I) c = targets with a dense Cholesky factorization.

    Parameters
    ----------
    features : (N, F) array
    targets : (N,) array
    gamma : float, optional
        RBF bandwidth; defaults to ``1 / (F * var(features))``.
    alpha : float
        Ridge strength. ``alpha = 0`` requests exact interpolation and
        fails with a clear error when the kernel matrix is singular
        (duplicate points).

    Notes
    -----
    The solve is verified: the residual norm must not exceed
    ``1e-8 * (1 + ||targets||)``.
    """
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    targets = np.asarray(targets, dtype=np.float64)
    if features.shape[0] != targets.shape[0] or targets.ndim != 1:
        raise ValueError("features and targets must have matching first dimension")
    if features.shape[0] == 0:
        raise ValueError("cannot fit on an empty training set")
    if alpha < 0.0:
        raise ValueError("alpha must be non-negative")
    if gamma is None:
        gamma = default_gamma(features)
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    kernel = rbf_kernel(features, features, gamma)
    system = kernel + alpha * np.eye(features.shape[0])
    try:
        coefficients = cho_solve(cho_factor(system), targets)
    except LinAlgError:
        raise ValueError(
            "kernel system is singular; alpha = 0 requires distinct points"
        ) from None
    residual = float(np.linalg.norm(system @ coefficients - targets))
    if residual > 1e-8 * (1.0 + float(np.linalg.norm(targets))):
        raise ValueError(
            f"kernel solve residual {residual:.3e} too large; "
            "the system is numerically singular"
        )
    return KRRModel(
        support=features.copy(),
        coefficients=coefficients,
        gamma=float(gamma),
        alpha=float(alpha),
    )


def predict_krr(model: KRRModel, features: np.ndarray) -> np.ndarray:
    """Kernel expansion over the support points."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if features.shape[1] != model.support.shape[1]:
        raise ValueError(
            f"features have width {features.shape[1]}, "
            f"model expects {model.support.shape[1]}"
        )
    return rbf_kernel(features, model.support, model.gamma) @ model.coefficients
