"""Positive-only label model: simplex-weighted vote aggregation.

The scorer is ``f(v) = v . theta`` with ``theta`` on the probability
simplex, fitted by projected subgradient descent on a convex objective:
a squared-norm regularizer, hinge penalties on the covering-order
constraints, and (optionally) an absolute deviation between the mean
score and the known positive prior. With ``theta`` on the simplex every
covering constraint holds by construction, so the hinge penalties act as
a guard rail rather than an active force.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .covering import ConstraintMatrix, constraint_matrix, hasse_edges
from .data import Dataset, Prior, build_slices, coverage_mask


@dataclass(frozen=True)
class WeapoConfig:
    """Solver and objective settings.

    ``lambda_reg`` scales the squared-norm regularizer, ``prior_weight``
    the absolute prior-deviation term (used only when ``use_prior``).
    ``step0`` is the base step size of the ``step0 / sqrt(t)`` schedule.
    The solver stops at ``max_iters`` or once the best objective improves
    by less than ``tol`` over a 50-iteration window.
    """

    lambda_reg: float = 1.0
    use_prior: bool = True
    prior_weight: float = 1.0
    max_iters: int = 5000
    step0: float = 0.5
    tol: float = 1e-8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lambda_reg < 0:
            raise ValueError("lambda_reg must be non-negative")
        if self.prior_weight < 0:
            raise ValueError("prior_weight must be non-negative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.step0 <= 0:
            raise ValueError("step0 must be positive")
        if self.tol < 0:
            raise ValueError("tol must be non-negative")


@dataclass(frozen=True, eq=False)
class WeapoModel:
    """Fitted aggregation weights plus the config and fit diagnostics."""

    theta: np.ndarray
    config: WeapoConfig
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def num_lfs(self) -> int:
        return int(self.theta.shape[0])

    def to_json_dict(self) -> dict[str, Any]:
        """JSON-ready payload; theta round-trips at full precision."""
        diag = {
            k: v
            for k, v in self.diagnostics.items()
            if isinstance(v, (int, float, bool, str))
        }
        return {
            "theta": [float(x) for x in self.theta],
            "config": asdict(self.config),
            "diagnostics": diag,
        }

    @classmethod
    def from_json_dict(cls, payload: dict[str, Any]) -> "WeapoModel":
        return cls(
            theta=np.array(payload["theta"], dtype=np.float64),
            config=WeapoConfig(**payload["config"]),
            diagnostics=dict(payload.get("diagnostics", {})),
        )


def project_simplex(weights: Sequence[float]) -> np.ndarray:
    """Euclidean projection onto the probability simplex.

    Sort-based algorithm: find the largest support size whose shifted
    values stay positive, then clamp. O(M log M).
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-D array")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, w.size + 1)
    support = np.nonzero(u * ks > css - 1.0)[0][-1]
    tau = (css[support] - 1.0) / (support + 1.0)
    return np.maximum(w - tau, 0.0)


def score(model: WeapoModel, votes: Sequence[int]) -> float:
    """Score one vote vector: the theta-weighted sum of its fired bits."""
    if len(votes) != model.num_lfs:
        raise ValueError(
            f"vote vector has length {len(votes)}, model expects {model.num_lfs}"
        )
    return float(np.dot(np.asarray(votes, dtype=np.float64), model.theta))


def predict_dataset(model: WeapoModel, dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Scores for every record plus the coverage mask.

    Uncovered records score exactly 0 since all their vote bits are 0.
    """
    if dataset.num_lfs != model.num_lfs:
        raise ValueError(
            f"dataset has {dataset.num_lfs} labeling functions, model expects {model.num_lfs}"
        )
    scores = dataset.votes_matrix.astype(np.float64) @ model.theta
    return scores, coverage_mask(dataset)


def objective(
    theta: np.ndarray,
    constraints: ConstraintMatrix,
    dataset: Dataset,
    prior: Prior | None = None,
    config: WeapoConfig | None = None,
) -> tuple[float, dict[str, float]]:
    """Evaluate the full objective and its per-term breakdown.

    Returns ``(total, terms)`` with ``terms`` holding the regularizer,
    the summed hinge penalties, and the raw prior deviation (0 when the
    prior term is disabled). ``total`` is ``reg + hinge +
    prior_weight * prior``.
    """
    cfg = config if config is not None else WeapoConfig()
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (dataset.num_lfs,):
        raise ValueError(
            f"theta must have shape ({dataset.num_lfs},), got {theta.shape}"
        )
    if cfg.use_prior and prior is None:
        raise ValueError("config.use_prior is set but no prior was given")
    f = dataset.votes_matrix.astype(np.float64) @ theta
    reg = cfg.lambda_reg * float(theta @ theta)
    if constraints.num_rows:
        hinge = float(np.maximum(constraints.apply(f), 0.0).sum())
    else:
        hinge = 0.0
    if cfg.use_prior:
        prior_dev = abs(float(f.mean()) - prior.p_plus)
    else:
        prior_dev = 0.0
    total = reg + hinge + cfg.prior_weight * prior_dev
    return total, {"reg": reg, "hinge": hinge, "prior": prior_dev}


def _reduced_problem(dataset: Dataset):
    """Collapse the dataset to unique covered vote vectors.

    Returns the slice table, Hasse edges, the (K, M) matrix of unique
    vectors, the (d, M) matrix of low-minus-high vector differences, and
    the mean vote vector over all N records (the gradient of the mean
    score in theta).
    """
    slices = build_slices(dataset)
    if not slices.slices:
        raise ValueError("dataset has no covered records")
    edges = hasse_edges(slices.slices.keys())
    u_index = {v: i for i, v in enumerate(slices.slices.keys())}
    u = np.array(list(slices.slices.keys()), dtype=np.float64)
    if edges:
        low = np.array([u_index[e.low] for e in edges], dtype=np.intp)
        high = np.array([u_index[e.high] for e in edges], dtype=np.intp)
        diff = u[low] - u[high]
    else:
        diff = np.zeros((0, dataset.num_lfs), dtype=np.float64)
    mean_votes = dataset.votes_matrix.astype(np.float64).mean(axis=0)
    return slices, edges, u, diff, mean_votes


def fit(
    dataset: Dataset,
    prior: Prior | None = None,
    config: WeapoConfig | None = None,
) -> WeapoModel:
    """Fit aggregation weights by projected subgradient descent.

    Parameters
    ----------
    dataset : Dataset
        Must contain at least one covered record. Gold labels are ignored.
    prior : Prior, optional
        Required when ``config.use_prior`` is set.
    config : WeapoConfig, optional

    Returns
    -------
    WeapoModel
        The best iterate found. ``diagnostics`` carries the final
        objective with its per-term breakdown, the iteration count, a
        convergence flag, and the non-increasing best-objective history.

    Notes
    -----
    Deterministic: identical inputs produce bitwise-identical theta. The
    iteration starts at the uniform vector, steps along the negative
    subgradient with step size ``step0 / sqrt(t)``, projects back onto
    the simplex, and reports the iterate with the lowest objective seen.
    """
    cfg = config if config is not None else WeapoConfig()
    if cfg.use_prior and prior is None:
        raise ValueError("config.use_prior is set but no prior was given")
    slices, edges, _, diff, mean_votes = _reduced_problem(dataset)
    m = dataset.num_lfs

    def reduced_objective(th: np.ndarray) -> float:
        total = cfg.lambda_reg * float(th @ th)
        if diff.shape[0]:
            total += float(np.maximum(diff @ th, 0.0).sum())
        if cfg.use_prior:
            total += cfg.prior_weight * abs(float(mean_votes @ th) - prior.p_plus)
        return total

    theta = np.full(m, 1.0 / m, dtype=np.float64)
    best_theta = theta.copy()
    best_value = reduced_objective(theta)
    history = [best_value]
    window = 50
    converged = False
    iterations = 0
    for t in range(1, cfg.max_iters + 1):
        iterations = t
        grad = 2.0 * cfg.lambda_reg * theta
        if diff.shape[0]:
            active = diff @ theta > 0.0
            if active.any():
                grad = grad + diff[active].sum(axis=0)
        if cfg.use_prior:
            residual = float(mean_votes @ theta) - prior.p_plus
            if residual > 0.0:
                grad = grad + cfg.prior_weight * mean_votes
            elif residual < 0.0:
                grad = grad - cfg.prior_weight * mean_votes
        theta = project_simplex(theta - (cfg.step0 / np.sqrt(t)) * grad)
        value = reduced_objective(theta)
        if value < best_value:
            best_value = value
            best_theta = theta.copy()
        history.append(best_value)
        if t >= window and history[-window - 1] - best_value < cfg.tol:
            converged = True
            break

    constraints = constraint_matrix(slices, edges)
    total, terms = objective(best_theta, constraints, dataset, prior, cfg)
    diagnostics: dict[str, Any] = {
        "objective": total,
        "reg": terms["reg"],
        "hinge": terms["hinge"],
        "prior": terms["prior"],
        "iterations": iterations,
        "converged": converged,
        "num_edges": len(edges),
        "num_slices": len(slices.slices),
        "objective_history": history,
    }
    return WeapoModel(theta=best_theta, config=cfg, diagnostics=diagnostics)


def fit_supervised(dataset: Dataset, config: WeapoConfig | None = None) -> WeapoModel:
    """Least-squares fit of the same simplex scorer against gold labels.

    Minimizes the mean squared error between covered-record scores and
    gold targets mapped to {0, 1}, over the probability simplex, by
    projected gradient descent with a fixed ``1/L`` step. Serves as the
    fully supervised skyline for the same model class.
    """
    cfg = config if config is not None else WeapoConfig()
    mask = coverage_mask(dataset).astype(bool)
    if not mask.any():
        raise ValueError("dataset has no covered records")
    missing = [r.id for r, m in zip(dataset.records, mask) if m and r.gold is None]
    if missing:
        raise ValueError(f"covered record {missing[0]!r} has no gold label")
    votes = dataset.votes_matrix[mask].astype(np.float64)
    gold = np.array([r.gold for r, m in zip(dataset.records, mask) if m], dtype=np.float64)
    targets = (gold + 1.0) / 2.0
    n = votes.shape[0]
    gram = (2.0 / n) * (votes.T @ votes)
    linear = (2.0 / n) * (votes.T @ targets)
    lipschitz = float(np.linalg.eigvalsh(gram)[-1])
    step = 1.0 / lipschitz
    m = dataset.num_lfs
    theta = np.full(m, 1.0 / m, dtype=np.float64)
    grad_map_norm = np.inf
    iterations = 0
    for t in range(1, cfg.max_iters + 1):
        iterations = t
        grad = gram @ theta - linear
        theta_next = project_simplex(theta - step * grad)
        grad_map_norm = float(np.linalg.norm(theta - theta_next) / step)
        theta = theta_next
        if grad_map_norm <= 1e-6:
            break
    residual = votes @ theta - targets
    diagnostics = {
        "mse": float(residual @ residual / n),
        "grad_map_norm": grad_map_norm,
        "iterations": iterations,
        "converged": grad_map_norm <= 1e-6,
    }
    return WeapoModel(theta=theta, config=cfg, diagnostics=diagnostics)
