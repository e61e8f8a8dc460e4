"""Baseline label models over signed votes.

Positive-only votes carry no explicit negative evidence, so every
baseline here first maps abstains to negative votes: 0 -> -1, 1 -> +1.
Majority vote scores by the fraction of firing functions; Dawid-Skene
fits per-function confusion matrices by EM under a naive-Bayes model;
the triplet method recovers mean accuracies E[vote * y] from second
moments in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.special import expit, xlog1py, xlogy

from .data import Dataset, Prior

SignedVotes = np.ndarray
"""(N, M) array over {-1, +1}; produced by ``convert_abstain``."""


def convert_abstain(dataset: Dataset) -> SignedVotes:
    """Map vote bits to signed votes, treating abstain as negative."""
    return (2 * dataset.votes_matrix.astype(np.int8) - 1).astype(np.int8)


def mv_score(votes: Sequence[int]) -> float:
    """Majority-vote score: the fraction of labeling functions that fired."""
    v = np.asarray(votes)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("votes must be a non-empty 1-D sequence")
    if not np.isin(v, (0, 1)).all():
        raise ValueError("votes must be 0/1 bits")
    return float(v.mean())


def mv_scores(dataset: Dataset) -> np.ndarray:
    """Majority-vote scores for every record."""
    return dataset.votes_matrix.astype(np.float64).mean(axis=1)


def _check_signed(signed: np.ndarray) -> np.ndarray:
    signed = np.asarray(signed)
    if signed.ndim != 2 or signed.shape[0] == 0 or signed.shape[1] == 0:
        raise ValueError("signed votes must be a non-empty (N, M) array")
    if not np.isin(signed, (-1, 1)).all():
        raise ValueError("signed votes must take values in {-1, +1}")
    return signed


@dataclass(frozen=True, eq=False)
class DSModel:
    """Naive-Bayes vote model: class prior plus per-function confusion.

    ``confusion`` has shape (M, 2, 2) indexed ``[j, c, o]`` with class
    index c and vote index o mapping 0 -> -1 and 1 -> +1, so
    ``confusion[j, 1, 1]`` is P(vote_j = +1 | y = +1). Rows over o sum
    to 1.
    """

    class_prior: float
    confusion: np.ndarray
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def num_lfs(self) -> int:
        return int(self.confusion.shape[0])

    def to_json_dict(self) -> dict[str, Any]:
        diag = {
            k: v
            for k, v in self.diagnostics.items()
            if isinstance(v, (int, float, bool, str))
        }
        return {
            "class_prior": float(self.class_prior),
            "confusion": [[list(map(float, row)) for row in mat] for mat in self.confusion],
            "diagnostics": diag,
        }

    @classmethod
    def from_json_dict(cls, payload: dict[str, Any]) -> "DSModel":
        return cls(
            class_prior=float(payload["class_prior"]),
            confusion=np.array(payload["confusion"], dtype=np.float64),
            diagnostics=dict(payload.get("diagnostics", {})),
        )


def _ds_objective(
    v01: np.ndarray,
    pi: float,
    pos_fire: np.ndarray,
    neg_fire: np.ndarray,
    smoothing: float,
) -> tuple[float, float, np.ndarray, np.ndarray]:
    """Penalized EM objective plus the per-record class log-scores.

    The data term is summed with ``math.fsum`` so the recorded history is
    monotone down to rounding of the final digit rather than of the
    accumulated sum. ``xlogy``-style products keep zero-count terms at
    exactly zero even when a rate sits on the boundary.
    """
    lp = (
        math.log(pi)
        + xlogy(v01, pos_fire).sum(axis=1)
        + xlog1py(1.0 - v01, -pos_fire).sum(axis=1)
    )
    ln = (
        math.log1p(-pi)
        + xlogy(v01, neg_fire).sum(axis=1)
        + xlog1py(1.0 - v01, -neg_fire).sum(axis=1)
    )
    data_term = math.fsum(np.logaddexp(lp, ln))
    penalty = 0.0
    if smoothing > 0.0:
        penalty = smoothing * (
            math.log(pi)
            + math.log1p(-pi)
            + float(np.log(pos_fire).sum() + np.log1p(-pos_fire).sum())
            + float(np.log(neg_fire).sum() + np.log1p(-neg_fire).sum())
        )
    return data_term + penalty, data_term, lp, ln


def ds_fit(
    signed_votes: SignedVotes,
    init_prior: Prior,
    max_iters: int = 100,
    tol: float = 1e-6,
    smoothing: float = 1.0,
    init_confusion: np.ndarray | None = None,
) -> DSModel:
    """Fit the Dawid-Skene model by EM.

    Parameters
    ----------
    signed_votes : (N, M) array over {-1, +1}
    init_prior : Prior
        Initial class prior; EM updates it along with the confusions.
    max_iters, tol : int, float
        EM stops when the objective improves by less than ``tol`` or
        after ``max_iters`` iterations.
    smoothing : float
        Add-``smoothing`` Laplace counts in every re-estimation, which
        makes the fit the MAP under Beta(1 + smoothing, 1 + smoothing)
        priors. The recorded objective history includes the matching
        log-prior terms and is therefore non-decreasing.
    init_confusion : (M, 2, 2) array, optional
        Start EM from explicit confusion matrices instead of the
        majority-vote initialization.

    Notes
    -----
    Without ``init_confusion``, responsibilities start at the mean of the
    per-record positive-vote fraction and the prior, and the first
    parameter estimate is one M-step from there. After convergence the
    classes are canonicalized so the one with the larger
    posterior-weighted mean signed vote is +1.
    """
    signed = _check_signed(signed_votes)
    if smoothing < 0:
        raise ValueError("smoothing must be non-negative")
    n, m = signed.shape
    v01 = (signed > 0).astype(np.float64)

    def m_step(resp: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        # Exact ratios of counts stay in [0, 1]; the clip only removes
        # one-ulp float overshoot that would poison the log terms.
        total_pos = resp.sum()
        pos_fire = np.clip(
            (v01.T @ resp + smoothing) / (total_pos + 2.0 * smoothing), 0.0, 1.0
        )
        neg_fire = np.clip(
            (v01.T @ (1.0 - resp) + smoothing) / ((n - total_pos) + 2.0 * smoothing),
            0.0,
            1.0,
        )
        pi = min(max((total_pos + smoothing) / (n + 2.0 * smoothing), 0.0), 1.0)
        return float(pi), pos_fire, neg_fire

    if init_confusion is not None:
        init_confusion = np.asarray(init_confusion, dtype=np.float64)
        if init_confusion.shape != (m, 2, 2):
            raise ValueError(f"init_confusion must have shape ({m}, 2, 2)")
        pi = init_prior.p_plus
        pos_fire = init_confusion[:, 1, 1].copy()
        neg_fire = init_confusion[:, 0, 1].copy()
    else:
        resp0 = 0.5 * v01.mean(axis=1) + 0.5 * init_prior.p_plus
        pi, pos_fire, neg_fire = m_step(resp0)

    objective, data_ll, lp, ln = _ds_objective(v01, pi, pos_fire, neg_fire, smoothing)
    history = [objective]
    converged = False
    iterations = 0
    for t in range(1, max_iters + 1):
        iterations = t
        resp = expit(lp - ln)
        pi, pos_fire, neg_fire = m_step(resp)
        objective, data_ll, lp, ln = _ds_objective(v01, pi, pos_fire, neg_fire, smoothing)
        history.append(objective)
        if history[-1] - history[-2] < tol:
            converged = True
            break

    # Canonicalize label switching: class +1 is the one whose
    # posterior-weighted mean signed vote is larger.
    resp = expit(lp - ln)
    mean_signed = signed.astype(np.float64).mean(axis=1)
    weight_pos = resp.sum()
    weight_neg = n - weight_pos
    if weight_pos > 0.0 and weight_neg > 0.0:
        side_pos = float(resp @ mean_signed) / weight_pos
        side_neg = float((1.0 - resp) @ mean_signed) / weight_neg
        if side_pos < side_neg:
            pi = 1.0 - pi
            pos_fire, neg_fire = neg_fire.copy(), pos_fire.copy()

    confusion = np.empty((m, 2, 2), dtype=np.float64)
    confusion[:, 1, 1] = pos_fire
    confusion[:, 1, 0] = 1.0 - pos_fire
    confusion[:, 0, 1] = neg_fire
    confusion[:, 0, 0] = 1.0 - neg_fire
    diagnostics: dict[str, Any] = {
        "objective": float(history[-1]),
        "log_likelihood": float(data_ll),
        "iterations": iterations,
        "converged": converged,
        "objective_history": [float(x) for x in history],
    }
    return DSModel(class_prior=float(pi), confusion=confusion, diagnostics=diagnostics)


def _ds_log_scores(model: DSModel, signed: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    v01 = (signed > 0).astype(np.float64)
    conf = model.confusion
    lp = (
        math.log(model.class_prior)
        + xlogy(v01, conf[:, 1, 1]).sum(axis=1)
        + xlogy(1.0 - v01, conf[:, 1, 0]).sum(axis=1)
    )
    ln = (
        math.log1p(-model.class_prior)
        + xlogy(v01, conf[:, 0, 1]).sum(axis=1)
        + xlogy(1.0 - v01, conf[:, 0, 0]).sum(axis=1)
    )
    return lp, ln


def ds_posteriors(model: DSModel, signed_votes: SignedVotes) -> np.ndarray:
    """P(y = +1 | votes) for every record under the fitted naive-Bayes model."""
    signed = _check_signed(signed_votes)
    if signed.shape[1] != model.num_lfs:
        raise ValueError(
            f"votes have {signed.shape[1]} columns, model expects {model.num_lfs}"
        )
    lp, ln = _ds_log_scores(model, signed)
    impossible = np.isneginf(lp) & np.isneginf(ln)
    if impossible.any():
        raise ValueError("vote vector has zero probability under the model")
    return expit(lp - ln)


def ds_posterior(model: DSModel, signed_votes: Sequence[int]) -> float:
    """Posterior for a single signed vote vector."""
    return float(ds_posteriors(model, np.asarray(signed_votes).reshape(1, -1))[0])


@dataclass(frozen=True, eq=False)
class FSModel:
    """Triplet-method estimates of mean accuracies a_j = E[vote_j * y]."""

    accuracies: np.ndarray
    class_prior: float

    @property
    def num_lfs(self) -> int:
        return int(self.accuracies.shape[0])

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "accuracies": [float(a) for a in self.accuracies],
            "class_prior": float(self.class_prior),
        }

    @classmethod
    def from_json_dict(cls, payload: dict[str, Any]) -> "FSModel":
        return cls(
            accuracies=np.array(payload["accuracies"], dtype=np.float64),
            class_prior=float(payload["class_prior"]),
        )


def fs_fit_from_moments(
    moments: np.ndarray,
    prior: Prior,
    eps_clip: float = 1e-4,
) -> FSModel:
    """Recover mean accuracies from a second-moment matrix.

    For each function j, every pair (k, l) of other functions gives the
    candidate ``sqrt(|M_jk * M_jl / M_kl|)``; candidates whose denominator
    moment is at most ``eps_clip`` in magnitude are discarded, and the
    estimate is the median of the rest, clipped into
    ``[0, 1 - eps_clip]``. Signs are fixed positive: better-than-random
    functions are assumed.

    Raises
    ------
    ValueError
        If fewer than three functions are present, or some function has
        no admissible triplet.
    """
    moments = np.asarray(moments, dtype=np.float64)
    if moments.ndim != 2 or moments.shape[0] != moments.shape[1]:
        raise ValueError("moments must be a square matrix")
    m = moments.shape[0]
    if m < 3:
        raise ValueError("triplet method requires M >= 3")
    accuracies = np.empty(m, dtype=np.float64)
    for j in range(m):
        others = [k for k in range(m) if k != j]
        estimates = []
        for a in range(len(others)):
            for b in range(a + 1, len(others)):
                k, l = others[a], others[b]
                denom = moments[k, l]
                if abs(denom) > eps_clip:
                    estimates.append(
                        math.sqrt(abs(moments[j, k] * moments[j, l] / denom))
                    )
        if not estimates:
            raise ValueError(f"no admissible triplet for labeling function {j}")
        accuracies[j] = min(max(float(np.median(estimates)), 0.0), 1.0 - eps_clip)
    return FSModel(accuracies=accuracies, class_prior=prior.p_plus)


def fs_fit(signed_votes: SignedVotes, prior: Prior, eps_clip: float = 1e-4) -> FSModel:
    """Triplet-method fit from data: empirical moments, then recovery."""
    signed = _check_signed(signed_votes).astype(np.float64)
    n = signed.shape[0]
    moments = (signed.T @ signed) / n
    return fs_fit_from_moments(moments, prior, eps_clip=eps_clip)


def fs_posteriors(model: FSModel, signed_votes: SignedVotes) -> np.ndarray:
    """P(y = +1 | votes) treating functions as conditionally independent
    symmetric channels with accuracy (1 + a_j) / 2."""
    signed = _check_signed(signed_votes).astype(np.float64)
    if signed.shape[1] != model.num_lfs:
        raise ValueError(
            f"votes have {signed.shape[1]} columns, model expects {model.num_lfs}"
        )
    av = signed * model.accuracies
    logit = (
        math.log(model.class_prior) - math.log1p(-model.class_prior)
        + (np.log1p(av) - np.log1p(-av)).sum(axis=1)
    )
    return expit(logit)


def fs_posterior(model: FSModel, signed_votes: Sequence[int]) -> float:
    """Posterior for a single signed vote vector."""
    return float(fs_posteriors(model, np.asarray(signed_votes).reshape(1, -1))[0])
