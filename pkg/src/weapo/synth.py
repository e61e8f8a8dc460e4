"""Seeded synthetic benchmarks with known ground truth.

Labels are drawn from a Bernoulli prior; each labeling function fires
conditionally independently given the label, with per-function true- and
false-positive rates; optional features come from one of two Gaussians
with a shared isotropic scale. Because the generating law is known
exactly, Bayes-optimal posteriors and population vote moments are
available in closed form for use as oracles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .data import Dataset, Record, VoteVector


@dataclass(frozen=True)
class FeatureSpec:
    """Two-Gaussian feature generator: class means and one shared sigma."""

    mu_pos: tuple[float, ...]
    mu_neg: tuple[float, ...]
    sigma: float

    def __post_init__(self) -> None:
        if len(self.mu_pos) != len(self.mu_neg):
            raise ValueError("mu_pos and mu_neg must have the same dimension")
        if len(self.mu_pos) == 0:
            raise ValueError("feature dimension must be at least 1")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def dim(self) -> int:
        return len(self.mu_pos)


@dataclass(frozen=True)
class SyntheticSpec:
    """Full description of one synthetic benchmark.

    ``tpr[j]`` is P(vote_j = 1 | y = +1) and ``fpr[j]`` is
    P(vote_j = 1 | y = -1). All probabilities live in [0, 1]; the class
    prior is strictly interior.
    """

    p_plus: float
    tpr: tuple[float, ...]
    fpr: tuple[float, ...]
    n: int
    seed: int = 0
    feature_spec: FeatureSpec | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.p_plus < 1.0):
            raise ValueError("p_plus must lie strictly in (0, 1)")
        if len(self.tpr) != len(self.fpr) or len(self.tpr) == 0:
            raise ValueError("tpr and fpr must be non-empty and equally long")
        for name, rates in (("tpr", self.tpr), ("fpr", self.fpr)):
            if any(not (0.0 <= r <= 1.0) for r in rates):
                raise ValueError(f"{name} entries must lie in [0, 1]")
        if self.n < 0:
            raise ValueError("n must be non-negative")

    @property
    def num_lfs(self) -> int:
        return len(self.tpr)

    def to_json_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "p_plus": self.p_plus,
            "tpr": list(self.tpr),
            "fpr": list(self.fpr),
            "n": self.n,
            "seed": self.seed,
        }
        if self.feature_spec is not None:
            payload["feature_spec"] = {
                "mu_pos": list(self.feature_spec.mu_pos),
                "mu_neg": list(self.feature_spec.mu_neg),
                "sigma": self.feature_spec.sigma,
            }
        return payload

    @classmethod
    def from_json_dict(cls, payload: dict[str, Any]) -> "SyntheticSpec":
        feature_spec = None
        if payload.get("feature_spec") is not None:
            fs = payload["feature_spec"]
            feature_spec = FeatureSpec(
                mu_pos=tuple(float(x) for x in fs["mu_pos"]),
                mu_neg=tuple(float(x) for x in fs["mu_neg"]),
                sigma=float(fs["sigma"]),
            )
        return cls(
            p_plus=float(payload["p_plus"]),
            tpr=tuple(float(x) for x in payload["tpr"]),
            fpr=tuple(float(x) for x in payload["fpr"]),
            n=int(payload["n"]),
            seed=int(payload["seed"]),
            feature_spec=feature_spec,
        )

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, separators=(",", ":"))
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "SyntheticSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def generate(spec: SyntheticSpec) -> Dataset:
    """Draw a dataset from the generating law.

    Every record gets its own counter-based random stream (Philox keyed
    through ``SeedSequence(seed).spawn``), so generation is reproducible
    bit-for-bit, order-independent, and parallelizable per record. Gold
    labels are always attached; features only when the spec asks.
    """
    tpr = np.array(spec.tpr, dtype=np.float64)
    fpr = np.array(spec.fpr, dtype=np.float64)
    m = spec.num_lfs
    feature_spec = spec.feature_spec
    if feature_spec is not None:
        mu_pos = np.array(feature_spec.mu_pos, dtype=np.float64)
        mu_neg = np.array(feature_spec.mu_neg, dtype=np.float64)
    width = len(str(max(spec.n - 1, 0)))
    records = []
    streams = np.random.SeedSequence(spec.seed).spawn(spec.n)
    for i, stream in enumerate(streams):
        rng = np.random.Generator(np.random.Philox(stream))
        y = 1 if rng.random() < spec.p_plus else -1
        rates = tpr if y == 1 else fpr
        votes = tuple(int(b) for b in rng.random(m) < rates)
        features = None
        if feature_spec is not None:
            mu = mu_pos if y == 1 else mu_neg
            draw = mu + feature_spec.sigma * rng.standard_normal(feature_spec.dim)
            features = tuple(float(x) for x in draw)
        records.append(
            Record(id=f"r{i:0{width}d}", votes=votes, features=features, gold=y)
        )
    return Dataset(records=tuple(records), num_lfs=m)


@dataclass(frozen=True, eq=False)
class OracleTable:
    """Closed-form Bayes posteriors P(y = +1 | votes) for a spec.

    Evaluated lazily per vote vector with caching; ``as_dict`` walks all
    2^M vectors and is only sensible for small M.
    """

    spec: SyntheticSpec
    _cache: dict[VoteVector, float] = field(default_factory=dict)

    def posterior(self, votes: VoteVector) -> float:
        votes = tuple(int(v) for v in votes)
        if len(votes) != self.spec.num_lfs:
            raise ValueError(
                f"vote vector has length {len(votes)}, spec has {self.spec.num_lfs}"
            )
        cached = self._cache.get(votes)
        if cached is not None:
            return cached
        like_pos = 1.0
        like_neg = 1.0
        for v, t, f in zip(votes, self.spec.tpr, self.spec.fpr):
            like_pos *= t if v else 1.0 - t
            like_neg *= f if v else 1.0 - f
        numerator = self.spec.p_plus * like_pos
        denominator = numerator + (1.0 - self.spec.p_plus) * like_neg
        if denominator == 0.0:
            raise ValueError(f"vote vector {votes} has zero probability under the spec")
        value = numerator / denominator
        self._cache[votes] = value
        return value

    def scores(self, dataset: Dataset) -> np.ndarray:
        """Oracle posterior for every record of a compatible dataset."""
        if dataset.num_lfs != self.spec.num_lfs:
            raise ValueError(
                f"dataset has {dataset.num_lfs} labeling functions, "
                f"spec has {self.spec.num_lfs}"
            )
        return np.array([self.posterior(r.votes) for r in dataset.records])

    def as_dict(self) -> dict[VoteVector, float]:
        """Posterior for every one of the 2^M possible vote vectors."""
        m = self.spec.num_lfs
        if m > 20:
            raise ValueError("full table only supported for M <= 20")
        table = {}
        for bits in range(2**m):
            votes = tuple((bits >> j) & 1 for j in range(m))
            table[votes] = self.posterior(votes)
        return table


def oracle_posteriors(spec: SyntheticSpec) -> OracleTable:
    """Bayes-optimal posterior oracle for a synthetic spec."""
    return OracleTable(spec=spec)


def population_moments(spec: SyntheticSpec) -> np.ndarray:
    """Exact second moments E[signed_j * signed_k] of the signed votes.

    Off-diagonal entries expand over the label:
    ``p * m_j(+) * m_k(+) + (1 - p) * m_j(-) * m_k(-)`` with
    ``m_j(y) = E[signed_j | y]``; the diagonal is identically 1.
    """
    mean_pos = 2.0 * np.array(spec.tpr, dtype=np.float64) - 1.0
    mean_neg = 2.0 * np.array(spec.fpr, dtype=np.float64) - 1.0
    p = spec.p_plus
    moments = p * np.outer(mean_pos, mean_pos) + (1.0 - p) * np.outer(mean_neg, mean_neg)
    np.fill_diagonal(moments, 1.0)
    return moments
