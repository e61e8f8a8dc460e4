"""Dataset container, slice construction, and JSON Lines persistence.

Records carry binary labeling-function votes (1 = fire positive, 0 =
abstain), optional dense features, and an optional gold label in {-1, +1}.
A *slice* groups the covered records that share an exact vote vector.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

VoteVector = tuple[int, ...]
"""Vote bits of one record, in labeling-function index order."""


class DatasetFormatError(ValueError):
    """A dataset file or record violates the format contract."""


@dataclass(frozen=True)
class Record:
    """One data point: an id, vote bits, optional features and gold label."""

    id: str
    votes: VoteVector
    features: tuple[float, ...] | None = None
    gold: int | None = None


@dataclass(frozen=True)
class Prior:
    """Known positive-class prevalence P(y = +1), strictly inside (0, 1)."""

    p_plus: float

    def __post_init__(self) -> None:
        if not (0.0 < self.p_plus < 1.0):
            raise ValueError(f"p_plus must lie strictly in (0, 1), got {self.p_plus}")


@dataclass(frozen=True)
class Dataset:
    """Immutable collection of records with a fixed labeling-function count.

    Parameters
    ----------
    records : tuple of Record
        The data points, in file/application order.
    num_lfs : int
        Number of labeling functions M; every record must carry M vote bits.
    lf_names : tuple of str, optional
        Human-readable labeling-function names, length M when present.

    Notes
    -----
    Validation happens at construction: vote values outside {0, 1}, gold
    outside {-1, +1}, duplicate ids, or inconsistent vote/feature widths
    all raise ``DatasetFormatError``.
    """

    records: tuple[Record, ...]
    num_lfs: int
    lf_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.num_lfs < 1:
            raise DatasetFormatError("num_lfs must be at least 1")
        if self.lf_names is not None and len(self.lf_names) != self.num_lfs:
            raise DatasetFormatError(
                f"{len(self.lf_names)} lf_names for {self.num_lfs} labeling functions"
            )
        seen: set[str] = set()
        has_features = bool(self.records) and self.records[0].features is not None
        feature_dim: int | None = None
        for rec in self.records:
            if rec.id in seen:
                raise DatasetFormatError(f"duplicate record id {rec.id!r}")
            seen.add(rec.id)
            if len(rec.votes) != self.num_lfs:
                raise DatasetFormatError(
                    f"record {rec.id!r} has {len(rec.votes)} votes, expected {self.num_lfs}"
                )
            if any(v not in (0, 1) for v in rec.votes):
                raise DatasetFormatError(f"record {rec.id!r} has a vote outside {{0, 1}}")
            if rec.gold is not None and rec.gold not in (-1, 1):
                raise DatasetFormatError(f"record {rec.id!r} has gold outside {{-1, +1}}")
            if (rec.features is not None) != has_features:
                raise DatasetFormatError(
                    f"record {rec.id!r} disagrees with the rest of the dataset "
                    "on feature presence"
                )
            if rec.features is not None:
                if feature_dim is None:
                    feature_dim = len(rec.features)
                elif len(rec.features) != feature_dim:
                    raise DatasetFormatError(
                        f"record {rec.id!r} has {len(rec.features)} features, "
                        f"expected {feature_dim}"
                    )
                if not all(math.isfinite(x) for x in rec.features):
                    raise DatasetFormatError(f"record {rec.id!r} has non-finite features")

    @classmethod
    def from_records(
        cls,
        records: Iterable[Record],
        lf_names: Iterable[str] | None = None,
    ) -> "Dataset":
        """Build a dataset, inferring the labeling-function count from the data."""
        recs = tuple(records)
        if not recs:
            raise DatasetFormatError("cannot infer num_lfs from an empty record list")
        names = tuple(lf_names) if lf_names is not None else None
        return cls(records=recs, num_lfs=len(recs[0].votes), lf_names=names)

    def __len__(self) -> int:
        return len(self.records)

    @cached_property
    def votes_matrix(self) -> np.ndarray:
        """(N, M) int8 array of vote bits, one row per record."""
        if not self.records:
            return np.zeros((0, self.num_lfs), dtype=np.int8)
        return np.array([r.votes for r in self.records], dtype=np.int8)

    @cached_property
    def label_matrix(self) -> np.ndarray:
        """(M, N) transposed view: one row per labeling function."""
        return self.votes_matrix.T

    @cached_property
    def features_matrix(self) -> np.ndarray | None:
        """(N, F) float array of features, or None when absent."""
        if not self.records or self.records[0].features is None:
            return None
        return np.array([r.features for r in self.records], dtype=np.float64)

    @cached_property
    def gold_array(self) -> np.ndarray | None:
        """(N,) int8 array of gold labels, or None unless every record has one."""
        if not self.records or any(r.gold is None for r in self.records):
            return None
        return np.array([r.gold for r in self.records], dtype=np.int8)


@dataclass(frozen=True)
class SliceTable:
    """Covered records grouped by exact vote vector.

    ``slices`` maps each observed non-zero vote vector to the indices of
    records carrying it, in dataset order; ``uncovered`` lists the indices
    of all-abstain records. Together they partition ``range(num_records)``.
    """

    slices: dict[VoteVector, tuple[int, ...]]
    uncovered: tuple[int, ...]
    num_records: int


def build_slices(dataset: Dataset) -> SliceTable:
    """Group covered records by vote vector.

    Parameters
    ----------
    dataset : Dataset

    Returns
    -------
    SliceTable
        Slice keys appear in first-occurrence order; member index lists
        follow dataset record order.
    """
    slices: dict[VoteVector, list[int]] = {}
    uncovered: list[int] = []
    for i, rec in enumerate(dataset.records):
        if any(rec.votes):
            slices.setdefault(rec.votes, []).append(i)
        else:
            uncovered.append(i)
    return SliceTable(
        slices={v: tuple(members) for v, members in slices.items()},
        uncovered=tuple(uncovered),
        num_records=len(dataset.records),
    )


def coverage_mask(dataset: Dataset) -> np.ndarray:
    """Binary (N,) mask: 1 where at least one labeling function fired."""
    if not dataset.records:
        return np.zeros(0, dtype=np.int8)
    return (dataset.votes_matrix.any(axis=1)).astype(np.int8)


def _parse_meta(obj: dict, lineno: int) -> tuple[int | None, tuple[str, ...] | None]:
    meta = obj["meta"]
    if not isinstance(meta, dict):
        raise DatasetFormatError(f"line {lineno}: meta must be an object")
    num_lfs = meta.get("num_lfs")
    if num_lfs is not None and (not isinstance(num_lfs, int) or num_lfs < 1):
        raise DatasetFormatError(f"line {lineno}: meta num_lfs must be a positive integer")
    names = meta.get("lf_names")
    if names is not None:
        if not isinstance(names, list) or not all(isinstance(s, str) for s in names):
            raise DatasetFormatError(f"line {lineno}: meta lf_names must be a list of strings")
        names = tuple(names)
    return num_lfs, names


def _parse_record(obj: dict, lineno: int) -> Record:
    try:
        rid = obj["id"]
        votes = obj["votes"]
    except KeyError as missing:
        raise DatasetFormatError(f"line {lineno}: missing key {missing}") from None
    if not isinstance(rid, str):
        raise DatasetFormatError(f"line {lineno}: id must be a string")
    if not isinstance(votes, list) or any(v not in (0, 1) for v in votes):
        raise DatasetFormatError(f"line {lineno}: votes must be a list of 0/1 values")
    features = obj.get("features")
    if features is not None:
        if not isinstance(features, list) or not all(
            isinstance(x, (int, float)) and math.isfinite(x) for x in features
        ):
            raise DatasetFormatError(f"line {lineno}: features must be a list of finite numbers")
        features = tuple(float(x) for x in features)
    gold = obj.get("label")
    if gold is not None and gold not in (-1, 1):
        raise DatasetFormatError(f"line {lineno}: label must be -1 or 1")
    return Record(id=rid, votes=tuple(int(v) for v in votes), features=features, gold=gold)


def load_dataset(path: str) -> Dataset:
    """Read a dataset from a JSON Lines file.

    The first line may be a meta object ``{"meta": {"num_lfs": M,
    "lf_names": [...]}}``; every other line is one record object with keys
    ``id``, ``votes``, and optionally ``features`` and ``label``.

    Raises
    ------
    DatasetFormatError
        On malformed JSON (with the offending line number), inconsistent
        vote or feature widths, duplicate ids, or out-of-range values.
    """
    records: list[Record] = []
    declared_m: int | None = None
    lf_names: tuple[str, ...] | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise DatasetFormatError(f"line {lineno}: invalid JSON ({err.msg})") from None
            if not isinstance(obj, dict):
                raise DatasetFormatError(f"line {lineno}: expected a JSON object")
            if "meta" in obj:
                if lineno != 1:
                    raise DatasetFormatError(f"line {lineno}: meta only allowed on line 1")
                declared_m, lf_names = _parse_meta(obj, lineno)
                continue
            rec = _parse_record(obj, lineno)
            if declared_m is None:
                declared_m = len(rec.votes)
            elif len(rec.votes) != declared_m:
                raise DatasetFormatError(
                    f"line {lineno}: record has {len(rec.votes)} votes, expected {declared_m}"
                )
            records.append(rec)
    if declared_m is None:
        raise DatasetFormatError(f"{path}: no records and no meta line")
    try:
        return Dataset(records=tuple(records), num_lfs=declared_m, lf_names=lf_names)
    except DatasetFormatError as err:
        raise DatasetFormatError(f"{path}: {err}") from None


def save_dataset(dataset: Dataset, path: str) -> None:
    """Write a dataset as JSON Lines, meta line first.

    Output is canonical (fixed key order, compact separators, shortest
    round-tripping float repr), so saving the same dataset twice produces
    byte-identical files.
    """
    with open(path, "w", encoding="utf-8") as fh:
        meta: dict = {"num_lfs": dataset.num_lfs}
        if dataset.lf_names is not None:
            meta["lf_names"] = list(dataset.lf_names)
        fh.write(json.dumps({"meta": meta}, separators=(",", ":")) + "\n")
        for rec in dataset.records:
            row: dict = {"id": rec.id, "votes": list(rec.votes)}
            if rec.features is not None:
                row["features"] = list(rec.features)
            if rec.gold is not None:
                row["label"] = rec.gold
            fh.write(json.dumps(row, separators=(",", ":")) + "\n")
