"""Resampling methods that reduce class imbalance by a chosen multiplier.

A resampler r with multiplier m transforms a dataset S so that
IR(r(S)) = IR(S) / m. Three methods are provided:

* ``ros``  -- random oversampling: duplicate minor-class elements;
* ``rus``  -- random undersampling: discard major-class elements;
* ``smote`` -- synthetic minority oversampling: interpolate between
  minor-class neighbours.

All fractional element counts are rounded half to even. Added elements get
fresh ``synth:<counter>`` ids and carry provenance records; removed
elements are reported by id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .datasets import Dataset, imbalance_ratio
from .errors import MinorityTooSmall, MultiplierOutOfRange, WouldEmptyMajority
from .rng import substream, uniform_closed

DEFAULT_SMOTE_K = 5


class Method(str, Enum):
    NONE = "none"
    ROS = "ros"
    RUS = "rus"
    SMOTE = "smote"


@dataclass(frozen=True)
class ResamplingSpec:
    """Method plus multiplier; ``smote_k`` is ignored by the other methods."""

    method: Method
    multiplier: float = 1.0
    smote_k: int = DEFAULT_SMOTE_K

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", Method(self.method))
        m = float(self.multiplier)
        if self.method is Method.NONE:
            if m != 1.0:
                raise MultiplierOutOfRange(f"method none requires multiplier 1, got {m}")
        elif not m > 1.0:
            raise MultiplierOutOfRange(f"{self.method.value} requires multiplier > 1, got {m}")
        if self.smote_k < 1:
            raise ValueError(f"smote_k must be at least 1, got {self.smote_k}")


@dataclass(frozen=True)
class SmoteRecord:
    """Provenance of one added element.

    ROS copies are recorded as degenerate interpolations: neighbor equals
    seed and lam is 0.
    """

    synth_id: str
    seed_id: str
    neighbor_id: str
    lam: float


@dataclass(frozen=True)
class ResampleResult:
    dataset: Dataset
    added: tuple[SmoteRecord, ...] = ()
    removed_ids: tuple[str, ...] = field(default=())


def _round_half_even(x: float) -> int:
    return int(np.round(x))


def _check_multiplier(dataset: Dataset, m: float) -> float:
    ratio = imbalance_ratio(dataset)
    if not 1.0 < m <= ratio:
        raise MultiplierOutOfRange(
            f"multiplier must lie in (1, IR(S)] = (1, {ratio:.6g}], got {m}"
        )
    return ratio


def _next_synth_counter(dataset: Dataset) -> int:
    highest = -1
    for ident in dataset.ids:
        if ident.startswith("synth:"):
            highest = max(highest, int(ident.split(":", 1)[1]))
    return highest + 1


def ros(dataset: Dataset, m: float, seed: int) -> ResampleResult:
    """Append round((m-1)|C1|) uniform-with-replacement copies of minor elements."""
    _check_multiplier(dataset, m)
    minor_idx = dataset.class_indices(1)
    n_new = _round_half_even((m - 1.0) * len(minor_idx))
    if n_new == 0:
        return ResampleResult(dataset=dataset)
    rng = substream(seed, "ros")
    picks = minor_idx[rng.integers(0, len(minor_idx), size=n_new)]
    counter = _next_synth_counter(dataset)
    new_ids = tuple(f"synth:{counter + i}" for i in range(n_new))
    records = tuple(
        SmoteRecord(synth_id=new_ids[i], seed_id=dataset.ids[p], neighbor_id=dataset.ids[p], lam=0.0)
        for i, p in enumerate(picks)
    )
    features = np.vstack([dataset.features, dataset.features[picks]])
    labels = np.concatenate([dataset.labels, np.ones(n_new, dtype=np.int64)])
    return ResampleResult(
        dataset=Dataset(features, labels, dataset.ids + new_ids), added=records
    )


def rus(dataset: Dataset, m: float, seed: int) -> ResampleResult:
    """Drop a uniform random subset of the major class of size round(|C0|(m-1)/m)."""
    _check_multiplier(dataset, m)
    major_idx = dataset.class_indices(0)
    n_drop = _round_half_even(len(major_idx) * (m - 1.0) / m)
    if n_drop >= len(major_idx):
        raise WouldEmptyMajority(
            f"dropping {n_drop} of {len(major_idx)} major elements would empty the class"
        )
    if n_drop == 0:
        return ResampleResult(dataset=dataset)
    rng = substream(seed, "rus")
    dropped = rng.permutation(major_idx)[:n_drop]
    removed_ids = tuple(dataset.ids[i] for i in np.sort(dropped))
    keep = np.setdiff1d(np.arange(dataset.size), dropped, assume_unique=True)
    return ResampleResult(dataset=dataset.subset(keep), removed_ids=removed_ids)


def _minor_neighbors(features: np.ndarray, pos: int, k_eff: int) -> np.ndarray:
    """Indices (into the minor block) of the k_eff nearest neighbours of row pos.

    Euclidean distance, the point itself excluded, distance ties broken
    toward the lower index. Distances are computed by explicit subtraction
    so that equidistant points compare exactly equal.
    """
    diff = features - features[pos]
    dist = np.einsum("ij,ij->i", diff, diff)
    dist[pos] = np.inf
    order = np.argsort(dist, kind="stable")
    return order[:k_eff]


def smote(dataset: Dataset, m: float, seed: int, k: int = DEFAULT_SMOTE_K) -> ResampleResult:
    """Append round((m-1)|C1|) synthetic minor elements by convex interpolation.

    Each synthetic draws a seed element uniformly from the minor class,
    then one of its min(k, |C1|-1) nearest minor neighbours uniformly, then
    lam uniform on the closed interval [0, 1], and emits
    (1-lam) seed + lam neighbour.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    _check_multiplier(dataset, m)
    minor_idx = dataset.class_indices(1)
    if len(minor_idx) < 2:
        raise MinorityTooSmall(f"smote needs at least 2 minor elements, got {len(minor_idx)}")
    n_new = _round_half_even((m - 1.0) * len(minor_idx))
    if n_new == 0:
        return ResampleResult(dataset=dataset)
    k_eff = min(k, len(minor_idx) - 1)
    minor_features = dataset.features[minor_idx]
    rng = substream(seed, "smote")
    seed_pos = rng.integers(0, len(minor_idx), size=n_new)
    neighbor_slot = rng.integers(0, k_eff, size=n_new)
    lams = uniform_closed(rng, size=n_new)
    neighbor_cache: dict[int, np.ndarray] = {}
    counter = _next_synth_counter(dataset)
    rows = np.empty((n_new, dataset.dim))
    records = []
    for i in range(n_new):
        pos = int(seed_pos[i])
        if pos not in neighbor_cache:
            neighbor_cache[pos] = _minor_neighbors(minor_features, pos, k_eff)
        npos = int(neighbor_cache[pos][neighbor_slot[i]])
        lam = float(lams[i])
        rows[i] = (1.0 - lam) * minor_features[pos] + lam * minor_features[npos]
        records.append(
            SmoteRecord(
                synth_id=f"synth:{counter + i}",
                seed_id=dataset.ids[minor_idx[pos]],
                neighbor_id=dataset.ids[minor_idx[npos]],
                lam=lam,
            )
        )
    features = np.vstack([dataset.features, rows])
    labels = np.concatenate([dataset.labels, np.ones(n_new, dtype=np.int64)])
    new_ids = tuple(rec.synth_id for rec in records)
    return ResampleResult(
        dataset=Dataset(features, labels, dataset.ids + new_ids), added=tuple(records)
    )


def resample(dataset: Dataset, spec: ResamplingSpec, seed: int) -> ResampleResult:
    """Apply the method named in spec; ``none`` returns the dataset untouched."""
    if spec.method is Method.NONE:
        return ResampleResult(dataset=dataset)
    if spec.method is Method.ROS:
        return ros(dataset, spec.multiplier, seed)
    if spec.method is Method.RUS:
        return rus(dataset, spec.multiplier, seed)
    return smote(dataset, spec.multiplier, seed, k=spec.smote_k)
