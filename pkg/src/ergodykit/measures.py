"""Atomic signed measures on the fiber space K = [0, 1].

Every fiber measure in the engine is a finite weighted sum of Dirac atoms.
Atoms are exact under pushforward by a pointwise map, which is what makes
contracting fiber dynamics computable with zero transport error.  The metric
on K is |x - y|, so diam(K) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "AtomicSignedMeasure",
    "JordanPair",
    "canonicalize",
    "jordan",
    "total_mass",
    "total_variation",
    "pushforward",
    "compress",
    "compress_to_cap",
    "dirac",
    "uniform_atoms",
    "zero_measure",
]

# Images of fiber maps may overshoot [0, 1] by rounding; clamp within this.
_RANGE_SLACK = 1e-12


class MeasureDomainError(ValueError):
    """Raised when atom positions leave the fiber space K = [0, 1]."""


@dataclass(frozen=True)
class AtomicSignedMeasure:
    """A finite signed combination of Dirac atoms on [0, 1].

    ``positions`` and ``weights`` are parallel arrays.  A measure is
    *canonical* when positions are strictly increasing and no weight is
    zero; all constructors here return canonical measures.  Instances are
    immutable and safe to share across threads.
    """

    positions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pos = np.atleast_1d(np.asarray(self.positions, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if pos.shape != w.shape or pos.ndim != 1:
            raise ValueError("positions and weights must be 1-d arrays of equal length")
        if pos.size and (pos.min() < -_RANGE_SLACK or pos.max() > 1.0 + _RANGE_SLACK):
            bad = pos[(pos < -_RANGE_SLACK) | (pos > 1.0 + _RANGE_SLACK)][0]
            raise MeasureDomainError(f"atom position {bad!r} outside [0, 1]")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(w))):
            raise ValueError("positions and weights must be finite")
        pos = np.clip(pos, 0.0, 1.0)
        pos.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", w)

    # -- basic queries -------------------------------------------------

    @property
    def n_atoms(self) -> int:
        return int(self.positions.size)

    def total_mass(self) -> float:
        return float(self.weights.sum()) if self.weights.size else 0.0

    def total_variation(self) -> float:
        return float(np.abs(self.weights).sum()) if self.weights.size else 0.0

    def is_canonical(self) -> bool:
        if self.positions.size == 0:
            return True
        return bool(np.all(np.diff(self.positions) > 0) and np.all(self.weights != 0))

    def integrate(self, g: Callable[[np.ndarray], np.ndarray]) -> float:
        """Integral of a function against the measure: sum of w * g(pos)."""
        if self.positions.size == 0:
            return 0.0
        return float(np.dot(self.weights, np.asarray(g(self.positions), dtype=float)))

    # -- vector-space arithmetic (results are canonical) ---------------

    def __add__(self, other: "AtomicSignedMeasure") -> "AtomicSignedMeasure":
        return canonicalize(
            AtomicSignedMeasure(
                np.concatenate([self.positions, other.positions]),
                np.concatenate([self.weights, other.weights]),
            )
        )

    def __sub__(self, other: "AtomicSignedMeasure") -> "AtomicSignedMeasure":
        return self + (-1.0) * other

    def __mul__(self, c: float) -> "AtomicSignedMeasure":
        if c == 0.0 or self.positions.size == 0:
            return zero_measure()
        return AtomicSignedMeasure(self.positions, c * self.weights)

    __rmul__ = __mul__

    def __neg__(self) -> "AtomicSignedMeasure":
        return (-1.0) * self

    def to_pairs(self) -> list[list[float]]:
        """JSON-friendly [[position, weight], ...] representation."""
        return [[float(p), float(w)] for p, w in zip(self.positions, self.weights)]

    @staticmethod
    def from_pairs(pairs) -> "AtomicSignedMeasure":
        if not pairs:
            return zero_measure()
        arr = np.asarray(pairs, dtype=float)
        return canonicalize(AtomicSignedMeasure(arr[:, 0], arr[:, 1]))


class JordanPair(NamedTuple):
    """Positive and negative parts of a signed measure; supports disjoint."""

    positive: AtomicSignedMeasure
    negative: AtomicSignedMeasure


def zero_measure() -> AtomicSignedMeasure:
    return AtomicSignedMeasure(np.empty(0), np.empty(0))


def dirac(position: float, weight: float = 1.0) -> AtomicSignedMeasure:
    return AtomicSignedMeasure(np.array([position]), np.array([weight]))


def uniform_atoms(n: int) -> AtomicSignedMeasure:
    """Probability measure of n equally weighted atoms at cell midpoints."""
    pos = (np.arange(n) + 0.5) / n
    return AtomicSignedMeasure(pos, np.full(n, 1.0 / n))


def canonicalize(mu: AtomicSignedMeasure) -> AtomicSignedMeasure:
    """Sort atoms, merge coincident positions, drop zero weights.

    Idempotent and measure-preserving: the result represents the same
    signed measure with strictly increasing positions.
    """
    if mu.positions.size == 0:
        return zero_measure()
    order = np.argsort(mu.positions, kind="stable")
    pos = mu.positions[order]
    w = mu.weights[order]
    # merge runs of identical positions by summing weights
    new_group = np.empty(pos.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = pos[1:] != pos[:-1]
    idx = np.cumsum(new_group) - 1
    merged_w = np.zeros(int(idx[-1]) + 1)
    np.add.at(merged_w, idx, w)
    merged_pos = pos[new_group]
    keep = merged_w != 0.0
    if not keep.any():
        return zero_measure()
    return AtomicSignedMeasure(merged_pos[keep], merged_w[keep])


def jordan(mu: AtomicSignedMeasure) -> JordanPair:
    """Split a canonical measure into its positive and negative parts."""
    pos_mask = mu.weights > 0
    neg_mask = mu.weights < 0
    positive = AtomicSignedMeasure(mu.positions[pos_mask], mu.weights[pos_mask])
    negative = AtomicSignedMeasure(mu.positions[neg_mask], -mu.weights[neg_mask])
    return JordanPair(positive, negative)


def total_mass(mu: AtomicSignedMeasure) -> float:
    return mu.total_mass()


def total_variation(mu: AtomicSignedMeasure) -> float:
    return mu.total_variation()


def pushforward(
    mu: AtomicSignedMeasure, fiber_map: Callable[[np.ndarray], np.ndarray]
) -> AtomicSignedMeasure:
    """Image measure under a pointwise map of K into itself.

    Each atom (p, w) becomes (map(p), w); coincident images merge.  Total
    mass is preserved exactly.  Raises MeasureDomainError naming the first
    offending atom if the image leaves [0, 1].
    """
    if mu.positions.size == 0:
        return zero_measure()
    img = np.asarray(fiber_map(mu.positions), dtype=float)
    out_of_range = (img < -_RANGE_SLACK) | (img > 1.0 + _RANGE_SLACK)
    if out_of_range.any():
        k = int(np.argmax(out_of_range))
        raise MeasureDomainError(
            f"pushforward image {img[k]!r} of atom at {mu.positions[k]!r} "
            "outside [0, 1]"
        )
    return canonicalize(AtomicSignedMeasure(np.clip(img, 0.0, 1.0), mu.weights))


def _cluster_same_sign(pos: np.ndarray, w: np.ndarray, delta: float):
    """Cluster atoms sharing a bucket [k delta, (k+1) delta) to centroids.

    Atoms in a cluster lie within delta of each other and move at most
    delta to the weighted centroid, so the dual-norm drift of the whole
    operation is at most TV * delta**zeta.  Bucket boundaries are anchored
    to the absolute grid (not to the leftmost atom) so that repeated
    compression of slowly moving atom clouds is stable under iteration.
    """
    buckets = np.floor(pos / delta).astype(np.int64)
    new_group = np.empty(pos.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = buckets[1:] != buckets[:-1]
    idx = np.cumsum(new_group) - 1
    k = int(idx[-1]) + 1
    tot_w = np.zeros(k)
    tot_pw = np.zeros(k)
    np.add.at(tot_w, idx, w)
    np.add.at(tot_pw, idx, pos * w)
    return tot_pw / tot_w, tot_w


def compress(
    mu: AtomicSignedMeasure, delta: float, zeta: float = 1.0
) -> AtomicSignedMeasure:
    """Merge same-sign atoms within distance delta to weighted centroids.

    Keeps the Jordan parts stable; atoms of opposite sign never merge
    (cross-sign cancellation only happens at exactly coincident positions,
    via canonicalize).  Never increases total variation and never changes
    total mass.  The dual-norm perturbation is bounded by
    total_variation(mu) * delta**zeta.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if mu.positions.size <= 1:
        return mu
    parts = jordan(mu)
    pieces_pos = []
    pieces_w = []
    for part, sign in ((parts.positive, 1.0), (parts.negative, -1.0)):
        if part.positions.size == 0:
            continue
        p, w = _cluster_same_sign(part.positions, part.weights, delta)
        pieces_pos.append(p)
        pieces_w.append(sign * w)
    if not pieces_pos:
        return zero_measure()
    return canonicalize(
        AtomicSignedMeasure(np.concatenate(pieces_pos), np.concatenate(pieces_w))
    )


def compress_to_cap(
    mu: AtomicSignedMeasure, delta: float, cap: int, zeta: float = 1.0
) -> tuple[AtomicSignedMeasure, float]:
    """Compress with delta, doubling delta until at most cap atoms remain.

    Returns the compressed measure and the delta actually used, so callers
    can account the worst-case dual-norm drift TV * used_delta**zeta.
    """
    out = compress(mu, delta, zeta)
    used = delta
    while out.n_atoms > cap:
        used *= 2.0
        out = compress(out, used, zeta)
    return out, used
