"""Product-Bernoulli hypothesis pairs and their natural parameterization.

A pair of length-n probability vectors defines two product-Bernoulli
hypotheses on {0,1}^n.  Coordinates sharing the same (p0, p1) values can be
collapsed into a run-length ``GroupedPair``, which the exact affinity code
exploits: within such a group the success count is sufficient.
"""
import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import LengthMismatch, OutOfRange


def _frozen(a) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class HypothesisPair:
    """Two equal-length probability vectors, every entry strictly in (0,1)."""

    p0: np.ndarray
    p1: np.ndarray

    @property
    def n(self) -> int:
        return self.p0.shape[0]


@dataclass(frozen=True)
class GroupedPair:
    """Run-length form of a pair: distinct (p0, p1) values with counts."""

    p0: np.ndarray
    p1: np.ndarray
    counts: np.ndarray = field(default=None)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class NaturalParams:
    """Log-odds vectors; bijective with a HypothesisPair via the logistic map."""

    theta0: np.ndarray
    theta1: np.ndarray


def validate_pair(p0, p1) -> HypothesisPair:
    """Validate two probability vectors and wrap them as a pair.

    Entries exactly 0 or 1 are rejected, never clipped: the whole framework
    requires the two hypotheses to share support.

    Raises
    ------
    LengthMismatch
        If the vectors are empty or have different lengths.
    OutOfRange
        If any entry lies outside the open interval (0, 1).
    """
    a0 = np.asarray(p0, dtype=np.float64)
    a1 = np.asarray(p1, dtype=np.float64)
    if a0.ndim != 1 or a1.ndim != 1 or a0.shape[0] == 0 or a1.shape[0] == 0:
        raise LengthMismatch("probability vectors must be non-empty 1-d")
    if a0.shape[0] != a1.shape[0]:
        raise LengthMismatch(
            f"length mismatch: {a0.shape[0]} vs {a1.shape[0]}")
    for name, a in (("p0", a0), ("p1", a1)):
        if not np.all((a > 0.0) & (a < 1.0)):
            raise OutOfRange(f"{name} has entries outside the open (0,1)")
    return HypothesisPair(_frozen(a0), _frozen(a1))


def group(pair: HypothesisPair) -> GroupedPair:
    """Collapse coordinates with bit-identical (p0, p1) values.

    Groups appear in order of first occurrence.  Equality is exact; callers
    wanting tolerance-based grouping must pre-round.
    """
    order = {}
    counts = []
    for a, b in zip(pair.p0, pair.p1):
        key = (float(a), float(b))
        if key in order:
            counts[order[key]] += 1
        else:
            order[key] = len(counts)
            counts.append(1)
    keys = list(order)
    return GroupedPair(
        _frozen([k[0] for k in keys]),
        _frozen([k[1] for k in keys]),
        np.asarray(counts, dtype=np.int64),
    )


def expand(grouped: GroupedPair) -> HypothesisPair:
    """Inverse of :func:`group`: repeat each group's values ``count`` times."""
    return HypothesisPair(
        _frozen(np.repeat(grouped.p0, grouped.counts)),
        _frozen(np.repeat(grouped.p1, grouped.counts)),
    )


def to_natural(pair: HypothesisPair) -> NaturalParams:
    """Map probabilities to log-odds, theta = log(p / (1 - p))."""
    def logit(p):
        return np.log(p) - np.log1p(-p)

    return NaturalParams(_frozen(logit(pair.p0)), _frozen(logit(pair.p1)))


def from_natural(nat: NaturalParams) -> HypothesisPair:
    """Inverse logistic map; round-trips with :func:`to_natural` to ~1e-15."""
    return HypothesisPair(_frozen(expit(nat.theta0)), _frozen(expit(nat.theta1)))


def pair_from_csv(path) -> HypothesisPair:
    """Read a pair from a two-column CSV with required header ``p0,p1``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [c.strip() for c in next(reader)]
        except StopIteration:
            raise LengthMismatch(f"{path}: empty file") from None
        if header != ["p0", "p1"]:
            raise OutOfRange(f"{path}: expected header 'p0,p1', got {header}")
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
    if not rows:
        raise LengthMismatch(f"{path}: no data rows")
    a = np.asarray(rows, dtype=np.float64)
    return validate_pair(a[:, 0], a[:, 1])
