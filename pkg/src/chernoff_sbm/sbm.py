"""Stochastic block model: sampling, genie-test quantities, rate evaluator.

Community labels are 0-based integers in [0, K), matching the 0-based node
indices of the edge-list file format.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np

from .affinity import affinity_grouped
from .chernoff import chernoff_information, tilted_mc_affinity
from .dists import GroupedPair, _frozen
from .errors import GridTooLarge, IndistinguishableCommunities, OutOfRange

_SAMPLE_BLOCK = 512


@dataclass(frozen=True)
class SbmModel:
    """Node labels z in [0, K)^n plus a symmetric connectivity matrix P.

    Entries of P must lie strictly inside (0, 1), P must equal its
    transpose exactly, and every community must be nonempty.
    """

    z: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        z = np.ascontiguousarray(self.z, dtype=np.int64)
        P = np.ascontiguousarray(self.P, dtype=np.float64)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 1:
            raise OutOfRange(f"P must be square K x K, got shape {P.shape}")
        if not np.array_equal(P, P.T):
            raise OutOfRange("P must be exactly symmetric")
        if not np.all((P > 0.0) & (P < 1.0)):
            raise OutOfRange("P entries must lie strictly inside (0,1)")
        if z.ndim != 1 or z.shape[0] == 0:
            raise OutOfRange("z must be a non-empty 1-d label vector")
        K = P.shape[0]
        if z.min() < 0 or z.max() >= K:
            raise OutOfRange(f"labels must lie in [0,{K})")
        if np.unique(z).shape[0] != K:
            raise OutOfRange("every community must be nonempty")
        z.flags.writeable = False
        P.flags.writeable = False
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "P", P)

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @property
    def K(self) -> int:
        return self.P.shape[0]

    def community_sizes(self) -> np.ndarray:
        return np.bincount(self.z, minlength=self.K)


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise OutOfRange("seed must fit in 64 bits")
    return seed


def sample_adjacency(model: SbmModel, seed: int) -> np.ndarray:
    """Draw a symmetric 0/1 adjacency matrix with zero diagonal.

    Edge (i, j), i > j, is Bernoulli(P[z_i, z_j]) independently.  Uniform
    variates are generated per row block from independently jumped Philox
    streams, so blocks could be sampled in parallel without changing the
    result; a fixed seed gives a fixed matrix.
    """
    seed = _check_seed(seed)
    n = model.n
    Pz = model.P[model.z]
    U = np.empty((n, n), dtype=np.float64)
    for b, lo in enumerate(range(0, n, _SAMPLE_BLOCK)):
        hi = min(lo + _SAMPLE_BLOCK, n)
        g = np.random.Generator(np.random.Philox(key=seed).jumped(b))
        U[lo:hi] = g.random((hi - lo, n))
    A = (U < Pz[:, model.z]).astype(np.uint8)
    out = np.triu(A, 1)
    return out + out.T


def row_parameters(model: SbmModel, k: int) -> np.ndarray:
    """Edge-probability vector a community-k node has against every node."""
    if not 0 <= k < model.K:
        raise OutOfRange(f"community {k} outside [0,{model.K})")
    return model.P[k][model.z]


def _row_pair_grouped(model: SbmModel, k: int, ell: int) -> GroupedPair:
    # genie pair of rows k vs ell, grouped by the community of the column
    # node; duplicate (p0, p1) value pairs are merged.  All n coordinates
    # participate (the self coordinate is kept as a constant-factor
    # convention).
    sizes = model.community_sizes()
    merged = {}
    for r in range(model.K):
        key = (float(model.P[k, r]), float(model.P[ell, r]))
        merged[key] = merged.get(key, 0) + int(sizes[r])
    keys = list(merged)
    return GroupedPair(
        _frozen([a for a, _ in keys]),
        _frozen([b for _, b in keys]),
        np.asarray([merged[key] for key in keys], dtype=np.int64),
    )


class PairwiseChernoff(NamedTuple):
    d_star: np.ndarray       # K x K, NaN on the diagonal
    alpha_star: np.ndarray   # K x K, NaN on the diagonal


def pairwise_chernoff(model: SbmModel) -> PairwiseChernoff:
    """Chernoff information between every pair of community rows.

    Rows are compared in grouped form (at most K groups per pair), so each
    entry costs O(K) per divergence evaluation.  Raises
    IndistinguishableCommunities when two communities share a row.
    """
    K = model.K
    d = np.full((K, K), np.nan)
    a = np.full((K, K), np.nan)
    for k in range(K):
        for ell in range(k + 1, K):
            if np.array_equal(model.P[k], model.P[ell]):
                raise IndistinguishableCommunities(
                    f"communities {k} and {ell} have identical rows")
            ds, al = chernoff_information(_row_pair_grouped(model, k, ell))
            d[k, ell] = d[ell, k] = ds
            a[k, ell] = al
            a[ell, k] = 1.0 - al
    return PairwiseChernoff(d, a)


class EtaStar(NamedTuple):
    eta: float
    log_eta: float
    pair: Tuple[int, int]
    method: str   # 'grouped' (exact) or 'mc' (grid too large, estimated)


def eta_star(model: SbmModel, mc_samples: int = 10 ** 6,
             mc_seed: int = 0) -> EtaStar:
    """Worst-case affinity over community pairs, exact when the grid fits.

    Every row pair is evaluated through the grouped product-binomial sum;
    a pair whose count grid exceeds the exact-cell budget falls back to
    the tilted Monte-Carlo estimator and the result is flagged 'mc'.
    """
    if model.K < 2:
        raise IndistinguishableCommunities("need at least two communities")
    best = None
    for k in range(model.K):
        for ell in range(k + 1, model.K):
            if np.array_equal(model.P[k], model.P[ell]):
                raise IndistinguishableCommunities(
                    f"communities {k} and {ell} have identical rows")
            gp = _row_pair_grouped(model, k, ell)
            try:
                eta, log_eta = affinity_grouped(gp)
                method = "grouped"
            except GridTooLarge:
                est = tilted_mc_affinity(gp, mc_samples, mc_seed)
                eta, log_eta, method = est.estimate, est.log_estimate, "mc"
            if best is None or log_eta > best[1]:
                best = (eta, log_eta, (k, ell), method)
    return EtaStar(*best)


class MinimaxRate(NamedTuple):
    rate: float
    log_rate: float
    d_star: float
    p_star: float
    theorem_applicable: bool   # the lower-bound theorem assumes K >= 3


def minimax_rate(model: SbmModel) -> MinimaxRate:
    """Minimax error-rate shape exp(-D*)/sqrt(n p*), constant reported as 1.

    D* is the smallest pairwise Chernoff information and p* the largest
    connectivity entry.  For K = 2 the value is still computed but flagged
    as outside the lower-bound theorem's stated scope.
    """
    d = pairwise_chernoff(model).d_star
    d_star = float(np.nanmin(d))
    p_star = float(model.P.max())
    log_rate = -d_star - 0.5 * math.log(model.n * p_star)
    return MinimaxRate(math.exp(log_rate), log_rate, d_star, p_star,
                       model.K >= 3)


def binomial_chernoff(m: int, p: float, q: float) -> Tuple[float, float]:
    """Chernoff information between Bin(m, p) and Bin(m, q).

    Helper for checking the rate theorem's existence-of-q assumption by
    hand; the binomial equals an m-fold iid Bernoulli product, i.e. a
    single-group pair.
    """
    gp = GroupedPair(_frozen([p]), _frozen([q]),
                     np.asarray([int(m)], dtype=np.int64))
    return chernoff_information(gp)


@dataclass(frozen=True)
class SpaceReport:
    """Measured parameter-space quantities and their admissibility flags."""

    beta_ok: bool
    sparsity_ok: bool
    ratio_ok: bool
    separation_ok: bool
    beta: float
    p_star: float
    omega: float
    omega_prime: float
    d_star: float


def validate_space(model: SbmModel, beta: float, epsilon: float,
                   omega: float, omega_prime: float) -> SpaceReport:
    """Check community balance, sparsity, ratio and separation constraints.

    * balance: every community size in [n/(beta K), beta n/K]
    * sparsity: max P entry <= 1 - epsilon
    * ratio: max P entry / min P entry <= omega
    * separation: min over pairs of the worst column ratio >= omega_prime

    The report carries the measured counterparts (the smallest admissible
    beta, p*, the entry ratio, the separation ratio, and the measured
    minimum pairwise Chernoff information).
    """
    n, K = model.n, model.K
    sizes = model.community_sizes().astype(np.float64)
    beta_measured = float(max((K * sizes / n).max(), (n / (K * sizes)).max()))
    p_star = float(model.P.max())
    omega_measured = p_star / float(model.P.min())

    omega_prime_measured = math.inf
    d_star = math.nan
    if K >= 2:
        dmin = math.inf
        for k in range(K):
            for ell in range(k + 1, K):
                ratios = np.maximum(model.P[k] / model.P[ell],
                                    model.P[ell] / model.P[k])
                omega_prime_measured = min(omega_prime_measured,
                                           float(ratios.max()))
                if np.array_equal(model.P[k], model.P[ell]):
                    dmin = 0.0
                else:
                    dmin = min(dmin, chernoff_information(
                        _row_pair_grouped(model, k, ell))[0])
        d_star = dmin

    return SpaceReport(
        beta_ok=bool(sizes.min() >= n / (beta * K)
                     and sizes.max() <= beta * n / K),
        sparsity_ok=bool(p_star <= 1.0 - epsilon),
        ratio_ok=bool(omega_measured <= omega),
        separation_ok=bool(omega_prime_measured >= omega_prime),
        beta=beta_measured, p_star=p_star, omega=omega_measured,
        omega_prime=omega_prime_measured, d_star=d_star,
    )


def write_adjacency(path, A: np.ndarray, K: int) -> None:
    """Write an adjacency matrix as 'n K' header plus one 'i j' line per
    undirected edge (i < j, 0-based)."""
    n = A.shape[0]
    ii, jj = np.nonzero(np.triu(A, 1))
    with open(path, "w") as fh:
        fh.write(f"{n} {int(K)}\n")
        for i, j in zip(ii, jj):
            fh.write(f"{i} {j}\n")


def read_adjacency(path) -> Tuple[np.ndarray, int]:
    """Read the edge-list format; validates the entries and rejects
    self-loops and duplicated (possibly reversed) pairs."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise OutOfRange(f"{path}: header must be 'n K'")
        n, K = int(header[0]), int(header[1])
        if n < 1 or K < 1:
            raise OutOfRange(f"{path}: bad header n={n} K={K}")
        A = np.zeros((n, n), dtype=np.uint8)
        seen = set()
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise OutOfRange(f"{path}:{lineno}: expected 'i j'")
            i, j = int(parts[0]), int(parts[1])
            if not (0 <= i < n and 0 <= j < n):
                raise OutOfRange(f"{path}:{lineno}: node index out of range")
            if i == j:
                raise OutOfRange(f"{path}:{lineno}: self-loop {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise OutOfRange(
                    f"{path}:{lineno}: duplicate/asymmetric pair {i} {j}")
            seen.add(key)
            A[i, j] = A[j, i] = 1
    return A, K


def write_labels(path, labels: np.ndarray) -> None:
    """One 0-based community label per line."""
    with open(path, "w") as fh:
        for v in labels:
            fh.write(f"{int(v)}\n")


def read_labels(path) -> np.ndarray:
    with open(path) as fh:
        return np.asarray([int(line) for line in fh if line.strip()],
                          dtype=np.int64)
