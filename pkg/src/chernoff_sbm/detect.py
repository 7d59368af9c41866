"""Community detection: spectral initialization plus a leave-one-out
two-round likelihood-ratio refinement.

The pipeline: cluster the whole graph spectrally, estimate the
connectivity matrix from those labels, split the nodes into random halves,
re-cluster each half, cross-refine the halves with one likelihood-ratio
round, re-estimate the connectivity matrix, and finally classify each node
from its full adjacency row.  Holding node j out of every intermediate
estimate keeps its final classification independent of them; ``exact_loo``
recomputes the half clusterings for every j, ``fast_loo`` (default)
computes them once per half and zeroes node j's column in the refinement
sums, which differs only through that single excluded node.
"""
import time
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (ConvergenceFailure, DegenerateSplit, LengthMismatch,
                     OutOfRange)

_MIS_ENUMERATION_MAX_K = 8
_SPLIT_RETRIES = 5


def _derived_seed(seed, *key) -> int:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(x) for x in key))
    return int(ss.generate_state(2, np.uint64)[0])


def _as_labels(z) -> np.ndarray:
    a = np.asarray(z, dtype=np.int64)
    if a.ndim != 1:
        raise LengthMismatch("labels must be a 1-d integer vector")
    return a


def _infer_k(k, *label_arrays) -> int:
    if k is None:
        k = max(int(a.max()) for a in label_arrays) + 1
    k = int(k)
    for a in label_arrays:
        if a.min() < 0 or a.max() >= k:
            raise OutOfRange(f"labels must lie in [0,{k})")
    return k


def _confusion(a, b, k) -> np.ndarray:
    m = np.zeros((k, k), dtype=np.int64)
    np.add.at(m, (a, b), 1)
    return m


def _best_agreement_enumerate(m: np.ndarray) -> int:
    k = m.shape[0]
    return max(sum(int(m[a, p[a]]) for a in range(k))
               for p in permutations(range(k)))


def _best_agreement_assignment(m: np.ndarray) -> int:
    rows, cols = linear_sum_assignment(-m)
    return int(m[rows, cols].sum())


def mis(z_hat, z, k=None) -> float:
    """Misclassification rate minimized over community relabelings.

    Exhaustive permutation search for k <= 8, otherwise a linear
    assignment on the confusion matrix (the same minimum).
    """
    a = _as_labels(z_hat)
    b = _as_labels(z)
    if a.shape[0] != b.shape[0]:
        raise LengthMismatch(
            f"label vectors differ in length: {a.shape[0]} vs {b.shape[0]}")
    k = _infer_k(k, a, b)
    m = _confusion(a, b, k)
    if k <= _MIS_ENUMERATION_MAX_K:
        agree = _best_agreement_enumerate(m)
    else:
        agree = _best_agreement_assignment(m)
    return 1.0 - agree / a.shape[0]


def match_labels(reference, candidate, k=None) -> np.ndarray:
    """Relabel ``candidate`` to best agree with ``reference``.

    Solves the assignment problem on the confusion matrix (O(K^3)) and
    applies the optimal permutation to the candidate labels.
    """
    ref = _as_labels(reference)
    cand = _as_labels(candidate)
    if ref.shape[0] != cand.shape[0]:
        raise LengthMismatch("reference and candidate lengths differ")
    k = _infer_k(k, ref, cand)
    m = _confusion(cand, ref, k)
    rows, cols = linear_sum_assignment(-m)
    perm = np.empty(k, dtype=np.int64)
    perm[rows] = cols
    return perm[cand]


def _check_adjacency(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise OutOfRange("adjacency must be square")
    if not np.array_equal(A, A.T):
        raise OutOfRange("adjacency must be symmetric")
    if np.any(np.diagonal(A) != 0):
        raise OutOfRange("adjacency must have a zero diagonal")
    if not np.isin(A, (0, 1)).all():
        raise OutOfRange("adjacency entries must be 0/1")
    return A


def _onehot(labels, k) -> np.ndarray:
    Z = np.zeros((labels.shape[0], k))
    Z[np.arange(labels.shape[0]), labels] = 1.0
    return Z


def _estimate_p_core(Af, labels, k):
    # block edge frequencies over unordered pairs; empty cells filled with
    # the global edge density; clipped away from {0,1} for the log scores
    n = Af.shape[0]
    Z = _onehot(labels, k)
    M = Z.T @ (Af @ Z)          # ordered pair counts; diagonal doubled
    sizes = Z.sum(axis=0)
    denom = np.outer(sizes, sizes)
    np.fill_diagonal(denom, sizes * (sizes - 1.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        P = M / denom
    fill = denom <= 0
    if fill.any():
        P[fill] = Af.sum() / (n * (n - 1.0))
    lo = 1.0 / n ** 2
    return np.clip(P, lo, 1.0 - lo), fill


def estimate_p(A, z_tilde, k=None, return_fill_mask=False):
    """Blockwise edge-frequency estimate of the connectivity matrix.

    Computed over unordered node pairs, so the output is exactly
    symmetric.  Cells with no pairs are filled with the global edge
    density (pass ``return_fill_mask=True`` to see which); entries are
    clipped to [1/n^2, 1 - 1/n^2] because the classifier takes logs.
    """
    A = _check_adjacency(A)
    labels = _as_labels(z_tilde)
    if labels.shape[0] != A.shape[0]:
        raise LengthMismatch("labels length must match adjacency size")
    k = _infer_k(k, labels)
    P, fill = _estimate_p_core(A.astype(np.float64), labels, k)
    return (P, fill) if return_fill_mask else P


def lr_classify(A_block, p_hat, z_cols) -> np.ndarray:
    """Likelihood-ratio labels for the rows of a rows-by-columns 0/1 block.

    Row i gets ``argmax_k sum_j A_ij log P[k, z_j] + (1-A_ij) log(1-P[k, z_j])``,
    evaluated through per-community sufficient statistics (edge counts per
    column community), so the cost is O(nnz + rows K^2).  Ties break
    toward the smallest community index.
    """
    B = np.atleast_2d(np.asarray(A_block, dtype=np.float64))
    cols = _as_labels(z_cols)
    if B.shape[1] != cols.shape[0]:
        raise LengthMismatch("column labels must match block width")
    P = np.asarray(p_hat, dtype=np.float64)
    if not np.all((P > 0.0) & (P < 1.0)):
        raise OutOfRange("p_hat entries must lie strictly inside (0,1)")
    k = _infer_k(P.shape[0], cols)
    Zc = _onehot(cols, k)
    counts = B @ Zc
    m = Zc.sum(axis=0)
    scores = counts @ np.log(P).T + (m - counts) @ np.log1p(-P).T
    return scores.argmax(axis=1)


def _kmeans(X, k, seed, restarts=10, iters=100):
    n = X.shape[0]
    best_inertia, best_labels = np.inf, None
    for r in range(restarts):
        g = np.random.Generator(np.random.Philox(key=_derived_seed(seed, 3, r)))
        C = np.empty((k, X.shape[1]))
        C[0] = X[g.integers(n)]
        d2 = ((X - C[0]) ** 2).sum(axis=1)
        for c in range(1, k):
            tot = d2.sum()
            if tot <= 0:
                C[c] = X[g.integers(n)]
            else:
                pick = np.searchsorted(np.cumsum(d2), g.random() * tot)
                C[c] = X[min(pick, n - 1)]
            d2 = np.minimum(d2, ((X - C[c]) ** 2).sum(axis=1))
        labels = None
        for _ in range(iters):
            D = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
            new = D.argmin(axis=1)
            for c in range(k):
                sel = new == c
                if sel.any():
                    C[c] = X[sel].mean(axis=0)
                else:
                    far = int(D.min(axis=1).argmax())
                    C[c] = X[far]
                    new[far] = c
            if labels is not None and np.array_equal(new, labels):
                break
            labels = new
        inertia = float(((X - C[labels]) ** 2).sum())
        if inertia < best_inertia:
            best_inertia, best_labels = inertia, labels.copy()
    return best_labels


def spectral_cluster(A, k, seed, truncation_factor=10.0, tol=1e-8,
                     max_iter=1000) -> np.ndarray:
    """Degree-truncated spectral clustering.

    Rows and columns of nodes whose degree exceeds ``truncation_factor``
    times the average degree are zeroed, the top-k singular pairs of the
    truncated matrix are found by seeded subspace iteration (residual
    tolerance ``tol``, at most ``max_iter`` sweeps), and k-means with ten
    seeded k-means++ restarts clusters the rows of ``U @ diag(sigma)``.

    Raises
    ------
    ConvergenceFailure
        If the singular-pair residual never meets ``tol``.
    """
    A = _check_adjacency(A)
    seed = int(seed)
    n = A.shape[0]
    k = int(k)
    if not 1 <= k <= n:
        raise OutOfRange(f"need 1 <= k <= n, got k={k}, n={n}")
    deg = A.sum(axis=1).astype(np.float64)
    tau = truncation_factor * deg.mean()
    keep = deg <= tau
    Af = A.astype(np.float64)
    Af[~keep, :] = 0.0
    Af[:, ~keep] = 0.0

    block = min(n, 2 * k + 2)   # oversampling stabilizes clustered spectra
    g = np.random.Generator(np.random.Philox(key=_derived_seed(seed, 1)))
    V = np.linalg.qr(g.standard_normal((n, block)))[0]
    U = theta = None
    converged = False
    for it in range(max_iter):
        AV = Af @ V
        if it % 5 == 4 or it == max_iter - 1:
            H = V.T @ AV
            H = 0.5 * (H + H.T)
            eigval, W = np.linalg.eigh(H)
            order = np.argsort(-np.abs(eigval))[:k]
            U = V @ W[:, order]
            theta = eigval[order]
            resid = np.linalg.norm(Af @ U - U * theta, axis=0)
            if resid.max() / max(1.0, np.abs(theta).max()) <= tol:
                converged = True
                break
        V = np.linalg.qr(AV)[0]
    if not converged:
        raise ConvergenceFailure(
            f"singular-pair residual above {tol} after {max_iter} sweeps")
    embedding = U * np.abs(theta)
    return _kmeans(embedding, k, seed)


@dataclass(frozen=True)
class DetectionTrace:
    """Per-stage outputs of the detection pipeline, for diagnostics."""

    initial_labels: np.ndarray
    p_tilde: np.ndarray
    refined_labels: np.ndarray
    p_hat: np.ndarray
    final_labels: np.ndarray
    timings: dict

    def to_dict(self) -> dict:
        return {
            "initial_labels": self.initial_labels.tolist(),
            "p_tilde": self.p_tilde.tolist(),
            "refined_labels": self.refined_labels.tolist(),
            "p_hat": self.p_hat.tolist(),
            "final_labels": self.final_labels.tolist(),
            "timings": dict(self.timings),
        }


def _half_scores(Af, rows, cols, z_cols, logP, log1P, k):
    Zc = _onehot(z_cols, k)
    counts = Af[np.ix_(rows, cols)] @ Zc
    m = Zc.sum(axis=0)
    return counts @ logP.T + (m - counts) @ log1P.T


def _classify_row(Af_row, labels, logPh, log1Ph, k):
    b = np.bincount(labels[Af_row > 0], minlength=k).astype(np.float64)
    m = np.bincount(labels, minlength=k).astype(np.float64)
    scores = logPh @ b + log1Ph @ (m - b)
    return int(scores.argmax())


def detect_communities(A, k, seed, mode="fast_loo", truncation_factor=10.0):
    """Run the full detection pipeline; returns (labels, DetectionTrace).

    ``mode='exact_loo'`` re-runs the half spectral clusterings for every
    held-out node exactly as the refinement is defined; ``'fast_loo'``
    (default) clusters each half once and only zeroes the held-out node's
    column in the likelihood sums, so the per-node labelings differ from
    the shared ones only through that node.  Output is deterministic per
    (A, seed, mode); per-node seeds derive from the master seed.

    Raises
    ------
    DegenerateSplit
        If five random half-splits in a row left some community empty in
        a half's matched clustering.
    ConvergenceFailure
        Propagated from :func:`spectral_cluster`.
    """
    A = _check_adjacency(A)
    k = int(k)
    n = A.shape[0]
    if mode not in ("fast_loo", "exact_loo"):
        raise OutOfRange(f"mode must be fast_loo or exact_loo, got {mode!r}")
    if n < 8 * k:
        raise OutOfRange(f"need n >= 8k, got n={n}, k={k}")
    seed = int(seed)
    timings = {}
    t0 = time.perf_counter()

    z_tilde = spectral_cluster(A, k, _derived_seed(seed, 10),
                               truncation_factor=truncation_factor)
    timings["spectral_full"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    Af = A.astype(np.float64)
    P_tilde, _ = _estimate_p_core(Af, z_tilde, k)
    timings["p_tilde"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    for attempt in range(_SPLIT_RETRIES):
        g = np.random.Generator(
            np.random.Philox(key=_derived_seed(seed, 11, attempt)))
        I = np.sort(g.choice(n, n // 2, replace=False))
        J = np.setdiff1d(np.arange(n), I)
        zI = match_labels(z_tilde[I], spectral_cluster(
            A[np.ix_(I, I)], k, _derived_seed(seed, 12, attempt, 0),
            truncation_factor=truncation_factor), k)
        zJ = match_labels(z_tilde[J], spectral_cluster(
            A[np.ix_(J, J)], k, _derived_seed(seed, 12, attempt, 1),
            truncation_factor=truncation_factor), k)
        if np.unique(zI).shape[0] == k and np.unique(zJ).shape[0] == k:
            break
    else:
        raise DegenerateSplit(
            f"a half lost a community in {_SPLIT_RETRIES} consecutive splits")
    timings["half_spectral"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    logP = np.log(P_tilde)
    log1P = np.log1p(-P_tilde)
    logitP = logP - log1P
    # both halves are refined from the pre-update labels of the other half
    SI = _half_scores(Af, I, J, zJ, logP, log1P, k)
    SJ = _half_scores(Af, J, I, zI, logP, log1P, k)
    base = np.empty(n, dtype=np.int64)
    base[I] = SI.argmax(axis=1)
    base[J] = SJ.argmax(axis=1)
    p_hat_base, _ = _estimate_p_core(Af, base, k)
    timings["refine"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    in_I = np.zeros(n, dtype=bool)
    in_I[I] = True
    pos = np.empty(n, dtype=np.int64)
    pos[I] = np.arange(I.shape[0])
    pos[J] = np.arange(J.shape[0])
    z_hat = np.empty(n, dtype=np.int64)

    for j in range(n):
        if mode == "fast_loo":
            labels = base.copy()
            # zero node j's column in the opposite half's likelihood sums;
            # only rows adjacent to j can change their argmax
            if in_I[j]:
                rows, S, r_j = J, SJ, zI[pos[j]]
            else:
                rows, S, r_j = I, SI, zJ[pos[j]]
            nb = np.nonzero(A[rows, j])[0]
            if nb.size:
                labels[rows[nb]] = (S[nb] - logitP[:, r_j]).argmax(axis=1)
        else:
            Ip = I[I != j]
            Jp = J[J != j]
            zIp = match_labels(z_tilde[Ip], spectral_cluster(
                A[np.ix_(Ip, Ip)], k, _derived_seed(seed, 13, j, 0),
                truncation_factor=truncation_factor), k)
            zJp = match_labels(z_tilde[Jp], spectral_cluster(
                A[np.ix_(Jp, Jp)], k, _derived_seed(seed, 13, j, 1),
                truncation_factor=truncation_factor), k)
            labels = np.empty(n, dtype=np.int64)
            labels[Ip] = _half_scores(Af, Ip, Jp, zJp, logP, log1P, k) \
                .argmax(axis=1)
            labels[Jp] = _half_scores(Af, Jp, Ip, zIp, logP, log1P, k) \
                .argmax(axis=1)
        labels[j] = z_tilde[j]
        Ph, _ = _estimate_p_core(Af, labels, k)
        z_hat[j] = _classify_row(Af[j], labels, np.log(Ph), np.log1p(-Ph), k)
    timings["loo_loop"] = time.perf_counter() - t0

    trace = DetectionTrace(
        initial_labels=z_tilde, p_tilde=P_tilde, refined_labels=base,
        p_hat=p_hat_base, final_labels=z_hat.copy(), timings=timings)
    return z_hat, trace
