"""The candidate catalog: block-model and low-rank fits on the training graph.

All candidates are fit on the training adjacency (held-out dyads zeroed),
rescaled by ``1/(1-p)`` to undo the hold-out thinning, and clipped to [0, 1].
A single eigendecomposition of the training adjacency is shared by every
fit; for symmetric matrices the leading singular components are exactly the
eigenpairs of largest absolute eigenvalue.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .cluster import centroids, kmeans
from .graph import Graph, ProbMatrix, save_prob_matrix
from .rng import STREAM_KMEANS_DCBM, STREAM_KMEANS_SBM, child_seed, rng_for
from .splitting import DyadMask, train_adjacency

_SPHERICAL_ZERO_TOL = 1e-12
_RESIDUAL_TOL = 1e-6


class Family(str, Enum):
    SBM = "sbm"
    DCBM = "dcbm"
    USVT = "usvt"


@dataclass(eq=False)
class SpectralBasis:
    """Leading eigenpairs of the training adjacency, by absolute eigenvalue."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        k = len(self.eigenvalues)
        gram = self.eigenvectors.T @ self.eigenvectors
        if np.abs(gram - np.eye(k)).max() > 1e-8:
            raise ValueError("eigenvector columns are not orthonormal")

    @property
    def n_components(self) -> int:
        return len(self.eigenvalues)


@dataclass(eq=False)
class CandidateEstimate:
    """One fitted probability-matrix estimate with its provenance."""

    estimate: ProbMatrix
    family: Family
    k: int
    fit_seed: int


def default_usvt_rank(n: int) -> int:
    """Smallest integer r with r**3 >= n (the cube-root rank rule)."""
    r = max(1, int(round(n ** (1.0 / 3.0))))
    while r**3 < n:
        r += 1
    while r > 1 and (r - 1) ** 3 >= n:
        r -= 1
    return min(r, n)


def leading_eigen(a_train: Graph, kmax: int, method: str = "dense") -> SpectralBasis:
    """Top-``kmax`` eigenpairs of the adjacency by absolute eigenvalue.

    ``method`` is "dense" (full symmetric solve), "lanczos" (sparse iterative,
    for large n), or "auto".  Either path must pass the residual acceptance
    check ``|A v - lambda v| <= 1e-6``.
    """
    n = a_train.n
    if not 1 <= kmax <= n:
        raise ValueError(f"kmax={kmax} outside [1, n={n}]")
    if method == "auto":
        method = "dense" if (n <= 4000 or kmax >= n - 1) else "lanczos"
    if method == "dense":
        a = a_train.adjacency()
        w, v = np.linalg.eigh(a)
        matvec = lambda x: a @ x
    elif method == "lanczos":
        from scipy.sparse import csr_matrix
        from scipy.sparse.linalg import eigsh

        e = a_train.edge_array
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        sparse = csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(n, n)
        )
        v0 = np.full(n, 1.0 / math.sqrt(n))  # fixed start vector for determinism
        w, v = eigsh(sparse, k=kmax, which="LM", v0=v0)
        matvec = lambda x: sparse @ x
    else:
        raise ValueError(f"unknown eigensolver method {method!r}")
    order = np.lexsort((-w, -np.abs(w)))[:kmax]
    w = w[order]
    v = v[:, order]
    residual = np.linalg.norm(matvec(v) - v * w, axis=0)
    if residual.size and residual.max() > _RESIDUAL_TOL:
        raise RuntimeError(f"eigenpair residual {residual.max():.2e} exceeds tolerance")
    return SpectralBasis(w, v)


def spectral_clustering(basis: SpectralBasis, k: int, seed: int) -> np.ndarray:
    """k-means labels on the first ``k`` eigenvector columns."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > basis.n_components:
        raise ValueError(f"k={k} exceeds the {basis.n_components}-component basis")
    n = basis.eigenvectors.shape[0]
    if k == 1:
        return np.zeros(n, dtype=np.int64)
    return kmeans(basis.eigenvectors[:, :k], k, rng_for(seed))


def spherical_spectral_clustering(basis: SpectralBasis, k: int, seed: int) -> np.ndarray:
    """k-means on row-normalized eigenvectors (zero rows assigned afterward)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > basis.n_components:
        raise ValueError(f"k={k} exceeds the {basis.n_components}-component basis")
    x = basis.eigenvectors[:, :k]
    n = x.shape[0]
    labels = np.zeros(n, dtype=np.int64)
    if k == 1:
        return labels
    norms = np.linalg.norm(x, axis=1)
    nonzero = norms > _SPHERICAL_ZERO_TOL
    n_nonzero = int(nonzero.sum())
    if n_nonzero == 0:
        return labels
    k_eff = min(k, n_nonzero)
    sub = kmeans(x[nonzero] / norms[nonzero, None], k_eff, rng_for(seed))
    labels[nonzero] = sub
    if (~nonzero).any():
        # zero rows go to the nearest centroid in raw coordinates
        cents = centroids(x[nonzero] / norms[nonzero, None], sub, k_eff)
        d2 = ((x[~nonzero][:, None, :] - cents[None, :, :]) ** 2).sum(axis=2)
        labels[~nonzero] = np.argmin(d2, axis=1)
    return labels


def _check_fit_inputs(a_train: Graph, labels: np.ndarray, p: float) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (a_train.n,):
        raise ValueError(f"labels length {labels.shape} does not match n={a_train.n}")
    if labels.size and labels.min() < 0:
        raise ValueError("labels must be nonnegative")
    if not 0.0 <= p < 1.0:
        raise ValueError(f"holdout probability {p} must lie in [0, 1)")
    return labels


def sbm_estimate(
    a_train: Graph, labels, p: float, *, fit_seed: int = 0
) -> CandidateEstimate:
    """Block-mean fit: within/between-block averages of the training adjacency,
    rescaled by ``1/(1-p)`` and clipped."""
    labels = _check_fit_inputs(a_train, labels, p)
    k = int(labels.max()) + 1 if labels.size else 1
    a = a_train.adjacency()
    onehot = np.zeros((a_train.n, k))
    onehot[np.arange(a_train.n), labels] = 1.0
    pair_sums = onehot.T @ a @ onehot
    counts = np.bincount(labels, minlength=k).astype(float)
    pair_counts = np.outer(counts, counts)
    np.fill_diagonal(pair_counts, counts * (counts - 1.0))
    block_means = np.divide(
        pair_sums, pair_counts, out=np.zeros_like(pair_sums), where=pair_counts > 0
    )
    values = block_means[labels][:, labels] / (1.0 - p)
    estimate = ProbMatrix(np.clip(values, 0.0, 1.0))
    return CandidateEstimate(estimate, Family.SBM, k, fit_seed)


def dcbm_estimate(
    a_train: Graph, labels, p: float, *, fit_seed: int = 0
) -> CandidateEstimate:
    """Degree-corrected block fit: per-node propensities ``theta_i`` times the
    block edge totals, rescaled by ``1/(1-p)`` and clipped.  Zero-degree nodes
    (and zero-degree blocks) get ``theta = 0``."""
    labels = _check_fit_inputs(a_train, labels, p)
    k = int(labels.max()) + 1 if labels.size else 1
    a = a_train.adjacency()
    onehot = np.zeros((a_train.n, k))
    onehot[np.arange(a_train.n), labels] = 1.0
    block_totals = onehot.T @ a @ onehot  # within-block edges counted twice
    degrees = a_train.degrees().astype(float)
    group_degree = np.bincount(labels, weights=degrees, minlength=k)
    theta = np.divide(
        degrees,
        group_degree[labels],
        out=np.zeros_like(degrees),
        where=group_degree[labels] > 0,
    )
    values = np.outer(theta, theta) * block_totals[labels][:, labels] / (1.0 - p)
    estimate = ProbMatrix(np.clip(values, 0.0, 1.0))
    return CandidateEstimate(estimate, Family.DCBM, k, fit_seed)


def _usvt_from_basis(
    basis: SpectralBasis, rank: int, p: float, *, fit_seed: int = 0
) -> CandidateEstimate:
    v = basis.eigenvectors[:, :rank]
    lam = basis.eigenvalues[:rank]
    recon = (v * lam) @ v.T
    recon = (recon + recon.T) / 2.0
    estimate = ProbMatrix(np.clip(recon / (1.0 - p), 0.0, 1.0))
    return CandidateEstimate(estimate, Family.USVT, rank, fit_seed)


def usvt_estimate(
    a_train: Graph, rank: int | None = None, p: float = 0.0, *, fit_seed: int = 0
) -> CandidateEstimate:
    """Reconstruction from the top-``rank`` singular components of the
    adjacency (default rank: cube-root rule), rescaled and clipped."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"holdout probability {p} must lie in [0, 1)")
    if rank is None:
        rank = default_usvt_rank(a_train.n)
    if not 1 <= rank <= a_train.n:
        raise ValueError(f"rank={rank} outside [1, n={a_train.n}]")
    basis = leading_eigen(a_train, rank)
    return _usvt_from_basis(basis, rank, p, fit_seed=fit_seed)


def build_candidates(
    g: Graph,
    mask: DyadMask,
    kmax: int,
    seed: int,
    *,
    workers: int = 1,
    method: str = "auto",
    usvt_rank: int | None = None,
) -> list[CandidateEstimate]:
    """Fit the recommended candidate set on the training graph.

    Returns ``2*kmax + 1`` candidates: SBM for k=1..kmax, DCBM for k=1..kmax,
    then USVT, all sharing one eigendecomposition.  Deterministic given
    ``seed``; per-candidate seeds are derived from it, so parallel execution
    (``workers > 1``) is bit-identical to sequential.
    """
    if kmax < 1:
        raise ValueError("kmax must be at least 1")
    if mask.p >= 1.0:
        raise ValueError("cannot rescale candidates fitted with holdout probability 1")
    a_train = train_adjacency(g, mask)
    rank = usvt_rank if usvt_rank is not None else default_usvt_rank(g.n)
    if not 1 <= rank <= g.n:
        raise ValueError(f"usvt rank={rank} outside [1, n={g.n}]")
    n_components = min(g.n, max(kmax, rank))
    basis = leading_eigen(a_train, n_components, method=method)
    p = mask.p

    def fit_sbm(k: int) -> CandidateEstimate:
        s = child_seed(seed, STREAM_KMEANS_SBM, k)
        return sbm_estimate(a_train, spectral_clustering(basis, k, s), p, fit_seed=s)

    def fit_dcbm(k: int) -> CandidateEstimate:
        s = child_seed(seed, STREAM_KMEANS_DCBM, k)
        return dcbm_estimate(
            a_train, spherical_spectral_clustering(basis, k, s), p, fit_seed=s
        )

    jobs = (
        [lambda k=k: fit_sbm(k) for k in range(1, kmax + 1)]
        + [lambda k=k: fit_dcbm(k) for k in range(1, kmax + 1)]
        + [lambda: _usvt_from_basis(basis, rank, p, fit_seed=seed)]
    )
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda job: job(), jobs))
    return [job() for job in jobs]


def export_candidates(
    cands: list[CandidateEstimate], directory, rescale_p: float = 0.0
) -> Path:
    """Write each candidate matrix in binary form plus a JSON manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = []
    for cand in cands:
        name = f"candidate_{cand.family.value}_{cand.k}.nmx"
        save_prob_matrix(cand.estimate, directory / name)
        manifest.append(
            {
                "family": cand.family.value,
                "k": cand.k,
                "seed": cand.fit_seed,
                "rescale_p": float(rescale_p),
                "file": name,
            }
        )
    path = directory / "manifest.json"
    with open(path, "w") as fh:
        json.dump({"candidates": manifest}, fh, indent=2)
        fh.write("\n")
    return path
