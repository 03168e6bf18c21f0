"""Synthetic ground-truth models with expected-degree calibration.

Five generators: three graphon kernels on a fixed latent grid, a six-block
stochastic block model, and a logistic latent space model.  Each is scaled so
the expected average degree ``sum_{i != j} P_ij / n`` matches the requested
target to relative tolerance 1e-6, then adjacency matrices are sampled with
independent Bernoulli dyads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import expit

from .errors import InfeasibleDegreeError
from .graph import Graph, ProbMatrix
from .rng import STREAM_ADJACENCY, STREAM_MODEL, rng_for

_DEGREE_RTOL = 1e-6

# Piecewise-constant three-block kernel (rank 3).
GRAPHON1_BLOCKS = np.array(
    [[0.9, 0.4, 0.1], [0.4, 0.7, 0.3], [0.1, 0.3, 0.8]]
)

# Six-block default: 0.5 on the diagonal, 0.1 off, pre-scaling.
SBM6_BLOCKS = np.full((6, 6), 0.1) + 0.4 * np.eye(6)


class ModelKind(str, Enum):
    GRAPHON1 = "graphon1"
    GRAPHON2 = "graphon2"
    GRAPHON3 = "graphon3"
    SBM6 = "sbm6"
    LSM = "lsm"


@dataclass(frozen=True)
class ModelSpec:
    """Which model to generate, at what size, density, and seed.

    ``extras`` holds kind-specific settings: ``latent_dim`` for the latent
    space model, ``block_matrix`` for the six-block model, ``random_latents``
    for the graphons.
    """

    kind: ModelKind
    n: int
    target_degree: float
    seed: int = 0
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("model size must be at least 2")
        if not 0.0 < self.target_degree <= self.n - 1:
            raise ValueError(
                f"target degree {self.target_degree} outside (0, n-1={self.n - 1}]"
            )


def _grid(n: int) -> np.ndarray:
    return (np.arange(n) + 0.5) / n


def graphon_kernel(kind: ModelKind | str, n: int, latents=None) -> np.ndarray:
    """Kernel values on the latent grid, diagonal included and pre-scaling."""
    kind = ModelKind(kind)
    u = _grid(n) if latents is None else np.asarray(latents, dtype=float)
    if kind is ModelKind.GRAPHON1:
        idx = np.clip(np.ceil(3.0 * u).astype(int) - 1, 0, 2)
        return GRAPHON1_BLOCKS[idx][:, idx]
    if kind is ModelKind.GRAPHON2:
        return 0.5 + 0.4 * np.sin(5.0 * np.pi * (u[:, None] + u[None, :]))
    if kind is ModelKind.GRAPHON3:
        return 0.9 * np.exp(-3.0 * np.abs(u[:, None] - u[None, :]) ** 0.8)
    raise ValueError(f"{kind.value} is not a graphon kernel")


def sbm6_kernel(n: int, block_matrix=None) -> np.ndarray:
    """Block-constant kernel with six (near-)equal contiguous communities."""
    blocks = SBM6_BLOCKS if block_matrix is None else np.asarray(block_matrix, float)
    k = blocks.shape[0]
    base = n // k
    labels = np.minimum(np.arange(n) // base, k - 1) if base else np.zeros(n, int)
    return blocks[labels][:, labels]


def expected_degree(p: ProbMatrix) -> float:
    """Realized expected average degree ``sum_{i != j} P_ij / n``."""
    return float(p.values.sum() / p.n)


def _off_diagonal_degree(values: np.ndarray) -> float:
    n = values.shape[0]
    return float((values.sum() - np.trace(values)) / n)


def _calibrate_clip_scale(kernel: np.ndarray, target: float) -> tuple[float, ProbMatrix]:
    """Solve ``alpha`` so the degree of ``min(1, alpha * kernel)`` hits target."""
    n = kernel.shape[0]

    def degree(alpha: float) -> float:
        return _off_diagonal_degree(np.minimum(1.0, alpha * kernel))

    positive = (kernel > 0).sum() - (np.diag(kernel) > 0).sum()
    ceiling = positive / n
    if target > ceiling * (1.0 + 1e-12):
        raise InfeasibleDegreeError(
            f"target degree {target} exceeds the kernel ceiling {ceiling:.6g}"
        )
    hi = 1.0
    for _ in range(200):
        if degree(hi) >= target:
            break
        hi *= 2.0
    else:
        raise InfeasibleDegreeError(f"could not bracket target degree {target}")
    lo = 0.0
    best_alpha, best_gap = hi, abs(degree(hi) - target)
    for _ in range(200):
        mid = (lo + hi) / 2.0
        value = degree(mid)
        gap = abs(value - target)
        if gap < best_gap:
            best_alpha, best_gap = mid, gap
        if gap <= _DEGREE_RTOL * target:
            break
        if value < target:
            lo = mid
        else:
            hi = mid
    if best_gap > _DEGREE_RTOL * target:
        raise InfeasibleDegreeError(
            f"degree calibration stalled at relative gap {best_gap / target:.2e}"
        )
    return best_alpha, ProbMatrix(np.minimum(1.0, best_alpha * kernel))


def graphon_matrix(spec: ModelSpec) -> ProbMatrix:
    """Graphon probability matrix on the fixed grid, degree-calibrated.

    ``extras["random_latents"]`` swaps the equispaced grid for seeded uniform
    latent positions; by default replications vary only through the Bernoulli
    noise of :func:`sample_adjacency`.
    """
    if spec.kind not in (ModelKind.GRAPHON1, ModelKind.GRAPHON2, ModelKind.GRAPHON3):
        raise ValueError(f"{spec.kind.value} is not a graphon model")
    latents = None
    if spec.extras.get("random_latents"):
        latents = rng_for(spec.seed, STREAM_MODEL).random(spec.n)
    kernel = graphon_kernel(spec.kind, spec.n, latents)
    _, matrix = _calibrate_clip_scale(kernel, spec.target_degree)
    return matrix


def sbm_matrix(spec: ModelSpec) -> ProbMatrix:
    if spec.kind is not ModelKind.SBM6:
        raise ValueError(f"{spec.kind.value} is not the block model")
    kernel = sbm6_kernel(spec.n, spec.extras.get("block_matrix"))
    _, matrix = _calibrate_clip_scale(kernel, spec.target_degree)
    return matrix


def lsm_from_latents(latents: np.ndarray, intercept: float) -> ProbMatrix:
    """Logistic model ``P_ij = sigmoid(2 a + <Z_i, Z_j>)`` for given latents."""
    latents = np.asarray(latents, dtype=float)
    return ProbMatrix(expit(2.0 * intercept + latents @ latents.T))


def lsm_matrix(spec: ModelSpec) -> ProbMatrix:
    """Latent space model with seeded centered Gaussian latents and a common
    intercept solved by bisection to hit the target degree."""
    if spec.kind is not ModelKind.LSM:
        raise ValueError(f"{spec.kind.value} is not the latent space model")
    dim = int(spec.extras.get("latent_dim", 4))
    if dim < 1:
        raise ValueError("latent dimension must be at least 1")
    latents = rng_for(spec.seed, STREAM_MODEL).standard_normal((spec.n, dim))
    latents = latents - latents.mean(axis=0)
    gram = latents @ latents.T

    def degree(a: float) -> float:
        return _off_diagonal_degree(expit(2.0 * a + gram))

    target = spec.target_degree
    lo, hi = 0.0, 0.0
    step = 1.0
    while degree(lo) > target:
        lo -= step
        step *= 2.0
        if lo < -512:
            raise InfeasibleDegreeError(f"target degree {target} unreachable")
    step = 1.0
    while degree(hi) < target:
        hi += step
        step *= 2.0
        if hi > 512:
            raise InfeasibleDegreeError(f"target degree {target} unreachable")
    best_a, best_gap = hi, abs(degree(hi) - target)
    for _ in range(200):
        mid = (lo + hi) / 2.0
        value = degree(mid)
        gap = abs(value - target)
        if gap < best_gap:
            best_a, best_gap = mid, gap
        if gap <= _DEGREE_RTOL * target:
            break
        if value < target:
            lo = mid
        else:
            hi = mid
    if best_gap > _DEGREE_RTOL * target:
        raise InfeasibleDegreeError(
            f"degree calibration stalled at relative gap {best_gap / target:.2e}"
        )
    return ProbMatrix(expit(2.0 * best_a + gram))


def generate_matrix(spec: ModelSpec) -> ProbMatrix:
    """Dispatch to the generator for ``spec.kind``."""
    if spec.kind in (ModelKind.GRAPHON1, ModelKind.GRAPHON2, ModelKind.GRAPHON3):
        return graphon_matrix(spec)
    if spec.kind is ModelKind.SBM6:
        return sbm_matrix(spec)
    return lsm_matrix(spec)


def sample_adjacency(p: ProbMatrix, seed: int) -> Graph:
    """Independent Bernoulli draw of each unordered pair; no self-loops."""
    values = p.values
    if values.min() < 0.0 or values.max() > 1.0:
        raise ValueError("probabilities must lie in [0, 1]; clip first")
    iu, ju = np.triu_indices(p.n, 1)
    draws = rng_for(seed, STREAM_ADJACENCY).random(len(iu))
    keep = draws < values[iu, ju]
    return Graph(p.n, np.column_stack([iu[keep], ju[keep]]))
