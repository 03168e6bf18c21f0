"""Aggregation of candidate estimates using the held-out entries.

Four strategies: pick the argmin validation error, exponential weights,
ordinary least squares, and non-negative least squares (projection of the
held-out adjacency onto the cone spanned by the candidates).  All inner
products restricted to the hold-out set count each dyad twice (the mask is
applied symmetrically); the factor is uniform and cancels in every argmin.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateGramError
from .graph import Graph, ProbMatrix, clip_unit
from .splitting import DyadMask

logger = logging.getLogger(__name__)


class Strategy(str, Enum):
    ECV = "ecv"
    EXP = "exp"
    OLS = "ols"
    NNL = "nnl"


@dataclass(frozen=True)
class PartitionCertificate:
    """A partition of the candidate indices with its self-regularization bound."""

    groups: tuple[tuple[int, ...], ...]
    bound: float


@dataclass(eq=False)
class GramSummary:
    """Gram matrix of the candidates on the hold-out set plus diagnostics.

    ``sigma[r, s]`` is the inner product of candidates r and s restricted to
    the held-out entries, ``b[r]`` the inner product with the held-out
    adjacency.  ``delta`` is the minimum pairwise cosine, ``kappa`` the
    simplex minimum of ``beta' sigma beta / max|sigma|``.
    """

    sigma: np.ndarray
    b: np.ndarray
    delta: float
    kappa: float
    zero_norm_indices: tuple[int, ...] = ()
    partition_certificate: PartitionCertificate | None = None

    @property
    def m(self) -> int:
        return len(self.b)


@dataclass(eq=False)
class MixResult:
    """Weights, combined estimate, and diagnostics for one aggregation run."""

    strategy: Strategy
    weights: np.ndarray
    estimate: ProbMatrix
    validation_errors: np.ndarray
    residual_on_omega: float  # squared Frobenius residual of the weighted fit
    gram: GramSummary | None = None

    @property
    def delta(self) -> float | None:
        return None if self.gram is None else self.gram.delta

    @property
    def kappa(self) -> float | None:
        return None if self.gram is None else self.gram.kappa

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "weights": [float(w) for w in self.weights],
            "validation_errors": [float(e) for e in self.validation_errors],
            "delta": self.delta,
            "kappa": self.kappa,
            "residual_on_omega": float(self.residual_on_omega),
        }


def _omega_values(cands, g: Graph, mask: DyadMask) -> tuple[np.ndarray, np.ndarray]:
    """Candidate and adjacency values at the held-out pairs (one per dyad)."""
    if g.n != mask.n:
        raise ValueError(f"graph n={g.n} does not match mask n={mask.n}")
    if not cands:
        raise ValueError("at least one candidate is required")
    iu, ju = mask.pair_arrays()
    rows = []
    for cand in cands:
        if cand.estimate.n != mask.n:
            raise ValueError(
                f"candidate n={cand.estimate.n} does not match mask n={mask.n}"
            )
        rows.append(cand.estimate.values[iu, ju])
    a = g.adjacency()[iu, ju]
    return np.array(rows).reshape(len(cands), -1), a


def _errors_from_values(values: np.ndarray, a: np.ndarray) -> np.ndarray:
    return 2.0 * ((values - a[None, :]) ** 2).sum(axis=1)


def validation_errors(cands, g: Graph, mask: DyadMask) -> np.ndarray:
    """Squared Frobenius distance of each candidate to the held-out adjacency."""
    values, a = _omega_values(cands, g, mask)
    return _errors_from_values(values, a)


def ecv_select(errors) -> int:
    """Index of the smallest validation error; ties go to the lowest index."""
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ValueError("ecv_select requires at least one error value")
    return int(np.argmin(errors))


def exp_mix(errors) -> np.ndarray:
    """Weights proportional to exp(-error), computed after subtracting the
    minimum error (the weights are invariant to the shift, and the raw
    squared errors would underflow)."""
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ValueError("exp_mix requires at least one error value")
    if not np.isfinite(errors).all():
        raise ValueError("exp_mix requires finite validation errors")
    shifted = np.exp(-(errors - errors.min()))
    return shifted / shifted.sum()


def min_norm_solution(sigma, b, rcond: float = 1e-10) -> np.ndarray:
    """Minimum-norm solution of ``sigma @ w = b`` via the spectral
    pseudo-inverse with relative eigenvalue cutoff ``rcond``."""
    sigma = np.asarray(sigma, dtype=float)
    b = np.asarray(b, dtype=float)
    w, v = np.linalg.eigh(sigma)
    cutoff = rcond * max(float(w.max(initial=0.0)), 0.0)
    keep = w > cutoff
    if not keep.any():
        return np.zeros_like(b)
    return v[:, keep] @ ((v[:, keep].T @ b) / w[keep])


def ols_mix(gram: GramSummary) -> np.ndarray:
    """Unconstrained least-squares weights (minimum-norm on rank deficiency)."""
    return min_norm_solution(gram.sigma, gram.b)


def kkt_residual(sigma, b, weights) -> float:
    """Stationarity residual of the non-negative least-squares system.

    With ``gradient = 2 (sigma w - b)`` this is the largest violation of
    ``gradient >= 0`` and ``|w * gradient| <= max(1, |b|)`` componentwise,
    skipping coordinates frozen by a zero diagonal.
    """
    sigma = np.asarray(sigma, dtype=float)
    b = np.asarray(b, dtype=float)
    weights = np.asarray(weights, dtype=float)
    active = np.diag(sigma) > 0
    if not active.any():
        return 0.0
    gradient = 2.0 * (sigma @ weights - b)
    negativity = float(np.maximum(-gradient[active], 0.0).max())
    complementarity = float(
        (np.abs(weights * gradient) / np.maximum(1.0, np.abs(b)))[active].max()
    )
    return max(negativity, complementarity)


def nnls_coordinate_descent(
    sigma, b, *, tol: float = 1e-8, max_sweeps: int = 10_000
) -> np.ndarray:
    """Solve ``min_{w >= 0} w' sigma w - 2 b' w`` by cyclic coordinate descent.

    Starts at zero and cycles ``w_r <- max(0, w_r - (sigma w - b)_r / sigma_rr)``
    until the KKT residual drops to ``tol`` or ``max_sweeps`` is reached.
    Coordinates with a zero diagonal are frozen at 0 with a warning.
    """
    sigma = np.asarray(sigma, dtype=float)
    b = np.asarray(b, dtype=float)
    m = len(b)
    diag = np.diag(sigma)
    active = np.flatnonzero(diag > 0)
    if len(active) < m:
        logger.warning(
            "nnls: freezing %d zero-norm coordinate(s) at 0", m - len(active)
        )
    weights = np.zeros(m)
    for _ in range(max_sweeps):
        residual = sigma @ weights - b
        for r in active:
            step = max(0.0, weights[r] - residual[r] / diag[r]) - weights[r]
            if step != 0.0:
                weights[r] += step
                residual += step * sigma[:, r]
        if kkt_residual(sigma, b, weights) <= tol:
            break
    return weights


def nnl_mix(gram: GramSummary) -> np.ndarray:
    """Non-negative least-squares weights (cone projection of the data)."""
    return nnls_coordinate_descent(gram.sigma, gram.b)


def simplex_min_quadratic(
    sigma, *, max_iter: int = 5000, gap_tol: float = 1e-8
) -> tuple[float, np.ndarray]:
    """Minimize ``beta' sigma beta`` over the probability simplex.

    Frank-Wolfe with away steps and exact line search; the linear oracle is
    the coordinate argmin of ``sigma @ beta``.  Warm-started at the uniform
    point, stopped at duality gap ``gap_tol`` or ``max_iter`` iterations.
    Returns ``(value, argmin)``.
    """
    sigma = np.asarray(sigma, dtype=float)
    m = len(sigma)
    beta = np.full(m, 1.0 / m)
    for _ in range(max_iter):
        grad = 2.0 * (sigma @ beta)
        towards = int(np.argmin(grad))
        gap = float(grad @ beta - grad[towards])
        if gap <= gap_tol:
            break
        support = np.flatnonzero(beta > 1e-15)
        away = support[int(np.argmax(grad[support]))]
        d_towards = -beta.copy()
        d_towards[towards] += 1.0
        d_away = beta.copy()
        d_away[away] -= 1.0
        if grad @ d_towards <= grad @ d_away:
            direction, step_max = d_towards, 1.0
        else:
            share = beta[away]
            if share >= 1.0:
                direction, step_max = d_towards, 1.0
            else:
                direction, step_max = d_away, share / (1.0 - share)
        slope = float(grad @ direction)
        curvature = float(direction @ sigma @ direction)
        if curvature <= 0.0:
            step = step_max
        else:
            step = min(step_max, -slope / (2.0 * curvature))
        if step <= 0.0:
            break
        beta = np.maximum(beta + step * direction, 0.0)
        beta /= beta.sum()
    return float(beta @ sigma @ beta), beta


def partition_bound(sigma, groups) -> float | None:
    """Self-regularization lower bound certified by a partition of candidates.

    Valid for entrywise-nonnegative Gram matrices: ``beta' sigma beta`` is at
    least the harmonic combination of the within-group minimum inner products,
    so ``kappa >= 1 / (max|sigma| * sum_t 1/g_t)``.  For equal-norm candidates
    this reduces to (within-group cosine floor) / T.  Returns None when the
    partition does not certify anything (negative entries or a nonpositive
    within-group minimum).
    """
    sigma = np.asarray(sigma, dtype=float)
    m = len(sigma)
    flat = sorted(i for group in groups for i in group)
    if flat != list(range(m)):
        raise ValueError("groups must partition the candidate indices")
    if sigma.size == 0 or sigma.min() < 0:
        return None
    sup = float(np.abs(sigma).max())
    if sup == 0.0:
        return None
    inv_sum = 0.0
    for group in groups:
        idx = np.asarray(group, dtype=int)
        gmin = float(sigma[np.ix_(idx, idx)].min())
        if gmin <= 0.0:
            return None
        inv_sum += 1.0 / gmin
    return 1.0 / (sup * inv_sum)


def _gram_from_values(values: np.ndarray, a: np.ndarray) -> GramSummary:
    sigma = 2.0 * values @ values.T
    b = 2.0 * values @ a
    return _summarize_gram(sigma, b)


def _summarize_gram(sigma: np.ndarray, b: np.ndarray) -> GramSummary:
    diag = np.diag(sigma)
    nonzero = diag > 0
    if not nonzero.any():
        raise DegenerateGramError("every candidate is zero on the hold-out set")
    zero_idx = tuple(int(i) for i in np.flatnonzero(~nonzero))
    if zero_idx:
        logger.warning("gram summary: skipping zero-norm candidates %s", zero_idx)
    norms = np.sqrt(diag[nonzero])
    cosines = sigma[np.ix_(nonzero, nonzero)] / np.outer(norms, norms)
    delta = float(cosines.min())
    sup = float(np.abs(sigma).max())
    kappa, _ = simplex_min_quadratic(sigma / sup)
    singleton = tuple((int(i),) for i in range(len(b)))
    bound = partition_bound(sigma, singleton)
    certificate = None if bound is None else PartitionCertificate(singleton, bound)
    return GramSummary(sigma, b, delta, kappa, zero_idx, certificate)


def gram_summary(cands, g: Graph, mask: DyadMask) -> GramSummary:
    """Exact Gram matrix and diagnostics of the candidates on the mask."""
    values, a = _omega_values(cands, g, mask)
    return _gram_from_values(values, a)


def combine(cands, weights) -> ProbMatrix:
    """Entrywise weighted sum of the candidates over the full matrix, clipped."""
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(cands):
        raise ValueError(
            f"{len(weights)} weights for {len(cands)} candidates"
        )
    if not cands:
        raise ValueError("at least one candidate is required")
    total = np.zeros((cands[0].estimate.n, cands[0].estimate.n))
    for w, cand in zip(weights, cands):
        total += w * cand.estimate.values
    return clip_unit(ProbMatrix(total))


@dataclass(eq=False)
class ConeProjection:
    """Best non-negative combination of the candidates for a known truth."""

    weights: np.ndarray
    projection_error: float  # Frobenius distance of the projection to truth


def oracle_cone_projection(cands, truth: ProbMatrix, mask: DyadMask) -> ConeProjection:
    """Project the true matrix (simulation mode) onto the candidate cone."""
    if truth.n != mask.n:
        raise ValueError(f"truth n={truth.n} does not match mask n={mask.n}")
    iu, ju = mask.pair_arrays()
    values = np.array(
        [cand.estimate.values[iu, ju] for cand in cands]
    ).reshape(len(cands), -1)
    t = truth.values[iu, ju]
    sigma = 2.0 * values @ values.T
    b = 2.0 * values @ t
    weights = nnls_coordinate_descent(sigma, b)
    sq = float(weights @ sigma @ weights - 2.0 * b @ weights + 2.0 * (t**2).sum())
    return ConeProjection(weights, float(np.sqrt(max(sq, 0.0))))


def _weights_for(
    strategy: Strategy, errors: np.ndarray, gram: GramSummary | None
) -> np.ndarray:
    if strategy is Strategy.ECV:
        weights = np.zeros(len(errors))
        weights[ecv_select(errors)] = 1.0
        return weights
    if strategy is Strategy.EXP:
        return exp_mix(errors)
    if gram is None:
        raise DegenerateGramError("every candidate is zero on the hold-out set")
    if strategy is Strategy.OLS:
        return ols_mix(gram)
    if strategy is Strategy.NNL:
        return nnl_mix(gram)
    raise ValueError(f"unknown strategy {strategy!r}")


def mix(cands, g: Graph, mask: DyadMask, strategy: Strategy | str) -> MixResult:
    """Run one aggregation strategy end to end and collect diagnostics."""
    strategy = Strategy(strategy)
    values, a = _omega_values(cands, g, mask)
    errors = _errors_from_values(values, a)
    try:
        gram = _gram_from_values(values, a)
    except DegenerateGramError:
        if strategy in (Strategy.OLS, Strategy.NNL):
            raise
        gram = None
    weights = _weights_for(strategy, errors, gram)
    estimate = combine(cands, weights)
    a_norm_sq = 2.0 * float((a**2).sum())
    if gram is not None:
        residual = float(
            weights @ gram.sigma @ weights - 2.0 * gram.b @ weights + a_norm_sq
        )
    else:
        residual = float(2.0 * (((weights @ values) - a) ** 2).sum())
    return MixResult(strategy, weights, estimate, errors, max(residual, 0.0), gram)
