"""End-to-end estimation: split, fit the catalog, estimate weights, combine.

``estimate_graph`` is the single-network entry point used by the CLI and the
link-prediction harness.  With ``reps > 1`` the validation errors and Gram
systems are averaged over independent splits before the weights are computed
once, and the weights are applied to the per-candidate matrices averaged over
the repetition fits.  With ``stitch=True`` the whole pipeline runs twice with
the roles of the held-out and training dyads swapped, and the two combined
estimates are stitched entrywise (each estimate supplies the entries it was
validated on).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .candidates import build_candidates
from .errors import DegenerateGramError
from .graph import Graph, ProbMatrix
from .mixing import (
    MixResult,
    Strategy,
    _errors_from_values,
    _omega_values,
    _summarize_gram,
    _weights_for,
    combine,
    mix,
)
from .rng import STREAM_FIT, STREAM_SPLIT, child_seed
from .splitting import complement, sample_dyad_split


@dataclass(eq=False)
class StitchResult:
    """Full-matrix estimate stitched from the two swapped-role runs."""

    estimate: ProbMatrix
    primary: MixResult
    swapped: MixResult

    def to_dict(self) -> dict:
        return {
            "stitch": True,
            "primary": self.primary.to_dict(),
            "swapped": self.swapped.to_dict(),
        }


def estimate_graph(
    g: Graph,
    kmax: int = 15,
    holdout: float = 0.1,
    strategy: Strategy | str = Strategy.NNL,
    seed: int = 0,
    reps: int = 1,
    stitch: bool = False,
    workers: int = 1,
) -> MixResult | StitchResult:
    """Estimate the edge-probability matrix of an observed graph."""
    strategy = Strategy(strategy)
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if stitch and reps != 1:
        raise ValueError("stitching and error-averaging repetitions do not compose")
    if stitch:
        return _stitched(g, kmax, holdout, strategy, seed, workers)
    if reps == 1:
        mask = sample_dyad_split(g.n, holdout, child_seed(seed, STREAM_SPLIT, 0))
        cands = build_candidates(
            g, mask, kmax, child_seed(seed, STREAM_FIT, 0), workers=workers
        )
        return mix(cands, g, mask, strategy)
    return _averaged(g, kmax, holdout, strategy, seed, reps, workers)


def _stitched(g, kmax, holdout, strategy, seed, workers) -> StitchResult:
    mask = sample_dyad_split(g.n, holdout, child_seed(seed, STREAM_SPLIT, 0))
    cands = build_candidates(
        g, mask, kmax, child_seed(seed, STREAM_FIT, 0), workers=workers
    )
    primary = mix(cands, g, mask, strategy)
    swapped_mask = complement(mask)
    swapped_cands = build_candidates(
        g, swapped_mask, kmax, child_seed(seed, STREAM_FIT, 1), workers=workers
    )
    swapped = mix(swapped_cands, g, swapped_mask, strategy)
    values = np.where(
        mask.bool_matrix(), primary.estimate.values, swapped.estimate.values
    )
    values = np.where(
        mask.bool_matrix() | swapped_mask.bool_matrix(), values, 0.0
    )
    return StitchResult(ProbMatrix(values), primary, swapped)


def _averaged(g, kmax, holdout, strategy, seed, reps, workers) -> MixResult:
    errors_sum = None
    sigma_sum = None
    b_sum = None
    a_norm_sq_sum = 0.0
    mean_values = None  # per-candidate full matrices, aligned by (family, k)
    provenance = None
    for rep in range(reps):
        mask = sample_dyad_split(g.n, holdout, child_seed(seed, STREAM_SPLIT, rep))
        cands = build_candidates(
            g, mask, kmax, child_seed(seed, STREAM_FIT, rep), workers=workers
        )
        values, a = _omega_values(cands, g, mask)
        errors = _errors_from_values(values, a)
        sigma = 2.0 * values @ values.T
        b = 2.0 * values @ a
        if errors_sum is None:
            errors_sum = errors
            sigma_sum = sigma
            b_sum = b
            mean_values = [c.estimate.values.copy() for c in cands]
            provenance = cands
        else:
            errors_sum += errors
            sigma_sum += sigma
            b_sum += b
            for acc, cand in zip(mean_values, cands):
                acc += cand.estimate.values
        a_norm_sq_sum += 2.0 * float((a**2).sum())
    errors_avg = errors_sum / reps
    sigma_avg = sigma_sum / reps
    b_avg = b_sum / reps
    try:
        gram = _summarize_gram(sigma_avg, b_avg)
    except DegenerateGramError:
        if strategy in (Strategy.OLS, Strategy.NNL):
            raise
        gram = None
    weights = _weights_for(strategy, errors_avg, gram)
    averaged_cands = [
        type(cand)(ProbMatrix(acc / reps), cand.family, cand.k, cand.fit_seed)
        for acc, cand in zip(mean_values, provenance)
    ]
    estimate = combine(averaged_cands, weights)
    if gram is not None:
        residual = float(
            weights @ gram.sigma @ weights
            - 2.0 * gram.b @ weights
            + a_norm_sq_sum / reps
        )
    else:
        residual = 0.0
    return MixResult(
        strategy, weights, estimate, errors_avg, max(residual, 0.0), gram
    )
