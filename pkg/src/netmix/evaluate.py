"""Metrics and experiment runners: relative error, link prediction, sweeps."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import IO, Sequence

import numpy as np

from .candidates import build_candidates
from .errors import UndefinedAUCError
from .graph import Graph, ProbMatrix
from .mixing import Strategy, mix
from .pipeline import estimate_graph
from .rng import (
    STREAM_ADJACENCY,
    STREAM_FIT,
    STREAM_LINKPRED,
    STREAM_MODEL,
    STREAM_REP,
    STREAM_SPLIT,
    child_seed,
    rng_for,
)
from .simulate import ModelSpec, generate_matrix, sample_adjacency
from .splitting import sample_dyad_split

ALL_STRATEGIES = (Strategy.ECV, Strategy.EXP, Strategy.OLS, Strategy.NNL)

CSV_COLUMNS = (
    "model",
    "n",
    "degree",
    "kmax",
    "p",
    "strategy",
    "rep",
    "rel_frob",
    "min_candidate_error",
    "auc",
    "delta",
    "kappa",
    "wall_ms",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark cell: a model, the pipeline defaults, and repetitions."""

    model: ModelSpec
    kmax: int = 15
    p: float = 0.1
    strategies: tuple[Strategy, ...] = ALL_STRATEGIES
    reps: int = 1
    seed: int = 0


@dataclass(eq=False)
class LinkPredSplit:
    """Uniformly sampled test dyads with labels, plus the pruned train graph."""

    test_pairs: np.ndarray
    labels: np.ndarray
    train_graph: Graph


def rel_frob(est: ProbMatrix, truth: ProbMatrix) -> float:
    """Squared Frobenius error of the estimate relative to the truth."""
    if est.n != truth.n:
        raise ValueError(f"estimate n={est.n} does not match truth n={truth.n}")
    denom = float((truth.values**2).sum())
    if denom == 0.0:
        raise ValueError("relative error undefined for an all-zero truth")
    return float(((est.values - truth.values) ** 2).sum() / denom)


def linkpred_split(
    g: Graph, frac: float = 0.1, cap: int = 20000, seed: int = 0
) -> LinkPredSplit:
    """Sample ``min(cap, round(frac * pairs))`` dyads uniformly without
    replacement as the test set; the train graph drops them entirely."""
    if g.n < 2:
        raise ValueError("link prediction requires at least 2 nodes")
    if not 0.0 < frac < 1.0:
        raise ValueError(f"test fraction {frac} outside (0, 1)")
    total = g.n * (g.n - 1) // 2
    size = min(int(cap), int(frac * total + 0.5))
    rng = rng_for(seed, STREAM_LINKPRED)
    chosen = np.sort(rng.choice(total, size=size, replace=False)) if size else np.array([], int)
    iu, ju = np.triu_indices(g.n, 1)
    pairs = np.column_stack([iu[chosen], ju[chosen]]).astype(np.int64)
    adj = g.adjacency()
    labels = adj[pairs[:, 0], pairs[:, 1]].astype(np.int64) if size else np.array([], int)
    removed = np.zeros((g.n, g.n), dtype=bool)
    if size:
        removed[pairs[:, 0], pairs[:, 1]] = True
    e = g.edge_array
    keep = ~removed[e[:, 0], e[:, 1]] if len(e) else np.array([], bool)
    train = Graph(g.n, e[keep] if len(e) else [])
    return LinkPredSplit(pairs, labels, train)


def auc(scores, labels) -> float:
    """Probability a random positive outscores a random negative, ties half.

    Midrank form of the exhaustive pair count; raises
    :class:`UndefinedAUCError` when only one class is present.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must have the same length")
    positives = int((labels == 1).sum())
    negatives = int((labels == 0).sum())
    if positives + negatives != labels.size:
        raise ValueError("labels must be 0 or 1")
    if positives == 0 or negatives == 0:
        raise UndefinedAUCError("AUC needs at least one positive and one negative")
    _, inverse, counts = np.unique(scores, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    midranks = (ends - counts + 1 + ends) / 2.0
    rank_sum = float(midranks[inverse][labels == 1].sum())
    return (rank_sum - positives * (positives + 1) / 2.0) / (positives * negatives)


def linkpred_scores(
    split: LinkPredSplit,
    kmax: int = 15,
    p: float = 0.1,
    strategy: Strategy | str = Strategy.NNL,
    seed: int = 0,
) -> np.ndarray:
    """Score each test pair by the combined estimate fitted on the train graph
    with an internal dyad split for weight estimation."""
    result = estimate_graph(
        split.train_graph, kmax=kmax, holdout=p, strategy=strategy, seed=seed
    )
    pairs = split.test_pairs
    return result.estimate.values[pairs[:, 0], pairs[:, 1]]


def linkpred_experiment(
    g: Graph,
    frac: float = 0.1,
    cap: int = 20000,
    kmax: int = 15,
    p: float = 0.1,
    strategy: Strategy | str = Strategy.NNL,
    reps: int = 1,
    seed: int = 0,
) -> dict:
    """Repeat the split/score/AUC loop; each repetition re-splits the graph."""
    per_rep: list[float | None] = []
    for rep in range(reps):
        split = linkpred_split(g, frac, cap, child_seed(seed, STREAM_REP, rep, 0))
        scores = linkpred_scores(
            split, kmax, p, strategy, child_seed(seed, STREAM_REP, rep, 1)
        )
        try:
            per_rep.append(auc(scores, split.labels))
        except UndefinedAUCError:
            per_rep.append(None)  # reported as missing, never as 0.5
    valid = [a for a in per_rep if a is not None]
    return {
        "strategy": Strategy(strategy).value,
        "auc_per_rep": per_rep,
        "auc_mean": float(np.mean(valid)) if valid else None,
        "reps": reps,
    }


@dataclass(eq=False)
class RepRecord:
    model: str
    n: int
    degree: float
    kmax: int
    p: float
    strategy: str
    rep: int
    rel_frob: float
    min_candidate_error: float
    auc: float | None
    delta: float | None
    kappa: float | None
    wall_ms: float

    def as_row(self, include_timing: bool = True) -> list:
        row = [
            self.model,
            self.n,
            repr(self.degree),
            self.kmax,
            repr(self.p),
            self.strategy,
            self.rep,
            repr(self.rel_frob),
            repr(self.min_candidate_error),
            "" if self.auc is None else repr(self.auc),
            "" if self.delta is None else repr(self.delta),
            "" if self.kappa is None else repr(self.kappa),
            repr(self.wall_ms) if include_timing else "",
        ]
        return row


@dataclass(eq=False)
class ExperimentReport:
    config: dict
    rows: list[RepRecord]
    failures: list[dict]

    def medians(self) -> dict[str, float]:
        out = {}
        for strategy in sorted({r.strategy for r in self.rows}):
            vals = [r.rel_frob for r in self.rows if r.strategy == strategy]
            out[strategy] = float(np.median(vals))
        return out

    def median_min_candidate_error(self) -> float:
        per_rep = {}
        for row in self.rows:
            per_rep[row.rep] = row.min_candidate_error
        return float(np.median(list(per_rep.values())))

    def to_dict(self, include_timing: bool = True) -> dict:
        return {
            "config": self.config,
            "medians": self.medians(),
            "median_min_candidate_error": self.median_min_candidate_error()
            if self.rows
            else None,
            "rows": [
                {
                    "model": r.model,
                    "n": r.n,
                    "degree": r.degree,
                    "kmax": r.kmax,
                    "p": r.p,
                    "strategy": r.strategy,
                    "rep": r.rep,
                    "rel_frob": r.rel_frob,
                    "min_candidate_error": r.min_candidate_error,
                    "auc": r.auc,
                    "delta": r.delta,
                    "kappa": r.kappa,
                    **({"wall_ms": r.wall_ms} if include_timing else {}),
                }
                for r in self.rows
            ],
            "failures": self.failures,
        }


def _run_rep(cfg: ExperimentConfig, rep: int) -> list[RepRecord]:
    model = replace(cfg.model, seed=child_seed(cfg.seed, STREAM_MODEL, rep))
    truth = generate_matrix(model)
    observed = sample_adjacency(truth, child_seed(cfg.seed, STREAM_ADJACENCY, rep))
    mask = sample_dyad_split(model.n, cfg.p, child_seed(cfg.seed, STREAM_SPLIT, rep))
    cands = build_candidates(
        observed, mask, cfg.kmax, child_seed(cfg.seed, STREAM_FIT, rep)
    )
    min_candidate = min(rel_frob(c.estimate, truth) for c in cands)
    rows = []
    for strategy in cfg.strategies:
        started = time.perf_counter()
        result = mix(cands, observed, mask, strategy)
        error = rel_frob(result.estimate, truth)
        wall_ms = (time.perf_counter() - started) * 1000.0
        rows.append(
            RepRecord(
                model=cfg.model.kind.value,
                n=model.n,
                degree=cfg.model.target_degree,
                kmax=cfg.kmax,
                p=cfg.p,
                strategy=Strategy(strategy).value,
                rep=rep,
                rel_frob=error,
                min_candidate_error=min_candidate,
                auc=None,
                delta=result.delta,
                kappa=result.kappa,
                wall_ms=wall_ms,
            )
        )
    return rows


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Generate, split, fit, and mix for every repetition of one config.

    A failed repetition is recorded under ``failures`` and skipped.  Results
    are deterministic given the config seed and independent of ``workers``.
    """
    config = {
        "model": cfg.model.kind.value,
        "n": cfg.model.n,
        "degree": cfg.model.target_degree,
        "extras": dict(cfg.model.extras),
        "kmax": cfg.kmax,
        "p": cfg.p,
        "strategies": [Strategy(s).value for s in cfg.strategies],
        "reps": cfg.reps,
        "seed": cfg.seed,
    }

    def attempt(rep: int):
        try:
            return rep, _run_rep(cfg, rep), None
        except Exception as exc:  # a failed rep must not kill the sweep
            return rep, [], f"{type(exc).__name__}: {exc}"

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(attempt, range(cfg.reps)))
    else:
        outcomes = [attempt(rep) for rep in range(cfg.reps)]
    rows: list[RepRecord] = []
    failures: list[dict] = []
    for rep, rep_rows, error in outcomes:
        if error is None:
            rows.extend(rep_rows)
        else:
            failures.append({"rep": rep, "error": error})
    return ExperimentReport(config, rows, failures)


def write_report_csv(
    reports: Sequence[ExperimentReport], stream: IO, include_timing: bool = True
) -> None:
    """Flat CSV, one row per rep and strategy, fixed column order."""
    stream.write(",".join(CSV_COLUMNS) + "\n")
    for report in reports:
        for row in report.rows:
            stream.write(
                ",".join(str(v) for v in row.as_row(include_timing)) + "\n"
            )
