"""Independent oracles and builders shared by the test modules.

These deliberately avoid the library's own solver paths: NNLS and the simplex
quadratic are solved by exhaustive support enumeration, AUC by exhaustive
pair counting, so the fast implementations can be checked against them.
"""

import itertools

import numpy as np

from netmix import Graph


def nnls_enumerate(sigma, b):
    """Global minimum of ``w' sigma w - 2 b' w`` over ``w >= 0``.

    Enumerates every support, solves the unconstrained restriction, keeps
    feasible solutions, and returns the best (weights, objective).  Exact for
    small m; the empty support (all zeros, objective 0) is always feasible.
    """
    sigma = np.asarray(sigma, float)
    b = np.asarray(b, float)
    m = len(b)
    best_w = np.zeros(m)
    best_obj = 0.0
    for size in range(1, m + 1):
        for support in itertools.combinations(range(m), size):
            idx = list(support)
            sub = sigma[np.ix_(idx, idx)]
            try:
                w_s = np.linalg.solve(sub, b[idx])
            except np.linalg.LinAlgError:
                w_s = np.linalg.lstsq(sub, b[idx], rcond=None)[0]
            if (w_s < -1e-12).any():
                continue
            w = np.zeros(m)
            w[idx] = np.maximum(w_s, 0.0)
            obj = float(w @ sigma @ w - 2.0 * b @ w)
            if obj < best_obj:
                best_obj = obj
                best_w = w
    return best_w, best_obj


def simplex_min_enumerate(sigma):
    """Minimum of ``beta' sigma beta`` over the probability simplex.

    Enumerates supports and solves the equality-constrained stationarity
    system on each; the global optimum lies in the relative interior of the
    face spanned by its own support, so it is always visited.
    """
    sigma = np.asarray(sigma, float)
    m = len(sigma)
    best = np.inf
    for size in range(1, m + 1):
        for support in itertools.combinations(range(m), size):
            idx = list(support)
            k = len(idx)
            system = np.zeros((k + 1, k + 1))
            system[:k, :k] = 2.0 * sigma[np.ix_(idx, idx)]
            system[:k, k] = -1.0
            system[k, :k] = 1.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            try:
                sol = np.linalg.solve(system, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(system, rhs, rcond=None)[0]
            beta = sol[:k]
            if (beta < -1e-10).any() or abs(beta.sum() - 1.0) > 1e-8:
                continue
            beta = np.maximum(beta, 0.0)
            beta = beta / beta.sum()
            full = np.zeros(m)
            full[idx] = beta
            best = min(best, float(full @ sigma @ full))
    return best


def auc_pairs(scores, labels):
    """AUC by exhaustive positive/negative pair counting, ties worth half."""
    scores = np.asarray(scores, float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


def label_agreement(found, truth, k):
    """Best label agreement over all permutations of the found cluster ids."""
    found = np.asarray(found)
    truth = np.asarray(truth)
    best = 0.0
    for perm in itertools.permutations(range(k)):
        mapped = np.asarray(perm)[found]
        best = max(best, float((mapped == truth).mean()))
    return best


def clique_graph(sizes):
    """Disjoint union of cliques with the given sizes."""
    edges = []
    start = 0
    for size in sizes:
        nodes = range(start, start + size)
        edges.extend(itertools.combinations(nodes, 2))
        start += size
    return Graph(start, edges)


def complete_multipartite(part_sizes):
    """Complete multipartite graph; its adjacency has rank len(part_sizes)."""
    boundaries = np.cumsum([0] + list(part_sizes))
    n = boundaries[-1]
    part = np.zeros(n, dtype=int)
    for t in range(len(part_sizes)):
        part[boundaries[t] : boundaries[t + 1]] = t
    edges = [
        (i, j) for i in range(n) for j in range(i + 1, n) if part[i] != part[j]
    ]
    return Graph(n, edges)


def planted_block_matrix(labels, block_probs):
    """Edge-probability matrix from block labels and a block matrix."""
    labels = np.asarray(labels)
    block_probs = np.asarray(block_probs, float)
    values = block_probs[labels][:, labels]
    np.fill_diagonal(values, 0.0)
    return values
