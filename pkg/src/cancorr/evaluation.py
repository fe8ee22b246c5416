"""Metrics and model selection.

Projection matrices are l x N (one canonical direction per row, one
sample per column).  All functions are pure and deterministic; the
cross-validation shuffle is driven entirely by its seed.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import InvalidInput
from .matops import as_matrix


def sparsity(w, zero_tol=0.0):
    """Fraction of entries with |entry| <= zero_tol (default: exact zeros)."""
    w = np.asarray(w, dtype=float)
    if zero_tol < 0:
        raise InvalidInput("zero_tol must be nonnegative")
    return float(np.count_nonzero(np.abs(w) <= zero_tol) / w.size)


def pearson_rows(px, py):
    """Pearson correlation between matching rows of two l x N matrices.

    Rows with zero variance on either side yield 0.
    """
    px = as_matrix(px, "px")
    py = as_matrix(py, "py")
    if px.shape != py.shape:
        raise InvalidInput(f"projection shapes differ: {px.shape} vs {py.shape}")
    if px.shape[1] < 2:
        raise InvalidInput("at least two samples are required for a correlation")
    cx = px - px.mean(axis=1, keepdims=True)
    cy = py - py.mean(axis=1, keepdims=True)
    num = np.einsum("ij,ij->i", cx, cy)
    den = np.sqrt(np.einsum("ij,ij->i", cx, cx) * np.einsum("ij,ij->i", cy, cy))
    out = np.zeros(px.shape[0])
    ok = den > 0
    out[ok] = num[ok] / den[ok]
    return out


def corr_sum(px, py):
    """Sum over directions of the per-direction Pearson correlations."""
    return float(pearson_rows(px, py).sum())


def aroc(scores, relevant):
    """Area under the ROC curve as the Mann-Whitney rank statistic.

    Counts (relevant, irrelevant) pairs ranked correctly, ties at half
    credit; equals the probability a relevant item outranks an
    irrelevant one.  Invariant under strictly increasing transformations
    of the scores.
    """
    scores = np.asarray(scores, dtype=float).ravel()
    relevant = np.asarray(relevant, dtype=bool).ravel()
    if scores.shape != relevant.shape:
        raise InvalidInput("scores and relevance flags must have equal length")
    n_rel = int(relevant.sum())
    n_irr = relevant.size - n_rel
    if n_rel == 0 or n_irr == 0:
        raise InvalidInput("need at least one relevant and one irrelevant candidate")
    ranks = rankdata(scores)
    u = ranks[relevant].sum() - n_rel * (n_rel + 1) / 2.0
    return float(u / (n_rel * n_irr))


@dataclass(frozen=True)
class RetrievalScore:
    per_query_aroc: np.ndarray
    mean_aroc: float


def retrieval_score(query_proj, candidate_proj, pairs):
    """Mean AROC of ranking candidates by cosine similarity to each query.

    ``pairs[j]`` is the index of the single relevant candidate column for
    query column j.
    """
    query_proj = as_matrix(query_proj, "query_proj")
    candidate_proj = as_matrix(candidate_proj, "candidate_proj")
    if query_proj.shape[0] != candidate_proj.shape[0]:
        raise InvalidInput("projections must share the direction count")
    pairs = np.asarray(pairs, dtype=int).ravel()
    if pairs.size != query_proj.shape[1]:
        raise InvalidInput("one relevant index is required per query")
    n_cand = candidate_proj.shape[1]
    if np.any(pairs < 0) or np.any(pairs >= n_cand):
        raise InvalidInput("pair index out of range")
    qn = np.linalg.norm(query_proj, axis=0)
    cn = np.linalg.norm(candidate_proj, axis=0)
    sims = query_proj.T @ candidate_proj / np.outer(
        np.maximum(qn, 1e-300), np.maximum(cn, 1e-300)
    )
    per_query = np.empty(pairs.size)
    for j in range(pairs.size):
        relevant = np.zeros(n_cand, dtype=bool)
        relevant[pairs[j]] = True
        per_query[j] = aroc(sims[j], relevant)
    return RetrievalScore(per_query_aroc=per_query, mean_aroc=float(per_query.mean()))


def knn1_classify(train_proj, labels, test_proj):
    """Label each test column by its Euclidean-nearest training column.

    Distance ties are broken toward the lowest training index.
    """
    train_proj = as_matrix(train_proj, "train_proj")
    test_proj = as_matrix(test_proj, "test_proj")
    if train_proj.shape[0] != test_proj.shape[0]:
        raise InvalidInput("projections must share the direction count")
    labels = np.asarray(labels)
    if labels.ravel().shape[0] != train_proj.shape[1]:
        raise InvalidInput("one label is required per training column")
    labels = labels.ravel()
    tn = np.einsum("ij,ij->j", train_proj, train_proj)
    qn = np.einsum("ij,ij->j", test_proj, test_proj)
    d2 = tn[:, None] + qn[None, :] - 2.0 * (train_proj.T @ test_proj)
    nearest = np.argmin(d2, axis=0)
    return labels[nearest]


@dataclass(frozen=True)
class CvOutcome:
    """Grid-search result: per-fold scores and the selected candidate."""

    grid: tuple
    fold_scores: np.ndarray
    selected: float


def kfold_cv(x, y, grid, k, objective, seed=0):
    """k-fold cross-validation of ``objective`` over a candidate grid.

    Indices are shuffled deterministically by ``seed`` and split into k
    contiguous blocks whose sizes differ by at most one; the same
    partition is reused for every candidate.  ``objective(x_train,
    y_train, x_test, y_test, candidate)`` returns the fold score, and
    the candidate with the best mean wins, ties going to the larger
    (more strongly regularizing) value.
    """
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    if x.shape[1] != y.shape[1]:
        raise InvalidInput("views must share the sample count")
    n = x.shape[1]
    grid = tuple(grid)
    if not grid:
        raise InvalidInput("candidate grid is empty")
    if not 2 <= k <= n:
        raise InvalidInput(f"fold count must lie in [2, {n}], got {k}")
    order = np.random.default_rng(seed).permutation(n)
    folds = np.array_split(order, k)
    scores = np.empty((len(grid), k))
    for ci, candidate in enumerate(grid):
        for fi, fold in enumerate(folds):
            mask = np.ones(n, dtype=bool)
            mask[fold] = False
            scores[ci, fi] = objective(
                x[:, mask], y[:, mask], x[:, fold], y[:, fold], candidate
            )
    means = scores.mean(axis=1)
    best = means.max()
    tied = [grid[i] for i in range(len(grid)) if means[i] == best]
    return CvOutcome(grid=grid, fold_scores=scores, selected=max(tied))
