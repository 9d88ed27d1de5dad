"""Variable-ranking scores for the linear model.

The main ranker scores each variable j by the largest drop in residual sum
of squares obtained by adding j to the span of one of its graph
neighborhoods:

    T_{j|I} = ||P_I y~||^2 - ||P_{I \\ {j}} y~||^2,
    T*_j    = max over neighborhoods I of T_{j|I},

computed through the Gram matrix: with eta = X~' y~, N = I \\ {j},
a = (G_NN)^{-1} G_Nj, A = G_jj - G_jN a and w = eta_j - a' eta_N, the score
is w^2 / (n A). Baselines: marginal ranking, factor-adjusted marginal
ranking, ridgeless high-dimensional projection, Kendall-tau marginal
ranking, and per-block least squares.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateVariableError,
    NumericError,
    ParameterError,
    SingularNeighborhoodError,
)
from .factor import FactorAdjusted, adjust, select_k, svd_design
from .graph import NeighborhoodCollection, build_graph, enumerate_neighborhoods

_SINGULAR_TOL = 1e-10

METHODS = ("facar", "mr", "famr", "holp", "rrcs", "lsr")


@dataclass(frozen=True, eq=False)
class RankingResult:
    """Scores plus the induced ranking.

    ``ranking[r]`` is the 0-based variable index at rank r + 1 (descending
    score, ties broken by ascending variable index).
    """

    method: str
    scores: np.ndarray
    ranking: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def p(self) -> int:
        return self.scores.shape[0]

    def ranks(self) -> np.ndarray:
        """1-based rank of each variable: ranks()[j] = position of j."""
        ranks = np.empty(self.p, dtype=int)
        ranks[self.ranking] = np.arange(1, self.p + 1)
        return ranks

    def top(self, k: int) -> np.ndarray:
        return self.ranking[:k]


def rank_scores(scores: np.ndarray, method: str, meta: dict | None = None) -> RankingResult:
    """Wrap a score vector, ordering by descending score then ascending index."""
    scores = np.asarray(scores, dtype=float)
    order = np.lexsort((np.arange(scores.size), -scores))
    return RankingResult(method=method, scores=scores, ranking=order, meta=meta or {})


def score_local(fa: FactorAdjusted, subset, j: int) -> float:
    """Residual-sum-of-squares drop T_{j|I} for one neighborhood.

    Raises ``SingularNeighborhoodError`` when the local Gram submatrix has an
    eigenvalue below 1e-10.
    """
    idx = tuple(subset)
    if j not in idx:
        raise ParameterError(f"anchor {j} not in subset {idx}")
    gram = fa.gram
    eta = fa.xty
    n = fa.n
    if len(idx) == 1:
        gjj = gram[j, j]
        if gjj < _SINGULAR_TOL:
            raise SingularNeighborhoodError(f"variable {j} has near-zero adjusted norm")
        w = eta[j]
        return float(w * w / (n * gjj))
    if len(idx) == 2:
        other = idx[0] if idx[1] == j else idx[1]
        a = gram[j, j]
        c = gram[other, other]
        b = gram[j, other]
        lam_min = 0.5 * (a + c) - math.hypot(0.5 * (a - c), b)
        if lam_min < _SINGULAR_TOL:
            raise SingularNeighborhoodError(f"neighborhood {idx} is numerically singular")
        coef = b / c
        w = eta[j] - coef * eta[other]
        return float(w * w / (n * (a - coef * b)))
    ids = list(idx)
    sub = gram[np.ix_(ids, ids)]
    if np.linalg.eigvalsh(sub)[0] < _SINGULAR_TOL:
        raise SingularNeighborhoodError(f"neighborhood {idx} is numerically singular")
    pos = ids.index(j)
    others = ids[:pos] + ids[pos + 1 :]
    g_nj = gram[others, j]
    a_vec = np.linalg.solve(gram[np.ix_(others, others)], g_nj)
    amount = gram[j, j] - g_nj @ a_vec
    w = eta[j] - a_vec @ eta[others]
    return float(w * w / (n * amount))


def score_facar(fa: FactorAdjusted, neighborhoods: NeighborhoodCollection,
                meta: dict | None = None) -> RankingResult:
    """Max of the local scores over each variable's neighborhoods.

    Singular neighborhoods are skipped; a variable whose every neighborhood
    is singular (its singleton included) scores 0.
    """
    if len(neighborhoods.sets) != fa.p:
        raise ParameterError(
            f"neighborhoods cover {len(neighborhoods.sets)} nodes but design has {fa.p}"
        )
    scores = np.zeros(fa.p)
    for j in range(fa.p):
        best = None
        for subset in neighborhoods.for_node(j):
            try:
                t = score_local(fa, subset, j)
            except SingularNeighborhoodError:
                continue
            if best is None or t > best:
                best = t
        scores[j] = 0.0 if best is None else best
    return rank_scores(scores, "facar", meta)


def rank_facar(X: np.ndarray, y: np.ndarray, k_rule: str = "threshold",
               delta: float = 0.5, m: int = 2,
               drop_degenerate: bool = False) -> RankingResult:
    """Full pipeline: factor adjustment, threshold graph, local-score max."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    triples = svd_design(X)
    k = select_k(triples.singular_values, X.shape[0], X.shape[1], k_rule)
    fa = adjust(X, y, k, triples=triples)
    g = build_graph(fa.gram, delta, drop_degenerate=drop_degenerate)
    hoods = enumerate_neighborhoods(g, m)
    return score_facar(fa, hoods, meta={"k": k, "delta": delta, "m": m})


def score_mr(X: np.ndarray, y: np.ndarray, drop_degenerate: bool = False) -> RankingResult:
    """Marginal ranking by |x_j' y| / (x_j' x_j)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    norms2 = np.einsum("ij,ij->j", X, X)
    zero = norms2 == 0.0
    if zero.any() and not drop_degenerate:
        raise DegenerateVariableError(f"column {np.flatnonzero(zero)[0]} has zero norm")
    inner = np.abs(X.T @ y)
    scores = np.where(zero, 0.0, inner / np.where(zero, 1.0, norms2))
    return rank_scores(scores, "mr")


def score_famr(fa: FactorAdjusted, drop_degenerate: bool = False) -> RankingResult:
    """Factor-adjusted marginal ranking: sqrt of the singleton local score."""
    scores = np.zeros(fa.p)
    for j in range(fa.p):
        try:
            scores[j] = math.sqrt(score_local(fa, (j,), j))
        except SingularNeighborhoodError:
            if not drop_degenerate:
                raise
            scores[j] = 0.0
    return rank_scores(scores, "famr")


def score_holp(X: np.ndarray, y: np.ndarray, ridge: float = 0.0) -> RankingResult:
    """Ranking by the absolute coordinates of X'(XX' + ridge I)^{-1} y."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if ridge < 0.0:
        raise ParameterError(f"ridge must be nonnegative, got {ridge}")
    b = X @ X.T
    if ridge > 0.0:
        b[np.diag_indices_from(b)] += ridge
    try:
        factor = scipy.linalg.cho_factor(b)
    except scipy.linalg.LinAlgError:
        raise NumericError(
            "XX' is singular; pass a positive ridge (e.g. 1e-8 * trace/n)"
        ) from None
    scores = np.abs(X.T @ scipy.linalg.cho_solve(factor, y))
    return rank_scores(scores, "holp")


def score_rrcs(X: np.ndarray, y: np.ndarray) -> RankingResult:
    """Marginal ranking by |Kendall tau| between each column and y.

    Plain O(n^2) pair counting; tied pairs contribute zero, so a constant
    column scores 0.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    if n < 2:
        raise ParameterError(f"Kendall tau needs n >= 2, got {n}")
    sy = np.sign(y[:, None] - y[None, :])
    denom = n * (n - 1)
    scores = np.empty(X.shape[1])
    for j in range(X.shape[1]):
        col = X[:, j]
        sx = np.sign(col[:, None] - col[None, :])
        scores[j] = abs(float(np.einsum("ik,ik->", sx, sy)) / denom)
    return rank_scores(scores, "rrcs")


def score_lsr_block(X: np.ndarray, y: np.ndarray, h: float) -> RankingResult:
    """Least squares on each consecutive pair of columns {2b, 2b+1};
    score_j = n (1 - h^2) beta_hat_j^2."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if p % 2 != 0:
        raise ParameterError(f"pairwise least squares needs an even p, got {p}")
    scale = n * (1.0 - h * h)
    scores = np.empty(p)
    for b in range(p // 2):
        cols = X[:, 2 * b : 2 * b + 2]
        m = cols.T @ cols
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det) < _SINGULAR_TOL * max(m[0, 0] * m[1, 1], 1.0):
            raise NumericError(f"block {{{2 * b}, {2 * b + 1}}} has a singular Gram matrix")
        rhs = cols.T @ y
        b0 = (m[1, 1] * rhs[0] - m[0, 1] * rhs[1]) / det
        b1 = (m[0, 0] * rhs[1] - m[1, 0] * rhs[0]) / det
        scores[2 * b] = scale * b0 * b0
        scores[2 * b + 1] = scale * b1 * b1
    return rank_scores(scores, "lsr")


def write_ranking_csv(result: RankingResult, path) -> None:
    """Write variable,score,rank rows (1-based variables, 17 significant
    digits on scores)."""
    ranks = result.ranks()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["variable", "score", "rank"])
        for j in range(result.p):
            writer.writerow([j + 1, format(float(result.scores[j]), ".17g"), int(ranks[j])])
