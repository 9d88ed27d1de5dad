"""Factor adjustment: truncated SVD of the design and removal of the top
singular directions from both the design and the response.

Writing X = sum_k s_k u_k v_k' (thin SVD), the adjusted pair is

    y_tilde = y - sum_{k<=K} (u_k' y) u_k,
    X_tilde = X - sum_{k<=K} s_k u_k v_k',

and the adjusted Gram matrix G = X_tilde' X_tilde / n equals the raw Gram
matrix with its top K eigenvalues zeroed out.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NumericError, ParameterError

K_RULES = ("threshold", "elbow")


@dataclass(frozen=True)
class SvdTriples:
    """Thin SVD of an n x p matrix: values descending, vectors unit norm.

    ``left`` is n x k with columns u_k, ``right`` is p x k with columns v_k,
    k = min(n, p).
    """

    singular_values: np.ndarray
    left: np.ndarray
    right: np.ndarray

    @property
    def n(self) -> int:
        return self.left.shape[0]

    @property
    def p(self) -> int:
        return self.right.shape[0]

    def truncate(self, k: int) -> "SvdTriples":
        """First k triples."""
        return SvdTriples(self.singular_values[:k], self.left[:, :k], self.right[:, :k])


@dataclass(frozen=True, eq=False)
class FactorAdjusted:
    """Adjusted model after removing the top ``k`` singular directions.

    ``triples`` holds the k retained triples. With k = 0 the adjusted
    quantities equal the raw ones.
    """

    k: int
    y_tilde: np.ndarray
    x_tilde: np.ndarray
    gram: np.ndarray
    triples: SvdTriples

    @property
    def n(self) -> int:
        return self.x_tilde.shape[0]

    @property
    def p(self) -> int:
        return self.x_tilde.shape[1]

    @cached_property
    def xty(self) -> np.ndarray:
        """x_tilde' y_tilde, cached; every local score is a function of it."""
        return self.x_tilde.T @ self.y_tilde

    @property
    def confounders(self) -> np.ndarray:
        """The removed left singular vectors (n x k)."""
        return self.triples.left


def svd_design(X: np.ndarray) -> SvdTriples:
    """Thin SVD of the design matrix, singular values descending."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ParameterError(f"design must be a nonempty 2-d array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NumericError("design contains non-finite entries")
    left, values, right_t = np.linalg.svd(X, full_matrices=False)
    return SvdTriples(singular_values=values, left=left, right=right_t.T)


def select_k_threshold(singular_values: np.ndarray, n: int, p: int) -> int:
    """Number of singular values with s_k^2 strictly above n * log(p).

    Capped at min(n, p) - 1 so the adjusted model keeps at least one
    dimension.
    """
    values = np.asarray(singular_values, dtype=float)
    k = int(np.count_nonzero(values**2 > n * np.log(p)))
    return min(k, min(n, p) - 1)


def select_k_elbow(singular_values: np.ndarray) -> int:
    """Elbow of the squared singular-value scree.

    Picks the k maximizing the relative successive gap
    (s_k^2 - s_{k+1}^2) / (s_{k+1}^2 + 1e-12) over k <= len/2, first index
    winning ties. This gap heuristic is one concrete reading of "elbow";
    the threshold rule is the analyzed default.
    """
    values = np.asarray(singular_values, dtype=float)
    if values.size < 3:
        raise ParameterError(f"elbow rule needs at least 3 singular values, got {values.size}")
    sq = values**2
    gaps = (sq[:-1] - sq[1:]) / (sq[1:] + 1e-12)
    k_max = max(1, values.size // 2)
    return int(np.argmax(gaps[:k_max])) + 1


def select_k(singular_values: np.ndarray, n: int, p: int, rule: str) -> int:
    """Resolve a factor-count rule: "threshold", "elbow", or "fixed:<K>"."""
    if rule == "threshold":
        return select_k_threshold(singular_values, n, p)
    if rule == "elbow":
        return select_k_elbow(singular_values)
    if rule.startswith("fixed:"):
        try:
            k = int(rule.split(":", 1)[1])
        except ValueError:
            raise ParameterError(f"bad fixed K in rule {rule!r}") from None
        if k < 0:
            raise ParameterError(f"fixed K must be nonnegative, got {k}")
        return k
    raise ParameterError(f"unknown K rule {rule!r}; expected threshold, elbow, or fixed:<K>")


def adjust(X: np.ndarray, y: np.ndarray, k: int, triples: SvdTriples | None = None) -> FactorAdjusted:
    """Remove the top-k singular directions from (X, y).

    ``triples`` may carry a precomputed SVD of X; otherwise it is computed
    here. k must be at most min(n, p) - 1.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if y.shape[0] != n:
        raise ParameterError(f"y has length {y.shape[0]} but X has {n} rows")
    if not 0 <= k <= min(n, p) - 1:
        raise ParameterError(f"k must be in [0, min(n, p) - 1] = [0, {min(n, p) - 1}], got {k}")
    if triples is None:
        triples = svd_design(X)
    kept = triples.truncate(k)
    if k == 0:
        y_tilde = y.copy()
        x_tilde = X.copy()
    else:
        u = kept.left
        y_tilde = y - u @ (u.T @ y)
        x_tilde = X - (u * kept.singular_values) @ kept.right.T
    gram = x_tilde.T @ x_tilde / n
    gram = 0.5 * (gram + gram.T)
    return FactorAdjusted(k=k, y_tilde=y_tilde, x_tilde=x_tilde, gram=gram, triples=kept)
