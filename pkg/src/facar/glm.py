"""Ranking for generalized linear models (canonical link), specialized to
logistic regression.

Factor adjustment carries over by treating the removed left singular
vectors as confounder columns: every local fit maximizes

    sum_i [ (b0 + U_i' alpha + X~_{i,V}' beta_V) y_i - b(...) ]

over (alpha, b0, beta_V) by damped Newton. A variable's local score is the
gain in maximized log-likelihood from adding it to a neighborhood, and the
final score is the max over the variable's graph neighborhoods.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit

from .errors import ParameterError, SeparationError
from .factor import adjust, select_k, svd_design
from .graph import build_graph, enumerate_neighborhoods
from .scores import RankingResult, rank_scores

_GRAD_TOL = 1e-8  # per-sample gradient tolerance; scaled by n
_STEP_TOL = 1e-12
_SEPARATION_NORM = 30.0
_MAX_ITER = 100


@dataclass(frozen=True)
class GlmFamily:
    """Exponential-family pieces for a canonical-link GLM: cumulant b and
    its first two derivatives (mean and variance functions)."""

    name: str
    cumulant: Callable[[np.ndarray], np.ndarray]
    mean: Callable[[np.ndarray], np.ndarray]
    variance: Callable[[np.ndarray], np.ndarray]


def _logistic_variance(theta):
    mu = expit(theta)
    return mu * (1.0 - mu)


LOGISTIC = GlmFamily(
    name="logistic",
    cumulant=lambda theta: np.logaddexp(0.0, theta),
    mean=expit,
    variance=_logistic_variance,
)

FAMILIES = {"logistic": LOGISTIC}


@dataclass(frozen=True)
class LocalMleResult:
    """Maximized local log-likelihood and its coefficients.

    ``alpha`` are the confounder coefficients, ``beta`` the coefficients of
    the fitted variable subset (in ascending index order).
    """

    loglik: float
    alpha: np.ndarray
    intercept: float
    beta: np.ndarray
    converged: bool
    iterations: int


def _check_binary(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ParameterError("logistic responses must be 0/1")
    return y


def _newton_fit(y: np.ndarray, design: np.ndarray, family: GlmFamily):
    """Damped Newton ascent of the GLM log-likelihood on an explicit design.

    Returns (coef, loglik, converged, iterations). Raises
    ``SeparationError`` when coefficients run away while the gradient is
    still large.
    """
    n, d = design.shape
    coef = np.zeros(d)
    theta = design @ coef
    loglik = float(y @ theta - family.cumulant(theta).sum())
    grad_tol = _GRAD_TOL * n
    converged = False
    iterations = 0
    for iterations in range(1, _MAX_ITER + 1):
        mu = family.mean(theta)
        grad = design.T @ (y - mu)
        if np.abs(grad).max() <= grad_tol:
            converged = True
            iterations -= 1
            break
        w = family.variance(theta)
        hess = design.T @ (design * w[:, None])
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        scale = 1.0
        while True:
            candidate = coef + scale * step
            theta_new = design @ candidate
            loglik_new = float(y @ theta_new - family.cumulant(theta_new).sum())
            if loglik_new >= loglik or scale * np.abs(step).max() <= _STEP_TOL:
                break
            scale *= 0.5
        if scale * np.abs(step).max() <= _STEP_TOL and loglik_new < loglik:
            break  # no ascent direction left
        coef = candidate
        theta = theta_new
        loglik = loglik_new
        if np.abs(coef).max() > _SEPARATION_NORM:
            mu = family.mean(theta)
            if np.abs(design.T @ (y - mu)).max() > grad_tol:
                raise SeparationError(
                    f"coefficients exceeded {_SEPARATION_NORM} with a non-vanishing gradient"
                )
    if not converged:
        mu = family.mean(theta)
        converged = bool(np.abs(design.T @ (y - mu)).max() <= grad_tol)
    return coef, loglik, converged, iterations


def local_mle(y: np.ndarray, x_tilde: np.ndarray, u_hat: np.ndarray | None,
              subset, family: GlmFamily = LOGISTIC) -> LocalMleResult:
    """Maximize the local log-likelihood over (alpha, intercept, beta_V).

    ``subset`` selects the fitted columns of ``x_tilde``; ``u_hat`` holds the
    confounder columns (may be None or have zero columns).
    """
    y = _check_binary(y) if family.name == "logistic" else np.asarray(y, dtype=float)
    x_tilde = np.asarray(x_tilde, dtype=float)
    n = x_tilde.shape[0]
    if y.shape[0] != n:
        raise ParameterError(f"y has length {y.shape[0]} but the design has {n} rows")
    ids = sorted(int(j) for j in subset)
    k = 0
    parts = []
    if u_hat is not None and u_hat.size:
        u_hat = np.asarray(u_hat, dtype=float)
        k = u_hat.shape[1]
        parts.append(u_hat)
    parts.append(np.ones((n, 1)))
    if ids:
        parts.append(x_tilde[:, ids])
    design = np.hstack(parts)
    coef, loglik, converged, iterations = _newton_fit(y, design, family)
    return LocalMleResult(
        loglik=loglik,
        alpha=coef[:k].copy(),
        intercept=float(coef[k]),
        beta=coef[k + 1 :].copy(),
        converged=converged,
        iterations=iterations,
    )


def score_local_glm(y: np.ndarray, x_tilde: np.ndarray, u_hat: np.ndarray | None,
                    subset, j: int, family: GlmFamily = LOGISTIC) -> float:
    """Log-likelihood gain from adding variable j to its neighborhood.

    Nonnegative up to solver tolerance; tiny negative values are clamped to
    zero.
    """
    ids = tuple(subset)
    if j not in ids:
        raise ParameterError(f"anchor {j} not in subset {ids}")
    full = local_mle(y, x_tilde, u_hat, ids, family)
    rest = local_mle(y, x_tilde, u_hat, tuple(v for v in ids if v != j), family)
    return max(full.loglik - rest.loglik, 0.0)


def _marginal_fits(y: np.ndarray, X: np.ndarray, family: GlmFamily):
    """Intercept-plus-one-column fits for every column at once.

    Damped Newton on p independent 2-parameter problems, vectorized across
    columns. Returns (coefs, logliks, separated, usable); constant columns
    are marked unusable.
    """
    n, p = X.shape
    usable = np.ptp(X, axis=0) > 0.0
    b0 = np.zeros(p)
    b1 = np.zeros(p)
    theta = np.zeros((n, p))
    loglik = np.full(p, -float(n * family.cumulant(np.zeros(1))[0]))
    active = usable.copy()
    separated = np.zeros(p, dtype=bool)
    grad_tol = _GRAD_TOL * n
    for _ in range(_MAX_ITER):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        cols = X[:, idx]
        resid = y[:, None] - family.mean(theta[:, idx])
        g0 = resid.sum(axis=0)
        g1 = np.einsum("ij,ij->j", cols, resid)
        grad_norm = np.maximum(np.abs(g0), np.abs(g1))
        done = grad_norm <= grad_tol
        # Separation: coefficients past the cap while the gradient persists.
        big = np.maximum(np.abs(b0[idx]), np.abs(b1[idx])) > _SEPARATION_NORM
        separated[idx[big & ~done]] = True
        done |= big
        w = family.variance(theta[:, idx])
        s0 = w.sum(axis=0)
        s1 = np.einsum("ij,ij->j", cols, w)
        s2 = np.einsum("ij,ij,ij->j", cols, cols, w)
        det = s0 * s2 - s1 * s1
        det = np.where(det <= 0.0, np.inf, det)
        step0 = np.where(done, 0.0, (s2 * g0 - s1 * g1) / det)
        step1 = np.where(done, 0.0, (s0 * g1 - s1 * g0) / det)
        scale = np.ones(idx.size)
        old = loglik[idx]
        for _ in range(40):
            cand0 = b0[idx] + scale * step0
            cand1 = b1[idx] + scale * step1
            theta_new = cand0[None, :] + cols * cand1[None, :]
            ll_new = np.einsum("ij,i->j", theta_new, y) - family.cumulant(theta_new).sum(axis=0)
            worse = ll_new < old
            if not worse.any():
                break
            scale = np.where(worse, 0.5 * scale, scale)
            if (scale * np.maximum(np.abs(step0), np.abs(step1)))[worse].max() <= _STEP_TOL:
                break
        stuck = ll_new < old  # no ascent found: keep the old point
        keep = ~stuck
        b0[idx[keep]] = cand0[keep]
        b1[idx[keep]] = cand1[keep]
        theta[:, idx[keep]] = theta_new[:, keep]
        loglik[idx[keep]] = ll_new[keep]
        tiny = scale * np.maximum(np.abs(step0), np.abs(step1)) <= _STEP_TOL
        active[idx] = ~(done | stuck | tiny)
    return np.stack([b0, b1], axis=1), loglik, separated, usable


def score_mr_glm(y: np.ndarray, X: np.ndarray, family: GlmFamily = LOGISTIC,
                 variant: str = "coef") -> RankingResult:
    """Marginal GLM ranking on the raw design.

    ``variant="coef"`` ranks by |marginal slope| (MR-1), ``variant="loglik"``
    by the maximized marginal log-likelihood (MR-2). Separated variables
    rank above every finite score; constant columns rank last.
    """
    if variant not in ("coef", "loglik"):
        raise ParameterError(f"unknown variant {variant!r}; expected 'coef' or 'loglik'")
    y = _check_binary(y) if family.name == "logistic" else np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    coefs, logliks, separated, usable = _marginal_fits(y, X, family)
    scores = np.abs(coefs[:, 1]) if variant == "coef" else logliks.copy()
    scores[separated] = np.inf
    scores[~usable] = -np.inf
    return rank_scores(scores, "mr1" if variant == "coef" else "mr2")


def score_facar_glm(y: np.ndarray, X: np.ndarray, k_rule: str = "threshold",
                    delta: float = 0.5, m: int = 2,
                    family: GlmFamily = LOGISTIC,
                    drop_degenerate: bool = False) -> RankingResult:
    """Full GLM pipeline: factor adjustment, threshold graph, local
    log-likelihood-ratio max.

    Neighborhood fits that hit separation are skipped; a variable with no
    usable neighborhood scores 0.
    """
    y = _check_binary(y) if family.name == "logistic" else np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    triples = svd_design(X)
    k = select_k(triples.singular_values, X.shape[0], X.shape[1], k_rule)
    fa = adjust(X, y, k, triples=triples)
    u_hat = fa.confounders
    g = build_graph(fa.gram, delta, drop_degenerate=drop_degenerate)
    hoods = enumerate_neighborhoods(g, m)

    cache: dict = {}
    if k == 0:
        _, singleton_ll, singleton_sep, singleton_ok = _marginal_fits(y, fa.x_tilde, family)
        for j in range(fa.p):
            key = (j,)
            if singleton_sep[j]:
                cache[key] = SeparationError
            elif singleton_ok[j]:
                cache[key] = float(singleton_ll[j])

    def fitted(ids: tuple) -> float:
        value = cache.get(ids)
        if value is SeparationError:
            raise SeparationError(f"subset {ids} separated")
        if value is None:
            try:
                value = local_mle(y, fa.x_tilde, u_hat, ids, family).loglik
            except SeparationError:
                cache[ids] = SeparationError
                raise
            cache[ids] = value
        return value

    scores = np.zeros(fa.p)
    for j in range(fa.p):
        best = None
        for subset in hoods.for_node(j):
            rest = tuple(v for v in subset if v != j)
            try:
                t = fitted(subset) - fitted(rest)
            except SeparationError:
                continue
            t = max(t, 0.0)
            if best is None or t > best:
                best = t
        scores[j] = 0.0 if best is None else best
    return rank_scores(scores, "facar", meta={"k": k, "delta": delta, "m": m})
