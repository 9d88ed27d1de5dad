"""Ranking evaluation: ROC curves, sure-screening metrics, the analytic
rate exponents for the blockwise design, and the per-signal noncentrality
oracle.

Rate exponents
--------------
For the blockwise-diagonal design with within-block correlation h and a
rare/weak signal (sparsity exponent vartheta, strength exponent r), each
method's minimum sure-screening model size grows like p**eta_star with
eta_star = 1 - min(vartheta, q_star) and

    q_star_lsr = (sqrt((1-h^2) r) - sqrt(1-vartheta))_+^2
    q_star_mr  = (sqrt(r) - sqrt(1-vartheta))_+^2                 vartheta > 1/2
                 min of the above and
                 ((1-|h|) sqrt(r) - sqrt(1-2 vartheta))_+^2       vartheta <= 1/2
    q_star_car = as mr with (1-|h|) sqrt(r) replaced by sqrt((1-h^2) r)

The cancellation terms apply for vartheta <= 1/2 (at 1/2 the sqrt(1-2
vartheta) argument is zero); for vartheta > 1/2 two-signal blocks are too
rare to matter. Note q_star genuinely jumps across vartheta = 1/2 when the
cancellation term binds there (large |h|); it is continuous in vartheta
everywhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .errors import CostError, NumericError, ParameterError
from .graph import anchored_connected_sets, build_graph

RATE_METHODS = ("car", "mr", "lsr")

_FPR_GRID = np.linspace(0.0, 1.0, 101)


class ScreeningMetrics(NamedTuple):
    """Per-repetition screening outcome for one method."""

    sp_indicator: int  # 1 iff every signal ranked within the retained set
    type2: int         # signals ranked outside the retained set
    ss_size: int       # largest rank over the signals


def roc_curve(scores: np.ndarray, support) -> np.ndarray:
    """ROC points from successively retaining more variables.

    One point per distinct score cutoff (tie groups retained atomically),
    with (0, 0) prepended; the final cutoff point is (1, 1). Returns an
    array of (fpr, tpr) rows.
    """
    scores = np.asarray(scores, dtype=float)
    p = scores.size
    mask = np.zeros(p, dtype=bool)
    mask[np.asarray(list(support), dtype=int)] = True
    n_signal = int(mask.sum())
    if n_signal == 0 or n_signal == p:
        raise ParameterError("support must be a nonempty proper subset of the variables")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    signal_sorted = mask[order]
    cum_tp = np.cumsum(signal_sorted)
    cum_fp = np.cumsum(~signal_sorted)
    ends = np.append(np.flatnonzero(np.diff(sorted_scores) != 0.0), p - 1)
    fpr = cum_fp[ends] / (p - n_signal)
    tpr = cum_tp[ends] / n_signal
    return np.vstack([[0.0, 0.0], np.column_stack([fpr, tpr])])


def average_roc(curves) -> np.ndarray:
    """Vertical average of ROC curves on the fixed 101-point FPR grid."""
    curves = list(curves)
    if not curves:
        raise ParameterError("need at least one curve to average")
    acc = np.zeros_like(_FPR_GRID)
    for curve in curves:
        curve = np.asarray(curve, dtype=float)
        fpr, tpr = curve[:, 0], curve[:, 1]
        keep = np.r_[fpr[1:] != fpr[:-1], True]  # last point of each vertical run
        acc += np.interp(_FPR_GRID, fpr[keep], tpr[keep])
    return np.column_stack([_FPR_GRID, acc / len(curves)])


def screening_metrics(scores: np.ndarray, support, retain: int) -> ScreeningMetrics:
    """Sure-screening indicator, type II count, and model size when
    retaining the top ``retain`` variables."""
    scores = np.asarray(scores, dtype=float)
    p = scores.size
    if not 1 <= retain <= p:
        raise ParameterError(f"retain must be in [1, p]={p}, got {retain}")
    sig = np.asarray(list(support), dtype=int)
    if sig.size == 0:
        raise ParameterError("support is empty")
    order = np.lexsort((np.arange(p), -scores))
    ranks = np.empty(p, dtype=int)
    ranks[order] = np.arange(1, p + 1)
    signal_ranks = ranks[sig]
    ss_size = int(signal_ranks.max())
    type2 = int((signal_ranks > retain).sum())
    return ScreeningMetrics(int(ss_size <= retain), type2, ss_size)


def screening_threshold(q: float, sigma: float, p: int) -> float:
    """Score threshold 2 q sigma^2 log(p) used by the analytic rates."""
    return 2.0 * q * sigma * sigma * math.log(p)


def _pos_sq(x: float) -> float:
    return max(x, 0.0) ** 2


@dataclass(frozen=True)
class RateOracle:
    """Closed-form exponents for one (vartheta, r, h) triple.

    ``q_star`` and ``eta_star`` are keyed by method ("car", "mr", "lsr");
    ``rho1``/``rho2`` evaluate the false-positive and false-negative rate
    exponents at an arbitrary threshold constant q.
    """

    vartheta: float
    r: float
    h: float
    q_star: dict
    eta_star: dict

    def rho1(self, method: str, q: float) -> float:
        th, r, h = self.vartheta, self.r, abs(self.h)
        if method == "lsr":
            return q
        if method in ("mr", "car"):
            return min(q, th + _pos_sq(math.sqrt(q) - h * math.sqrt(r)))
        raise ParameterError(f"unknown method {method!r}")

    def rho2(self, method: str, q: float) -> float:
        th, r, h = self.vartheta, self.r, abs(self.h)
        sq = math.sqrt(q)
        if method == "lsr":
            return th + _pos_sq(math.sqrt((1.0 - h * h) * r) - sq)
        if method == "mr":
            return min(th + _pos_sq(math.sqrt(r) - sq),
                       2.0 * th + _pos_sq((1.0 - h) * math.sqrt(r) - sq))
        if method == "car":
            return min(th + _pos_sq(math.sqrt(r) - sq),
                       2.0 * th + _pos_sq(math.sqrt((1.0 - h * h) * r) - sq))
        raise ParameterError(f"unknown method {method!r}")


def rate_oracle(vartheta: float, r: float, h: float) -> RateOracle:
    """Evaluate the closed-form q_star and eta_star for all three methods."""
    if not 0.0 < vartheta < 1.0:
        raise ParameterError(f"vartheta must be in (0, 1), got {vartheta}")
    if r <= 0.0:
        raise ParameterError(f"r must be positive, got {r}")
    if not -1.0 < h < 1.0:
        raise ParameterError(f"h must be in (-1, 1), got {h}")
    ah = abs(h)
    sqrt_r = math.sqrt(r)
    sqrt_block = math.sqrt((1.0 - h * h) * r)
    base = _pos_sq(sqrt_r - math.sqrt(1.0 - vartheta))
    q_lsr = _pos_sq(sqrt_block - math.sqrt(1.0 - vartheta))
    if vartheta > 0.5:
        q_mr = base
        q_car = base
    else:
        cancel = math.sqrt(1.0 - 2.0 * vartheta)
        q_mr = min(base, _pos_sq((1.0 - ah) * sqrt_r - cancel))
        q_car = min(base, _pos_sq(sqrt_block - cancel))
    q_star = {"car": q_car, "mr": q_mr, "lsr": q_lsr}
    eta_star = {k: 1.0 - min(vartheta, v) for k, v in q_star.items()}
    return RateOracle(vartheta=vartheta, r=r, h=h, q_star=q_star, eta_star=eta_star)


def rate_dominance_check(varthetas, rs, hs, tol: float = 1e-12) -> bool:
    """True iff eta_star_car <= min(eta_star_mr, eta_star_lsr) + tol on the
    whole grid."""
    for th in varthetas:
        for r in rs:
            for h in hs:
                eta = rate_oracle(th, r, h).eta_star
                if eta["car"] > min(eta["mr"], eta["lsr"]) + tol:
                    return False
    return True


@dataclass(frozen=True)
class OmegaOracle:
    """Per-signal noncentrality exponents computed from the sparse Gram
    component.

    ``component`` maps each signal to its component of the support graph,
    ``by_subset`` holds omega_{j|I} per enumerated neighborhood,
    ``omega_m`` the max over neighborhoods, ``omega_star`` the
    cancellation-free value on the full component.
    """

    delta_p: float
    m: int
    component: dict
    by_subset: dict
    omega_m: dict
    omega_star: dict


def omega_oracle(g0: np.ndarray, beta: np.ndarray, delta_p: float, m: int,
                 n: int, sigma: float) -> OmegaOracle:
    """Evaluate the noncentrality oracle on the support of beta.

    The support graph is the delta_p-threshold graph of g0 restricted to
    the signals; each signal's neighborhoods are the connected subsets of
    its component containing it, of size at most m.
    """
    g0 = np.asarray(g0, dtype=float)
    beta = np.asarray(beta, dtype=float)
    p = g0.shape[0]
    if beta.shape[0] != p:
        raise ParameterError(f"beta length {beta.shape[0]} != p = {p}")
    if sigma <= 0.0 or n < 1:
        raise ParameterError("need sigma > 0 and n >= 1")
    support = [int(j) for j in np.flatnonzero(beta)]
    graph0 = build_graph(g0, delta_p)
    in_support = set(support)
    nbrs = {j: set(graph0.neighbors[j]) & in_support for j in support}
    scale = n / (2.0 * sigma * sigma * math.log(p))

    component: dict = {}
    for j in support:
        if j in component:
            continue
        comp, stack = {j}, [j]
        while stack:
            v = stack.pop()
            for w in nbrs[v]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        comp_t = tuple(sorted(comp))
        for v in comp_t:
            component[v] = comp_t

    by_subset: dict = {}
    omega_m: dict = {}
    omega_star: dict = {}
    for j in support:
        comp = component[j]
        locals_ = {}
        for subset in anchored_connected_sets(nbrs, j, m):
            locals_[subset] = _omega_local(g0, beta, j, subset, comp, scale)
        by_subset[j] = locals_
        omega_m[j] = max(locals_.values())
        rest = tuple(v for v in comp if v != j)
        a0 = _schur_complement(g0, j, rest)
        omega_star[j] = scale * a0 * beta[j] ** 2
    return OmegaOracle(delta_p=delta_p, m=m, component=component,
                       by_subset=by_subset, omega_m=omega_m, omega_star=omega_star)


def _schur_complement(g0: np.ndarray, j: int, others) -> float:
    """g0[j,j] - g0[j,N] (g0[N,N])^{-1} g0[N,j].

    For a PSD g0 this is 1 / ((g0 restricted to {j} u N)^{-1})[j, j]; a
    value at numerical zero means the restricted principal submatrix is
    singular.
    """
    if not others:
        value = float(g0[j, j])
    else:
        ids = list(others)
        sub = g0[np.ix_(ids, ids)]
        col = g0[ids, j]
        try:
            solved = np.linalg.solve(sub, col)
        except np.linalg.LinAlgError:
            raise NumericError(f"singular principal submatrix on {tuple(ids)}") from None
        value = float(g0[j, j] - col @ solved)
    if not np.isfinite(value) or value <= 1e-12 * max(abs(g0[j, j]), 1.0):
        raise NumericError(
            f"singular principal submatrix on {tuple(sorted({j, *others}))}"
        )
    return value


def _omega_local(g0, beta, j, subset, comp, scale) -> float:
    others = [v for v in subset if v != j]
    outside = [v for v in comp if v not in subset]
    a0 = _schur_complement(g0, j, others)
    shift = 0.0
    if outside:
        cross = g0[j, outside]
        if others:
            sub = g0[np.ix_(others, others)]
            try:
                solved = np.linalg.solve(sub, g0[np.ix_(others, outside)])
            except np.linalg.LinAlgError:
                raise NumericError(f"singular principal submatrix on {tuple(others)}") from None
            cross = cross - g0[j, others] @ solved
        shift = float(cross @ beta[outside]) / a0
    return scale * a0 * (beta[j] + shift) ** 2


def nu_g_star(omega: np.ndarray, g: int) -> float:
    """Smallest eigenvalue over all g x g principal submatrices.

    Brute force over index combinations; guarded against combinatorial
    blow-up.
    """
    omega = np.asarray(omega, dtype=float)
    p = omega.shape[0]
    if not 1 <= g <= p:
        raise ParameterError(f"g must be in [1, p]={p}, got {g}")
    if g > 12:
        raise CostError(f"g={g} exceeds the combinatorial guard (12)")
    n_subsets = math.comb(p, g)
    if n_subsets > 500_000:
        raise CostError(f"{n_subsets} principal submatrices of size {g}; refusing")
    if g == 1:
        return float(np.diag(omega).min())
    best = math.inf
    for ids in combinations(range(p), g):
        sub = omega[np.ix_(ids, ids)]
        best = min(best, float(np.linalg.eigvalsh(sub)[0]))
    return best
