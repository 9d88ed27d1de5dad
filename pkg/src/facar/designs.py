"""Synthetic design matrices, sparse coefficient vectors, and responses.

Covariance recipes
------------------
``materialize_cov`` builds one of six unit-diagonal covariance matrices:

- ``identity``
- ``tridiagonal(rho)``      : 1 on the diagonal, rho at |i-j| = 1
- ``autoregressive(rho)``   : rho ** |i-j|
- ``equal_correlation(rho)``: rho everywhere off the diagonal
- ``two_factor(rho, rho1)`` : (rho/2) a1 a1' + (rho/2) a2 a2' + (1-rho) AR(rho1),
  with a1 the all-ones vector and a2 the alternating +1/-1 vector
- ``blockwise(h)``          : 2x2 blocks [[1, h], [h, 1]] down the diagonal

Rows of the design are sampled i.i.d. N(0, Sigma) through the symmetric
square root of Sigma (eigendecomposition; eigenvalues in [-1e-10, 0] are
clamped to zero, anything more negative is rejected).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, NumericError, ParameterError
from .seeding import spawn_rng

COV_KINDS = (
    "identity",
    "tridiagonal",
    "autoregressive",
    "equal_correlation",
    "two_factor",
    "blockwise",
)

_EIG_CLAMP = 1e-10


@dataclass(frozen=True)
class CovSpec:
    """Parameters of one covariance recipe.

    Only the parameters used by ``kind`` need to be set: ``rho`` for the
    correlated kinds, ``rho1`` for the autoregressive part of ``two_factor``,
    ``h`` for ``blockwise``.
    """

    kind: str
    p: int
    rho: float | None = None
    rho1: float | None = None
    h: float | None = None

    def validate(self) -> None:
        if self.kind not in COV_KINDS:
            raise ParameterError(f"unknown covariance kind {self.kind!r}")
        if self.p < 1:
            raise ParameterError(f"p must be positive, got {self.p}")
        if self.kind in ("tridiagonal", "autoregressive"):
            if self.rho is None or not -1.0 < self.rho < 1.0:
                raise ParameterError(f"{self.kind} needs rho in (-1, 1), got {self.rho}")
        elif self.kind in ("equal_correlation", "two_factor"):
            if self.rho is None or not 0.0 < self.rho < 1.0:
                raise ParameterError(f"{self.kind} needs rho in (0, 1), got {self.rho}")
        if self.kind == "two_factor":
            if self.rho1 is None or not -1.0 < self.rho1 < 1.0:
                raise ParameterError(f"two_factor needs rho1 in (-1, 1), got {self.rho1}")
        if self.kind == "blockwise":
            if self.h is None or not -1.0 < self.h < 1.0:
                raise ParameterError(f"blockwise needs h in (-1, 1), got {self.h}")
            if self.p % 2 != 0:
                raise ParameterError(f"blockwise needs an even p, got {self.p}")


@dataclass(frozen=True)
class RareWeakSpec:
    """Rare/weak coefficient model: a coordinate is nonzero with probability
    p**-vartheta, and nonzero coordinates have magnitude
    sigma * sqrt(2 * r * log(p) / n)."""

    vartheta: float
    r: float
    sigma: float = 1.0
    sign_scheme: str = "symmetric"  # or "positive"

    def validate(self) -> None:
        if not 0.0 < self.vartheta < 1.0:
            raise ParameterError(f"vartheta must be in (0, 1), got {self.vartheta}")
        if self.r <= 0.0:
            raise ParameterError(f"r must be positive, got {self.r}")
        if self.sigma <= 0.0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if self.sign_scheme not in ("symmetric", "positive"):
            raise ParameterError(f"unknown sign scheme {self.sign_scheme!r}")

    def epsilon(self, p: int) -> float:
        """Nonzero probability p**-vartheta."""
        return float(p) ** -self.vartheta

    def tau(self, p: int, n: int) -> float:
        """Nonzero magnitude sigma * sqrt(2 r log(p) / n)."""
        return self.sigma * np.sqrt(2.0 * self.r * np.log(p) / n)


@dataclass(frozen=True)
class DesignInstance:
    """One dataset: design X, response y, true coefficients, and noise level.

    ``beta`` (and hence ``support``) is None for ingested data where the
    truth is unknown; ``y`` is None when only a design was loaded.
    """

    X: np.ndarray
    y: np.ndarray | None = None
    beta: np.ndarray | None = None
    sigma: float | None = None
    support: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.y is not None and self.y.shape[0] != self.X.shape[0]:
            raise ParameterError(
                f"y has length {self.y.shape[0]} but X has {self.X.shape[0]} rows"
            )
        if self.beta is not None and self.beta.shape[0] != self.X.shape[1]:
            raise ParameterError(
                f"beta has length {self.beta.shape[0]} but X has {self.X.shape[1]} columns"
            )
        support = None if self.beta is None else np.flatnonzero(self.beta)
        object.__setattr__(self, "support", support)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def materialize_cov(spec: CovSpec) -> np.ndarray:
    """Build the covariance matrix described by ``spec``.

    The result is exactly symmetric (bitwise) and has unit diagonal.
    """
    spec.validate()
    p = spec.p
    if spec.kind == "identity":
        return np.eye(p)
    if spec.kind == "tridiagonal":
        sigma = np.eye(p)
        off = np.full(p - 1, spec.rho)
        sigma[np.arange(p - 1), np.arange(1, p)] = off
        sigma[np.arange(1, p), np.arange(p - 1)] = off
        return sigma
    if spec.kind == "autoregressive":
        return _ar_cov(p, spec.rho)
    if spec.kind == "equal_correlation":
        sigma = np.full((p, p), spec.rho)
        np.fill_diagonal(sigma, 1.0)
        return sigma
    if spec.kind == "two_factor":
        a1 = np.ones(p)
        a2 = np.where(np.arange(p) % 2 == 0, 1.0, -1.0)
        half = spec.rho / 2.0
        return half * np.outer(a1, a1) + half * np.outer(a2, a2) + (1.0 - spec.rho) * _ar_cov(p, spec.rho1)
    # blockwise
    sigma = np.eye(p)
    idx = np.arange(0, p, 2)
    sigma[idx, idx + 1] = spec.h
    sigma[idx + 1, idx] = spec.h
    return sigma


def _ar_cov(p: int, rho: float) -> np.ndarray:
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def cov_sqrt(sigma_mat: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root of a covariance matrix.

    Eigenvalues below -1e-10 are rejected; values in [-1e-10, 0] are treated
    as exact zeros.
    """
    sigma_mat = np.asarray(sigma_mat, dtype=float)
    if sigma_mat.ndim != 2 or sigma_mat.shape[0] != sigma_mat.shape[1]:
        raise ParameterError(f"covariance must be square, got shape {sigma_mat.shape}")
    w, v = np.linalg.eigh(0.5 * (sigma_mat + sigma_mat.T))
    if w[0] < -_EIG_CLAMP:
        raise NumericError(f"covariance is not PSD: smallest eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


def sample_design(sigma_mat: np.ndarray, n: int, seed) -> np.ndarray:
    """Draw n i.i.d. N(0, Sigma) rows; deterministic given the seed."""
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    root = cov_sqrt(sigma_mat)
    rng = spawn_rng(seed)
    z = rng.standard_normal(size=(n, root.shape[0]))
    return z @ root


def sample_beta_rw(spec: RareWeakSpec, p: int, n: int, seed) -> np.ndarray:
    """Draw a rare/weak coefficient vector of length p."""
    spec.validate()
    if p < 2:
        raise ParameterError(f"p must be at least 2, got {p}")
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    rng = spawn_rng(seed)
    eps = spec.epsilon(p)
    tau = spec.tau(p, n)
    nonzero = rng.random(p) < eps
    if spec.sign_scheme == "symmetric":
        signs = np.where(rng.random(p) < 0.5, 1.0, -1.0)
    else:
        signs = np.ones(p)
    return np.where(nonzero, signs * tau, 0.0)


def sample_beta_fixed(s: int, eta: float, p: int, seed) -> np.ndarray:
    """First s coordinates i.i.d. N(0, eta^2), the rest exactly zero."""
    if not 1 <= s <= p:
        raise ParameterError(f"s must be in [1, p]={p}, got {s}")
    if eta <= 0.0:
        raise ParameterError(f"eta must be positive, got {eta}")
    rng = spawn_rng(seed)
    beta = np.zeros(p)
    beta[:s] = eta * rng.standard_normal(s)
    return beta


def gen_response_linear(X: np.ndarray, beta: np.ndarray, sigma: float, seed) -> np.ndarray:
    """y = X beta + sigma * N(0, I); sigma = 0 gives the exact mean."""
    X = np.asarray(X, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if beta.shape[0] != X.shape[1]:
        raise ParameterError(f"beta length {beta.shape[0]} != p = {X.shape[1]}")
    if sigma < 0.0:
        raise ParameterError(f"sigma must be nonnegative, got {sigma}")
    mean = X @ beta
    if sigma == 0.0:
        return mean
    rng = spawn_rng(seed)
    return mean + sigma * rng.standard_normal(X.shape[0])


def gen_response_logistic(X: np.ndarray, beta: np.ndarray, intercept: float, seed) -> np.ndarray:
    """Binary y_i ~ Bernoulli(expit(intercept + X_i' beta)), independently."""
    X = np.asarray(X, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if beta.shape[0] != X.shape[1]:
        raise ParameterError(f"beta length {beta.shape[0]} != p = {X.shape[1]}")
    eta = intercept + X @ beta
    prob = 1.0 / (1.0 + np.exp(-eta))
    rng = spawn_rng(seed)
    return (rng.random(X.shape[0]) < prob).astype(float)


def load_design_csv(path, response_path=None) -> DesignInstance:
    """Parse a numeric CSV design (and optional one-value-per-line response).

    A header row is auto-detected: if any cell of the first row fails to
    parse as a number, the row is treated as a header. Ragged rows and
    non-numeric cells raise ``FormatError`` with their location.
    """
    rows = _read_csv_rows(path)
    if not rows:
        raise FormatError(f"{path}: file is empty")
    start = 0
    first, first_lineno = rows[0]
    if any(not _is_number(cell) for cell in first):
        start = 1
        if len(rows) == 1:
            raise FormatError(f"{path}: no data rows after header")
    width = len(rows[start][0])
    data = np.empty((len(rows) - start, width))
    for out_i, (cells, lineno) in enumerate(rows[start:]):
        if len(cells) != width:
            raise FormatError(
                f"{path}: row {lineno} has {len(cells)} fields, expected {width}"
            )
        for j, cell in enumerate(cells):
            try:
                data[out_i, j] = float(cell)
            except ValueError:
                raise FormatError(
                    f"{path}: non-numeric value {cell!r} at row {lineno}, column {j + 1}"
                ) from None
    y = None
    if response_path is not None:
        y = _read_response(response_path)
        if y.shape[0] != data.shape[0]:
            raise FormatError(
                f"{response_path}: {y.shape[0]} responses for {data.shape[0]} design rows"
            )
    return DesignInstance(X=data, y=y)


def _read_csv_rows(path):
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, cells in enumerate(csv.reader(fh), start=1):
            if not cells or (len(cells) == 1 and cells[0].strip() == ""):
                continue  # blank line
            rows.append(([c.strip() for c in cells], lineno))
    return rows


def _read_response(path) -> np.ndarray:
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if lineno == 1 and not _is_number(text):
                continue  # header line
            try:
                values.append(float(text))
            except ValueError:
                raise FormatError(f"{path}: non-numeric value {text!r} at line {lineno}") from None
    if not values:
        raise FormatError(f"{path}: no response values found")
    return np.asarray(values)


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True
