"""Monte Carlo experiment runner: generate data, rank with each requested
method, aggregate screening metrics and averaged ROC curves.

Config files are JSON with the shape::

    {
      "design":  {"kind": "tridiagonal", "params": {"rho": 0.5}},
      "dims":    {"n": 200, "p": 1000},
      "signal":  {"mode": "fixed", "params": {"s": 5, "eta": 3.0, "sigma": 1.0},
                  "fixed_across_reps": false},
      "model":   "linear",
      "methods": ["facar", "mr"],
      "reps":    200,
      "seed":    1,
      "retain":  null,
      "facar":   {"delta": 0.5, "m": 2, "k_rule": "fixed:0"}
    }

``signal.mode`` is "fixed" (first s coordinates N(0, eta^2)) or "rw"
(params vartheta, r, sigma, sign_scheme). ``retain`` defaults to
min(n, p). For a logistic model ``signal.params.intercept`` (default 0)
replaces sigma in response generation. Coefficients are re-drawn each repetition unless
``signal.fixed_across_reps`` is true.

Every repetition draws from streams derived from (seed, rep), so results
are independent of thread count and execution order.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import glm
from .designs import (
    CovSpec,
    RareWeakSpec,
    cov_sqrt,
    gen_response_linear,
    gen_response_logistic,
    materialize_cov,
    sample_beta_fixed,
    sample_beta_rw,
)
from .errors import ConfigError, FacarError
from .evaluation import average_roc, roc_curve, screening_metrics
from .factor import adjust, select_k, svd_design
from .graph import build_graph, enumerate_neighborhoods
from .scores import (
    score_facar,
    score_famr,
    score_holp,
    score_lsr_block,
    score_mr,
    score_rrcs,
)
from .seeding import spawn_rng

LINEAR_METHODS = ("facar", "mr", "famr", "holp", "rrcs", "lsr")
LOGISTIC_METHODS = ("facar", "mr1", "mr2")


@dataclass(frozen=True)
class FacarParams:
    delta: float = 0.5
    m: int = 2
    k_rule: str = "threshold"


@dataclass(frozen=True)
class ExperimentConfig:
    design: CovSpec
    n: int
    p: int
    signal_mode: str  # "fixed" | "rw"
    signal_params: dict
    model: str  # "linear" | "logistic"
    methods: tuple
    reps: int
    seed: int
    retain: int
    facar: FacarParams = field(default_factory=FacarParams)
    fixed_beta: bool = False

    def to_dict(self) -> dict:
        design = {"kind": self.design.kind, "params": {}}
        for key in ("rho", "rho1", "h"):
            value = getattr(self.design, key)
            if value is not None:
                design["params"][key] = value
        return {
            "design": design,
            "dims": {"n": self.n, "p": self.p},
            "signal": {
                "mode": self.signal_mode,
                "params": dict(self.signal_params),
                "fixed_across_reps": self.fixed_beta,
            },
            "model": self.model,
            "methods": list(self.methods),
            "reps": self.reps,
            "seed": self.seed,
            "retain": self.retain,
            "facar": {
                "delta": self.facar.delta,
                "m": self.facar.m,
                "k_rule": self.facar.k_rule,
            },
        }


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Aggregated metrics for one method."""

    method: str
    reps: int
    failures: int
    sp: float
    type2_mean: float
    size_median: float
    size_mean: float
    roc: np.ndarray  # 101 x 2 averaged curve


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    config: ExperimentConfig
    reports: dict
    per_rep: list  # (rep, method, sp, type2, ss_size, error) rows


def load_config(path) -> ExperimentConfig:
    """Parse and validate a JSON config, reporting every problem at once."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"not valid JSON: {exc}"]) from None
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ExperimentConfig:
    problems: list = []

    def need(mapping, key, kind, where, default=None, required=True):
        if key not in mapping:
            if required:
                problems.append(f"missing key {where}.{key}" if where else f"missing key {key}")
            return default
        value = mapping[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
            label = f"{where}.{key}" if where else key
            problems.append(f"{label} must be {kind.__name__}, got {type(value).__name__}")
            return default
        return value

    if not isinstance(raw, dict):
        raise ConfigError(["top level must be a JSON object"])

    design_raw = need(raw, "design", dict, "", default={})
    dims = need(raw, "dims", dict, "", default={})
    signal = need(raw, "signal", dict, "", default={})
    model = need(raw, "model", str, "", default="linear", required=False) or "linear"
    methods = need(raw, "methods", list, "", default=[])
    reps = need(raw, "reps", int, "", default=1)
    seed = need(raw, "seed", int, "", default=0)
    facar_raw = need(raw, "facar", dict, "", default={}, required=False) or {}
    retain = raw.get("retain")

    n = need(dims, "n", int, "dims", default=1) if isinstance(dims, dict) else 1
    p = need(dims, "p", int, "dims", default=2) if isinstance(dims, dict) else 2

    kind = need(design_raw, "kind", str, "design", default="identity") if isinstance(design_raw, dict) else "identity"
    params = design_raw.get("params", {}) if isinstance(design_raw, dict) else {}
    if not isinstance(params, dict):
        problems.append("design.params must be an object")
        params = {}
    unknown = set(params) - {"rho", "rho1", "h"}
    if unknown:
        problems.append(f"design.params has unknown keys {sorted(unknown)}")
    design = CovSpec(kind=kind, p=p,
                     rho=params.get("rho"), rho1=params.get("rho1"), h=params.get("h"))
    try:
        design.validate()
    except FacarError as exc:
        problems.append(str(exc))

    mode = need(signal, "mode", str, "signal", default="fixed") if isinstance(signal, dict) else "fixed"
    sparams = signal.get("params", {}) if isinstance(signal, dict) else {}
    if not isinstance(sparams, dict):
        problems.append("signal.params must be an object")
        sparams = {}
    fixed_beta = bool(signal.get("fixed_across_reps", False)) if isinstance(signal, dict) else False
    if mode == "fixed":
        s = need(sparams, "s", int, "signal.params", default=1)
        eta = need(sparams, "eta", float, "signal.params", default=1.0)
        if s is not None and not 1 <= s <= p:
            problems.append(f"signal.params.s must be in [1, p]={p}, got {s}")
        if eta is not None and eta <= 0:
            problems.append(f"signal.params.eta must be positive, got {eta}")
    elif mode == "rw":
        spec = RareWeakSpec(
            vartheta=need(sparams, "vartheta", float, "signal.params", default=0.5),
            r=need(sparams, "r", float, "signal.params", default=1.0),
            sigma=sparams.get("sigma", 1.0),
            sign_scheme=sparams.get("sign_scheme", "symmetric"),
        )
        try:
            spec.validate()
        except FacarError as exc:
            problems.append(str(exc))
    else:
        problems.append(f"signal.mode must be 'fixed' or 'rw', got {mode!r}")
    sigma = sparams.get("sigma", 1.0)
    if not isinstance(sigma, (int, float)) or isinstance(sigma, bool) or sigma < 0:
        problems.append(f"signal.params.sigma must be a nonnegative number, got {sigma!r}")

    if model not in ("linear", "logistic"):
        problems.append(f"model must be 'linear' or 'logistic', got {model!r}")
    allowed = LINEAR_METHODS if model == "linear" else LOGISTIC_METHODS
    if not methods:
        problems.append("methods must be a nonempty list")
    for name in methods:
        if name not in allowed:
            problems.append(f"unknown method {name!r} for model {model}; allowed: {allowed}")
    if "lsr" in methods and kind != "blockwise":
        problems.append("method 'lsr' requires the blockwise design")

    if reps is not None and reps < 1:
        problems.append(f"reps must be at least 1, got {reps}")
    if retain is None:
        retain = min(n, p)  # "retain n variables" when n < p; capped at p
    elif not isinstance(retain, int) or isinstance(retain, bool) or not 1 <= retain <= p:
        problems.append(f"retain must be an integer in [1, p]={p}, got {retain!r}")
        retain = n

    delta = facar_raw.get("delta", 0.5)
    m = facar_raw.get("m", 2)
    k_rule = facar_raw.get("k_rule", "threshold")
    if not isinstance(delta, (int, float)) or isinstance(delta, bool) or not 0 < delta < 1:
        problems.append(f"facar.delta must be in (0, 1), got {delta!r}")
        delta = 0.5
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        problems.append(f"facar.m must be a positive integer, got {m!r}")
        m = 2
    if not isinstance(k_rule, str) or (
        k_rule not in ("threshold", "elbow") and not k_rule.startswith("fixed:")
    ):
        problems.append(f"facar.k_rule must be threshold, elbow, or fixed:<K>, got {k_rule!r}")
        k_rule = "threshold"

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(
        design=design, n=n, p=p, signal_mode=mode, signal_params=dict(sparams),
        model=model, methods=tuple(methods), reps=reps, seed=seed, retain=retain,
        facar=FacarParams(delta=float(delta), m=m, k_rule=k_rule),
        fixed_beta=fixed_beta,
    )


def _draw_beta(config: ExperimentConfig, seed_path) -> np.ndarray:
    sp = config.signal_params
    if config.signal_mode == "fixed":
        return sample_beta_fixed(sp["s"], float(sp["eta"]), config.p, seed_path)
    spec = RareWeakSpec(vartheta=float(sp["vartheta"]), r=float(sp["r"]),
                        sigma=float(sp.get("sigma", 1.0)),
                        sign_scheme=sp.get("sign_scheme", "symmetric"))
    return sample_beta_rw(spec, config.p, config.n, seed_path)


def _rank_one_method(method: str, X, y, config: ExperimentConfig, shared: dict):
    fp = config.facar
    if config.model == "logistic":
        if method == "facar":
            return glm.score_facar_glm(y, X, k_rule=fp.k_rule, delta=fp.delta, m=fp.m)
        variant = "coef" if method == "mr1" else "loglik"
        return glm.score_mr_glm(y, X, variant=variant)
    if method in ("facar", "famr"):
        if "fa" not in shared:
            triples = svd_design(X)
            k = select_k(triples.singular_values, config.n, config.p, fp.k_rule)
            shared["fa"] = adjust(X, y, k, triples=triples)
        fa = shared["fa"]
        if method == "famr":
            return score_famr(fa)
        graph = build_graph(fa.gram, fp.delta)
        hoods = enumerate_neighborhoods(graph, fp.m)
        return score_facar(fa, hoods, meta={"k": fa.k})
    if method == "mr":
        return score_mr(X, y)
    if method == "holp":
        return score_holp(X, y)
    if method == "rrcs":
        return score_rrcs(X, y)
    if method == "lsr":
        return score_lsr_block(X, y, config.design.h)
    raise ConfigError([f"unknown method {method!r}"])


def _run_rep(rep: int, config: ExperimentConfig, root: np.ndarray,
             fixed_beta: np.ndarray | None):
    """One repetition: returns {method: (metrics or None, curve or None, error)}."""
    z = spawn_rng(config.seed, rep, 0).standard_normal((config.n, config.p))
    X = z @ root
    if fixed_beta is None:
        beta = _draw_beta(config, spawn_rng(config.seed, rep, 1))
    else:
        beta = fixed_beta
    sp = config.signal_params
    if config.model == "logistic":
        y = gen_response_logistic(X, beta, float(sp.get("intercept", 0.0)),
                                  spawn_rng(config.seed, rep, 2))
    else:
        y = gen_response_linear(X, beta, float(sp.get("sigma", 1.0)),
                                spawn_rng(config.seed, rep, 2))
    support = np.flatnonzero(beta)
    out = {}
    shared: dict = {}
    for method in config.methods:
        if support.size == 0 or support.size == config.p:
            out[method] = (None, None, "degenerate support (all-zero or all-nonzero beta)")
            continue
        try:
            result = _rank_one_method(method, X, y, config, shared)
            metrics = screening_metrics(result.scores, support, config.retain)
            curve = roc_curve(result.scores, support)
            out[method] = (metrics, curve, "")
        except FacarError as exc:
            out[method] = (None, None, f"{type(exc).__name__}: {exc}")
    return out


def run_experiment(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Run all repetitions and aggregate per-method reports.

    A repetition that fails for one method still contributes the others;
    failures are counted per method and excluded from the aggregates.
    """
    sigma_mat = materialize_cov(config.design)
    root = cov_sqrt(sigma_mat)
    fixed_beta = _draw_beta(config, spawn_rng(config.seed, 0, 1)) if config.fixed_beta else None

    def job(rep: int):
        return _run_rep(rep, config, root, fixed_beta)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rep_results = list(pool.map(job, range(config.reps)))
    else:
        rep_results = [job(rep) for rep in range(config.reps)]

    reports = {}
    per_rep = []
    for method in config.methods:
        metrics_list = []
        curves = []
        failures = 0
        for rep, result in enumerate(rep_results):
            metrics, curve, error = result[method]
            if metrics is None:
                failures += 1
                per_rep.append((rep, method, "", "", "", error))
            else:
                metrics_list.append(metrics)
                curves.append(curve)
                per_rep.append((rep, method, metrics.sp_indicator, metrics.type2,
                                metrics.ss_size, ""))
        if metrics_list:
            sp = float(np.mean([m.sp_indicator for m in metrics_list]))
            type2_mean = float(np.mean([m.type2 for m in metrics_list]))
            sizes = np.array([m.ss_size for m in metrics_list], dtype=float)
            roc = average_roc(curves)
            reports[method] = EvalReport(
                method=method, reps=len(metrics_list), failures=failures, sp=sp,
                type2_mean=type2_mean, size_median=float(np.median(sizes)),
                size_mean=float(sizes.mean()), roc=roc,
            )
        else:
            reports[method] = EvalReport(
                method=method, reps=0, failures=failures, sp=float("nan"),
                type2_mean=float("nan"), size_median=float("nan"),
                size_mean=float("nan"), roc=average_roc([np.array([[0.0, 0.0], [1.0, 1.0]])]),
            )
    per_rep.sort(key=lambda row: (row[0], config.methods.index(row[1])))
    return ExperimentResult(config=config, reports=reports, per_rep=per_rep)


def _fmt(value) -> str:
    """Shortest round-trip decimal for floats; plain str otherwise."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_outputs(result: ExperimentResult, outdir) -> None:
    """Write roc.csv, metrics.csv, per_rep.csv, and config_resolved.json."""
    outdir = _ensure_dir(outdir)
    with open(outdir / "roc.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["fpr", "tpr", "method"])
        for method in result.config.methods:
            for fpr, tpr in result.reports[method].roc:
                writer.writerow([_fmt(float(fpr)), _fmt(float(tpr)), method])
    with open(outdir / "metrics.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "sp", "type2_mean", "size_median", "size_mean"])
        for method in result.config.methods:
            report = result.reports[method]
            writer.writerow([method, _fmt(report.sp), _fmt(report.type2_mean),
                             _fmt(report.size_median), _fmt(report.size_mean)])
    with open(outdir / "per_rep.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rep", "method", "sp", "type2", "ss_size", "error"])
        for row in result.per_rep:
            writer.writerow(row)
    with open(outdir / "config_resolved.json", "w", encoding="utf-8") as fh:
        json.dump(result.config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _ensure_dir(outdir) -> Path:
    path = Path(outdir)
    path.mkdir(parents=True, exist_ok=True)
    return path
