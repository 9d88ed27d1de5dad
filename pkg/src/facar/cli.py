"""Command-line front end.

Subcommands: rank, glm-rank, simulate, oracle-exponents, check-bounds.
Exit codes: 0 success, 1 assertion/experiment failure, 2 usage/config
error. Every subcommand honors --seed where randomness is involved and
--threads never changes outputs, only wall time.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import numpy as np

from . import glm
from .designs import load_design_csv
from .errors import ConfigError, FacarError, FormatError, ParameterError
from .evaluation import rate_oracle
from .experiments import load_config, run_experiment, write_outputs
from .factor import adjust, select_k, svd_design
from .graph import build_graph, enumerate_neighborhoods
from .perturbation import check_lemma_eigvec1, check_thm_eigen, make_sparse_factor_instance
from .seeding import spawn_rng
from .scores import (
    score_facar,
    score_famr,
    score_holp,
    score_lsr_block,
    score_mr,
    score_rrcs,
)

_USAGE_ERRORS = (ConfigError, FormatError, ParameterError, FileNotFoundError)


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("FACAR_THREADS", "1")))
    except ValueError:
        return 1


def _add_facar_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k-rule", default="threshold",
                        help="factor count rule: threshold, elbow, or fixed:<K>")
    parser.add_argument("--delta", type=float, default=0.5,
                        help="graph threshold in (0, 1)")
    parser.add_argument("--m", type=int, default=2,
                        help="maximum neighborhood size")
    parser.add_argument("--drop-degenerate", action="store_true",
                        help="score zero-variance variables 0 instead of erroring")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="facar",
                                     description="Factor-adjusted covariate-assisted variable ranking")
    sub = parser.add_subparsers(dest="command", required=True)

    rank = sub.add_parser("rank", help="rank variables of a linear-model dataset")
    rank.add_argument("design", help="design matrix CSV")
    rank.add_argument("--response", required=True, help="response CSV (one value per line)")
    rank.add_argument("--method", action="append", default=None,
                      choices=["facar", "mr", "famr", "holp", "rrcs", "lsr"],
                      help="ranking method; repeatable (default: facar)")
    rank.add_argument("--ridge", type=float, default=0.0, help="ridge for holp")
    rank.add_argument("--lsr-h", type=float, default=0.0,
                      help="block correlation used by the lsr score scale")
    rank.add_argument("--out", default="scores.csv", help="output CSV path")
    _add_facar_flags(rank)

    grank = sub.add_parser("glm-rank", help="rank variables of a binary-response dataset")
    grank.add_argument("design", help="design matrix CSV")
    grank.add_argument("--response", required=True, help="0/1 response CSV")
    grank.add_argument("--family", default="logistic", choices=sorted(glm.FAMILIES))
    grank.add_argument("--method", action="append", default=None,
                       choices=["facar", "mr1", "mr2"],
                       help="ranking method; repeatable (default: facar)")
    grank.add_argument("--out", default="scores.csv", help="output CSV path")
    _add_facar_flags(grank)

    sim = sub.add_parser("simulate", help="run a Monte Carlo experiment from a config file")
    sim.add_argument("config", help="JSON experiment config")
    sim.add_argument("--out", default=".", help="output directory")
    sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    sim.add_argument("--threads", type=int, default=_default_threads(),
                     help="worker threads (default: FACAR_THREADS or 1)")

    oracle = sub.add_parser("oracle-exponents",
                            help="closed-form rate exponents for (vartheta, r, h) triples")
    oracle.add_argument("triples", nargs="+",
                        help="comma-separated vartheta,r,h triples, e.g. 0.8,1.5,0.4")
    oracle.add_argument("--out", default="exponents.csv", help="output CSV path")

    bounds = sub.add_parser("check-bounds",
                            help="empirically validate the eigenvector perturbation bounds")
    bounds.add_argument("--which", required=True, choices=["lemma2", "theorem2"])
    bounds.add_argument("--seeds", type=int, default=100, help="instances per dimension")
    bounds.add_argument("--p-list", type=int, nargs="+", default=[100, 200],
                        help="matrix dimensions to sweep")
    bounds.add_argument("--k", type=int, default=2, help="factor count (theorem2 only)")
    bounds.add_argument("--d", type=int, default=5, help="sparse-part nonzeros per row")
    bounds.add_argument("--out", default="bounds.csv", help="output CSV path")
    return parser


def _load_xy(design_path: str, response_path: str):
    data = load_design_csv(design_path, response_path)
    return data.X, data.y


def _cmd_rank(args) -> int:
    X, y = _load_xy(args.design, args.response)
    methods = args.method or ["facar"]
    results = {}
    shared_fa = None
    for method in methods:
        if method in ("facar", "famr"):
            if shared_fa is None:
                triples = svd_design(X)
                k = select_k(triples.singular_values, X.shape[0], X.shape[1], args.k_rule)
                shared_fa = adjust(X, y, k, triples=triples)
            if method == "famr":
                results[method] = score_famr(shared_fa, drop_degenerate=args.drop_degenerate)
            else:
                graph = build_graph(shared_fa.gram, args.delta,
                                    drop_degenerate=args.drop_degenerate)
                hoods = enumerate_neighborhoods(graph, args.m)
                results[method] = score_facar(shared_fa, hoods)
        elif method == "mr":
            results[method] = score_mr(X, y, drop_degenerate=args.drop_degenerate)
        elif method == "holp":
            results[method] = score_holp(X, y, ridge=args.ridge)
        elif method == "rrcs":
            results[method] = score_rrcs(X, y)
        elif method == "lsr":
            results[method] = score_lsr_block(X, y, args.lsr_h)
    _write_scores(results, methods, X.shape[1], args.out)
    return 0


def _cmd_glm_rank(args) -> int:
    X, y = _load_xy(args.design, args.response)
    family = glm.FAMILIES[args.family]
    methods = args.method or ["facar"]
    results = {}
    for method in methods:
        if method == "facar":
            results[method] = glm.score_facar_glm(
                y, X, k_rule=args.k_rule, delta=args.delta, m=args.m,
                family=family, drop_degenerate=args.drop_degenerate)
        else:
            variant = "coef" if method == "mr1" else "loglik"
            results[method] = glm.score_mr_glm(y, X, family=family, variant=variant)
    _write_scores(results, methods, X.shape[1], args.out)
    return 0


def _write_scores(results: dict, methods, p: int, path) -> None:
    """Wide CSV: variable plus <method>_score/<method>_rank per method."""
    header = ["variable"]
    for method in methods:
        header += [f"{method}_score", f"{method}_rank"]
    ranks = {method: results[method].ranks() for method in methods}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for j in range(p):
            row = [j + 1]
            for method in methods:
                row.append(format(float(results[method].scores[j]), ".17g"))
                row.append(int(ranks[method][j]))
            writer.writerow(row)


def _cmd_simulate(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        from dataclasses import replace

        config = replace(config, seed=args.seed)
    result = run_experiment(config, threads=max(1, args.threads))
    write_outputs(result, args.out)
    failed = {m: r.failures for m, r in result.reports.items() if r.failures}
    if failed:
        total = sum(failed.values())
        print(f"completed with {total} failed repetition-method pairs: {failed}",
              file=sys.stderr)
        return 1
    return 0


def _cmd_oracle(args) -> int:
    rows = []
    for text in args.triples:
        pieces = text.split(",")
        if len(pieces) != 3:
            raise ParameterError(f"expected vartheta,r,h, got {text!r}")
        try:
            vartheta, r, h = (float(x) for x in pieces)
        except ValueError:
            raise ParameterError(f"non-numeric triple {text!r}") from None
        oracle = rate_oracle(vartheta, r, h)
        for method in ("car", "mr", "lsr"):
            rows.append((vartheta, r, h, method,
                         oracle.q_star[method], oracle.eta_star[method]))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["vartheta", "r", "h", "method", "q_star", "eta_star"])
        for row in rows:
            writer.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    for vartheta, r, h, method, q, eta in rows:
        print(f"vartheta={vartheta} r={r} h={h} {method}: q*={q:.6f} eta*={eta:.6f}")
    return 0


_THEOREM2_CEILING = 50.0


def _cmd_check_bounds(args) -> int:
    rows = []
    violated = False
    for p in args.p_list:
        for seed in range(args.seeds):
            if args.which == "lemma2":
                inst = make_sparse_factor_instance(p, 1, [3.0 * p], args.d,
                                                   spawn_rng(seed, p), g0_inf_norm=p / 2.0)
                report = check_lemma_eigvec1(inst.lambdas[0], inst.v[:, 0], inst.g0)
                rows.append((seed, p, 1, report))
                if report.condition_met and report.ratio > 1.0:
                    violated = True
            else:
                lambdas = np.full(args.k, float(p))
                inst = make_sparse_factor_instance(p, args.k, lambdas, args.d,
                                                   spawn_rng(seed, p), g0_inf_norm=1.0)
                proj, resid = check_thm_eigen(inst.lambdas, inst.v, inst.g0)
                rows.append((seed, p, args.k, proj))
                rows.append((seed, p, args.k, resid))
                for report in (proj, resid):
                    if report.condition_met and report.ratio > _THEOREM2_CEILING:
                        violated = True
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["seed", "p", "K", "lhs", "rhs", "ratio", "condition_met"])
        for seed, p, k, report in rows:
            writer.writerow([seed, p, k, repr(report.lhs), repr(report.rhs),
                             repr(report.ratio), report.condition_met])
    return 1 if violated else 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "rank": _cmd_rank,
        "glm-rank": _cmd_glm_rank,
        "simulate": _cmd_simulate,
        "oracle-exponents": _cmd_oracle,
        "check-bounds": _cmd_check_bounds,
    }
    try:
        return handlers[args.command](args)
    except _USAGE_ERRORS as exc:
        if isinstance(exc, ConfigError):
            for problem in exc.problems:
                print(f"config error: {problem}", file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 2
    except FacarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
