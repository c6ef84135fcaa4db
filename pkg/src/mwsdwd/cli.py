"""Command line interface.

Subcommands: fit, predict, cv, bootstrap, simulate. Exit codes: 0 success,
2 usage error, 3 input error (files, labels, configuration), 4 numerical
failure. Flags override config-file values, which override defaults.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace

from . import io
from .bootstrap import bootstrap_ci
from .errors import DataError, NumericalError
from .model import make_classifier, predict, score
from .objective import PENALTY_VARIANTS, PenaltySpec
from .simulate import run_study
from .solver import fit
from .tuning import select_lambdas

log = logging.getLogger("mwsdwd")


def _add_common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--out", required=True, help="output path")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--quiet", action="store_true", help="suppress progress messages")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: MWDWD_THREADS or available parallelism)")


def _add_fit_flags(p, lambdas=True):
    p.add_argument("--rank", type=int, help="CP rank of the coefficient tensor")
    if lambdas:
        p.add_argument("--lambda1", type=float, help="sparsity penalty strength")
        p.add_argument("--lambda2", type=float, help="ridge penalty strength")
    p.add_argument("--penalty", choices=PENALTY_VARIANTS, help="penalty variant")
    p.add_argument("--starts", type=int, help="number of random initializations")


def _parser():
    p = argparse.ArgumentParser(prog="mwsdwd",
                                description="Multiway sparse DWD classification toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    fp = sub.add_parser("fit", help="fit a model and write model JSON")
    fp.add_argument("--data", required=True)
    fp.add_argument("--labels", required=True)
    _add_fit_flags(fp)
    _add_common(fp)

    pp = sub.add_parser("predict", help="score new data with a saved model")
    pp.add_argument("--model", required=True)
    pp.add_argument("--data", required=True)
    _add_common(pp)

    cp = sub.add_parser("cv", help="cross-validated lambda selection")
    cp.add_argument("--data", required=True)
    cp.add_argument("--labels", required=True)
    cp.add_argument("--folds", type=int, help="number of folds")
    _add_fit_flags(cp, lambdas=False)
    _add_common(cp)

    bp = sub.add_parser("bootstrap", help="percentile CIs for factor weights")
    bp.add_argument("--data", required=True)
    bp.add_argument("--labels", required=True)
    _add_fit_flags(bp)
    _add_common(bp)

    sp = sub.add_parser("simulate", help="run a simulation study from a config")
    _add_common(sp)
    return p


def _override_fit(cfg, args, with_seed):
    """Apply fit-related flags on top of a FitConfig."""
    pen = cfg.penalty
    lam1 = getattr(args, "lambda1", None)
    lam2 = getattr(args, "lambda2", None)
    if args.penalty is not None or lam1 is not None or lam2 is not None:
        cfg = replace(cfg, penalty=PenaltySpec(
            args.penalty if args.penalty is not None else pen.variant,
            lam1 if lam1 is not None else pen.lambda1,
            lam2 if lam2 is not None else pen.lambda2,
        ))
    if args.rank is not None:
        cfg = replace(cfg, rank=args.rank)
    if args.starts is not None:
        cfg = replace(cfg, n_starts=args.starts)
    if with_seed and args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _cmd_fit(args):
    data = io.load_dataset(args.data, args.labels)
    doc = io.load_config(args.config) if args.config else {}
    cfg = _override_fit(io.fit_config_from(doc), args, with_seed=True)
    res = fit(data, cfg)
    clf = make_classifier(res, cfg.penalty, data.dims, n_train=data.n, seed=cfg.seed)
    io.save_model(args.out, clf, extra={
        "objective": res.objective_trace[-1],
        "effective_rank": res.effective_rank,
        "converged": res.converged,
        "n_outer": res.n_outer,
    })
    log.info("fit: objective %.6g, effective rank %d, %s after %d outer iterations",
             res.objective_trace[-1], res.effective_rank,
             "converged" if res.converged else "not converged", res.n_outer)
    return 0


def _cmd_predict(args):
    clf = io.load_model(args.model)
    x = io.load_tensor_file(args.data)
    io.write_scores_csv(args.out, score(clf, x), predict(clf, x))
    log.info("predict: scored %d subjects -> %s", x.shape[0], args.out)
    return 0


def _cmd_cv(args):
    data = io.load_dataset(args.data, args.labels)
    doc = io.load_config(args.config) if args.config else {}
    cfg = io.cv_config_from(doc)
    cfg = replace(cfg, fit=_override_fit(cfg.fit, args, with_seed=False))
    if args.folds is not None:
        cfg = replace(cfg, n_folds=args.folds)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    res = select_lambdas(data, cfg)
    io.write_cv_csv(args.out, res)
    print(f"chosen lambda1={res.chosen[0]!r} lambda2={res.chosen[1]!r}")
    return 0


def _cmd_bootstrap(args):
    data = io.load_dataset(args.data, args.labels)
    doc = io.load_config(args.config) if args.config else {}
    cfg = io.bootstrap_config_from(doc)
    cfg = replace(cfg, fit=_override_fit(cfg.fit, args, with_seed=False))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    res = bootstrap_ci(data, cfg, n_threads=args.threads)
    io.write_bootstrap_csv(args.out, res)
    log.info("bootstrap: %d resamples, %d non-converged -> %s",
             cfg.n_boot, res.n_failed, args.out)
    return 0


def _cmd_simulate(args):
    if not args.config:
        raise DataError("simulate requires --config")
    design, methods, n_reps = io.simulate_config_from(io.load_config(args.config))
    if args.seed is not None:
        design = replace(design, seed=args.seed)
    rows = run_study(design, methods, n_reps, n_threads=args.threads)
    io.write_study_csv(args.out, rows)
    log.info("simulate: %d replicates x %d methods -> %s", n_reps, len(methods), args.out)
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "predict": _cmd_predict,
    "cv": _cmd_cv,
    "bootstrap": _cmd_bootstrap,
    "simulate": _cmd_simulate,
}


def main(argv=None):
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except NumericalError as e:
        log.error("numerical failure: %s", e)
        return 4
    except (ValueError, OSError, json.JSONDecodeError) as e:
        log.error("input error: %s", e)
        return 3
