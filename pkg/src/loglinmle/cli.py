"""Command line front end.

Subcommands ``fit``, ``diagnose``, ``check`` and ``oracle``.  Results are
JSON documents; exit status is 0 on success, 1 on input or validation
errors and 2 when an iteration did not converge.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import design as _design
from .diagnostics import adjustment_factor, gof_report
from .errors import LogLinearError, NotConverged
from .fitter import FitConfig, SamplingScheme, fit, fit_affine
from .gis import GisConfig, write_trace_csv
from .oracles import affine_closed_form_mle, grid_search_mle, tree_model_mle

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2
SIGNIFICANT = 12


class InputError(Exception):
    pass


def _num(x):
    if isinstance(x, (float, np.floating)):
        return float("%.*g" % (SIGNIFICANT, x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in x]
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    return x


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise InputError("expected comma separated numbers, got %r" % text) from exc


def read_data_csv(path, allow_real: bool = False) -> np.ndarray:
    """Counts from a single-line or single-column CSV file."""
    tokens = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            tokens.extend(tok.strip() for tok in line.split(",") if tok.strip())
    if not tokens:
        raise InputError("%s: no data" % path)
    try:
        vals = [float(tok) for tok in tokens]
    except ValueError as exc:
        raise InputError("%s: data must be numeric" % path) from exc
    if not allow_real and any(not v.is_integer() for v in vals):
        raise InputError("%s: counts must be integers (use --allow-real)" % path)
    if any(v < 0 for v in vals):
        raise InputError("%s: counts must be non-negative" % path)
    return np.array(vals)


def _load_design(path):
    return _design.build_design(_design.read_matrix_csv(path))


def _config(args) -> FitConfig:
    return FitConfig(core=GisConfig(tol_core=args.tol_core, max_iters=args.max_iters),
                     tol_total=args.tol_total, max_adjust=args.max_adjust,
                     strict_paper=args.strict_paper)


def _run_fit(args, matrix_path, data_path):
    A = _load_design(matrix_path)
    y = read_data_csv(data_path, args.allow_real)
    cfg = _config(args)
    scheme = SamplingScheme(args.scheme)
    extra = {}
    affine = args.psi is not None or args.start is not None or args.kernel is not None
    if affine:
        D = (_design.as_kernel(_design.read_matrix_csv(args.kernel))
             if args.kernel else _design.kernel_basis(A))
        if args.kernel and not _design.check_kernel_pair(A, D):
            raise InputError("%s is not a kernel basis of the design" % args.kernel)
        psi = _floats(args.psi) if args.psi is not None else None
        start = _floats(args.start) if args.start is not None else None
        if psi is None and start is None:
            psi = [0.0] * D.num_rows
        result = fit_affine(A, y, scheme, cfg, psi=psi, start=start, kernel=D)
        extra = {"kernel": D.entries.tolist(),
                 "psi": D.log_odds(result.estimate).tolist()}
    else:
        result = fit(A, y, scheme, cfg)
    return A, y, cfg, result, extra


def _fit_document(A, cfg, result, extra):
    doc = {
        "scheme": result.scheme.value,
        "estimate": result.estimate,
        "gamma_hat": result.gamma_hat,
        "total": result.total,
        "adjust_steps": result.adjust_steps,
        "core_iterations": result.core_iterations,
        "converged": result.converged,
        "tol_core": cfg.core.tol_core,
        "tol_total": cfg.tol_total,
        "matrix_l1_norm": _design.l1_norm(A),
        "overall_effect": _design.has_overall_effect(A),
        "df": A.num_cells - A.num_rows,
    }
    doc.update(extra)
    return doc


def _emit(doc, output, timestamp=True):
    doc = _num(doc)
    if timestamp:
        doc["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    text = json.dumps(doc, indent=2) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _fit_like(args, matrix_path, data_path, output, diagnose):
    A, y, cfg, result, extra = _run_fit(args, matrix_path, data_path)
    doc = _fit_document(A, cfg, result, extra)
    if diagnose:
        gof = gof_report(result.estimate, y, A, result.scheme)
        doc.update(x2=gof.pearson_x2, g2=gof.deviance_g2, df=gof.df)
    if args.trace:
        write_trace_csv(args.trace, result.traces)
    _emit(doc, output)


def _batch(args, diagnose):
    jobs = []
    for line in Path(args.batch).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (2, 3):
            raise InputError("manifest lines are matrix,data[,output]: %r" % line)
        out = parts[2] if len(parts) == 3 else str(Path(parts[1]).with_suffix(".result.json"))
        jobs.append((parts[0], parts[1], out))

    def one(job):
        try:
            _fit_like(args, job[0], job[1], job[2], diagnose)
            return EXIT_OK
        except NotConverged as exc:
            print("error: %s: %s" % (job[1], exc), file=sys.stderr)
            return EXIT_NOT_CONVERGED
        except (LogLinearError, InputError, OSError, ValueError) as exc:
            print("error: %s: %s: %s" % (job[1], type(exc).__name__, exc), file=sys.stderr)
            return EXIT_INPUT

    with ThreadPoolExecutor() as pool:
        codes = list(pool.map(one, jobs))
    return max(codes, default=EXIT_OK)


def cmd_fit(args):
    if args.batch:
        return _batch(args, diagnose=False)
    _require(args, "matrix", "data")
    _fit_like(args, args.matrix, args.data, args.output, diagnose=False)
    return EXIT_OK


def cmd_diagnose(args):
    if args.batch:
        return _batch(args, diagnose=True)
    _require(args, "matrix", "data")
    _fit_like(args, args.matrix, args.data, args.output, diagnose=True)
    return EXIT_OK


def cmd_check(args):
    _require(args, "matrix")
    A = _load_design(args.matrix)
    D = _design.kernel_basis(A)
    doc = {
        "num_rows": A.num_rows,
        "num_cells": A.num_cells,
        "matrix_l1_norm": _design.l1_norm(A),
        "overall_effect": _design.has_overall_effect(A),
        "kernel_basis": D.entries.tolist(),
    }
    if args.kernel:
        user = _design.read_matrix_csv(args.kernel)
        doc["kernel_check"] = _design.check_kernel_pair(A, user)
    if args.kernel_out:
        _design.write_matrix_csv(args.kernel_out, D)
    _emit(doc, args.output, timestamp=False)
    return EXIT_OK


def cmd_oracle(args):
    _require(args, "data")
    y = read_data_csv(args.data, args.allow_real)
    doc = {"oracle": args.oracle}
    if args.oracle == "tree":
        res = tree_model_mle(y)
        doc.update(estimate=res.estimate, gamma=res.gamma, intermediates=res.intermediates)
        estimate = res.estimate
    elif args.oracle == "affine":
        res = affine_closed_form_mle(y)
        doc.update(estimate=res.estimate, gamma=res.gamma, intermediates=res.intermediates)
        estimate = res.estimate
    else:
        _require(args, "matrix")
        A = _load_design(args.matrix)
        estimate = grid_search_mle(A, y, args.scheme)
        doc.update(scheme=args.scheme, estimate=estimate)
        if args.scheme == "multinomial":
            doc["gamma"] = adjustment_factor(estimate, y / y.sum(), A, tol=1e-4)
    if args.compare:
        other = json.loads(Path(args.compare).read_text())
        fitted = np.asarray(other["estimate"], dtype=float)
        if fitted.shape != estimate.shape:
            raise InputError("compared estimate has %d cells, oracle has %d"
                             % (fitted.size, estimate.size))
        doc["max_abs_deviation"] = float(np.max(np.abs(fitted - estimate)))
    _emit(doc, args.output, timestamp=False)
    return EXIT_OK


def _require(args, *names):
    missing = ["--" + n for n in names if not getattr(args, n, None)]
    if missing:
        raise InputError("missing required option(s): %s" % ", ".join(missing))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loglinmle",
        description="MLE for general log-linear models via GIS(gamma).")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--matrix", help="design matrix CSV, one row per line")
    common.add_argument("--data", help="counts CSV, single line or single column")
    common.add_argument("--kernel", help="kernel basis CSV, same format as --matrix")
    common.add_argument("--scheme", choices=[s.value for s in SamplingScheme],
                        default="multinomial")
    common.add_argument("--output", help="write the JSON document here (default stdout)")
    common.add_argument("--allow-real", action="store_true",
                        help="accept non-integer data")

    fitting = argparse.ArgumentParser(add_help=False)
    fitting.add_argument("--psi", help="log odds ratios, comma separated")
    fitting.add_argument("--start", help="explicit positive start vector")
    fitting.add_argument("--tol-core", type=float, default=1e-10)
    fitting.add_argument("--tol-total", type=float, default=1e-6)
    fitting.add_argument("--max-iters", type=int, default=100_000)
    fitting.add_argument("--max-adjust", type=int, default=500)
    fitting.add_argument("--trace", help="write iter,residual,kl,bregman,total CSV")
    fitting.add_argument("--strict-paper", action="store_true",
                         help="restart every core run from the initial vector")
    fitting.add_argument("--batch", help="manifest of matrix,data[,output] lines")

    p = sub.add_parser("fit", parents=[common, fitting], help="fit the model")
    p.set_defaults(func=cmd_fit)
    p = sub.add_parser("diagnose", parents=[common, fitting],
                       help="fit, then report X^2, G^2 and df")
    p.set_defaults(func=cmd_diagnose)
    p = sub.add_parser("check", parents=[common],
                       help="report shape, L1 norm, overall effect and kernel basis")
    p.add_argument("--kernel-out", help="write the computed kernel basis CSV here")
    p.set_defaults(func=cmd_check)
    p = sub.add_parser("oracle", parents=[common], help="closed-form or grid-search MLE")
    p.add_argument("--oracle", choices=["tree", "affine", "grid"], default="grid")
    p.add_argument("--compare", help="fit result JSON to measure against")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotConverged as exc:
        print("error: NotConverged: %s" % exc, file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (LogLinearError, InputError, OSError, ValueError) as exc:
        print("error: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
