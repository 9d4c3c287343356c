"""Command-line front end.

Subcommands: ``solve`` (optimality solves of finite models),
``ez-stability`` (recursive-utility well-posedness diagnostics),
``verify-conjugacy`` (sampled operator-conjugacy checks), and
``rbc-bench`` (the grid-accuracy benchmark).  Outputs are JSON or CSV
with every float printed to 17 significant digits, so repeated runs with
identical inputs are byte-identical.

Exit codes: 0 success, 1 verification failure, 2 validation error,
3 non-convergence, 4 divergence / ill-posedness.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Optional

import numpy as np

from . import adp, models, rbc
from .errors import (
    AdpError,
    DivergenceError,
    DomainViolationError,
    ModelValidationError,
    NonConvergenceError,
)
from .transforms import MonotoneBijection, verify_conjugacy

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_VALIDATION = 2
EXIT_NONCONVERGENCE = 3
EXIT_ILL_POSED = 4


def _format_value(obj) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {_format_value(v)}"
                          for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _format_value(obj.tolist())
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), ".17g")
    if obj is None:
        return "null"
    return json.dumps(obj)


def _write_text(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ModelValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelValidationError(f"{path} is not valid JSON: {exc}") from exc


def _parse_transform(spec: Optional[str]) -> Optional[MonotoneBijection]:
    if spec is None or spec == "auto":
        return None
    try:
        return MonotoneBijection.from_descriptor(json.loads(spec))
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ModelValidationError(f"bad transform descriptor: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    model = models.model_from_dict(_load_json(args.model))
    if model.kind == "epstein_zin" and model.ez is not None and model.ez.exogenous is not None:
        diag = models.ez_stability_check(model.mdp, model.ez)
        if not diag.max_stable:
            sys.stderr.write(
                f"stability check: root {diag.root:.6g} >= 1; program not well-posed\n")
            return EXIT_ILL_POSED
    if args.method == "howard":
        result = adp.howard_iteration(model.adp, args.mode, tol=args.tol,
                                      max_iter=args.max_iter)
    else:
        result = adp.value_iteration(model.adp, args.mode, tol=args.tol,
                                     max_iter=args.max_iter)
    doc = {
        "value": result.value.values,
        "policy": result.policy.tolist() if result.policy is not None else None,
        "iterations": result.iterations,
        "residual": result.residual,
        "converged": result.converged,
        "method": args.method,
    }
    _write_text(args.out, _format_value(doc))
    return EXIT_OK if result.converged else EXIT_NONCONVERGENCE


def cmd_ez_stability(args) -> int:
    doc = _load_json(args.model)
    model = models.model_from_dict(doc)
    if model.kind != "epstein_zin" or model.ez is None or model.ez.exogenous is None:
        raise ModelValidationError(
            "ez-stability requires an epstein_zin model with an exogenous block")
    diag = models.ez_stability_check(model.mdp, model.ez)
    out = {
        "E": diag.E_value,
        "root": diag.root,
        "method": diag.method,
        "k_used": diag.k_used,
        "verdict": diag.verdict,
    }
    _write_text(args.out, _format_value(out))
    return EXIT_OK if diag.max_stable else EXIT_ILL_POSED


def cmd_verify_conjugacy(args) -> int:
    model = models.model_from_dict(_load_json(args.model))
    override = _parse_transform(args.transform)
    adp_a, adp_b, F = models.conjugate_pair(model, override=override)
    report = verify_conjugacy(adp_a, adp_b, F, n_samples=args.samples,
                              seed=args.seed, tol=args.tol)
    out = {
        "max_deviation": report.max_deviation,
        "samples_checked": report.samples_checked,
        "samples_skipped": report.samples_skipped,
        "classification": report.classification,
        "tolerance": report.tolerance,
        "transform": F.to_descriptor(),
    }
    _write_text(args.out, _format_value(out))
    return EXIT_OK if report.classification != "failed" else EXIT_FAILED_CHECK


def cmd_rbc_bench(args) -> int:
    doc = _load_json(args.config)
    runs = doc["runs"] if isinstance(doc, dict) and "runs" in doc else [doc]
    if not isinstance(runs, list) or not runs:
        raise ModelValidationError("config field 'runs' must be a nonempty list")
    rows = ["param_id,e_orig,e_trans,gain,runtime_s,grid_points,iters"]
    for pid, cfg in enumerate(runs):
        params, grid, n_iter, transform = rbc.rbc_config_from_dict(cfg)
        t0 = time.monotonic()
        report = rbc.accuracy_gain_experiment(params, grid, n_iter, transform=transform)
        elapsed = time.monotonic() - t0 if args.timings else 0.0
        sys.stderr.write(
            f"run {pid}: transform m={format(report.m, '.17g')} "
            f"b={format(report.b, '.17g')}\n")
        rows.append(",".join([
            str(pid),
            format(report.e_orig, ".17g"),
            format(report.e_trans, ".17g"),
            format(report.gain, ".17g"),
            format(elapsed, ".17g"),
            str(report.grid_points),
            str(report.n_iter),
        ]))
    _write_text(args.out, "\n".join(rows) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adpkit",
        description="Policy-operator dynamic programming: solvers, conjugacy "
                    "checks, stability diagnostics, and the grid benchmark.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a finite model to optimality")
    solve.add_argument("--model", required=True, help="model JSON path")
    solve.add_argument("--mode", choices=["max", "min"], default="max")
    solve.add_argument("--method", choices=["vfi", "howard"], default="howard")
    solve.add_argument("--tol", type=float, default=1e-10)
    solve.add_argument("--max-iter", type=int, default=100_000)
    solve.add_argument("--out", default=None, help="output path (default stdout)")
    solve.set_defaults(func=cmd_solve)

    ez = sub.add_parser("ez-stability", help="recursive-utility stability diagnostics")
    ez.add_argument("--model", required=True)
    ez.add_argument("--out", default=None)
    ez.set_defaults(func=cmd_ez_stability)

    vc = sub.add_parser("verify-conjugacy", help="check the designated conjugate pair")
    vc.add_argument("--model", required=True)
    vc.add_argument("--samples", type=int, default=100)
    vc.add_argument("--seed", type=int, default=0)
    vc.add_argument("--tol", type=float, default=1e-9)
    vc.add_argument("--transform", default=None,
                    help="JSON transform descriptor overriding the designated one")
    vc.add_argument("--out", default=None)
    vc.set_defaults(func=cmd_verify_conjugacy)

    bench = sub.add_parser("rbc-bench", help="grid-accuracy benchmark")
    bench.add_argument("--config", required=True, help="benchmark config JSON path")
    bench.add_argument("--timings", action="store_true",
                       help="record wall-clock runtimes (breaks byte-identity)")
    bench.add_argument("--out", default=None)
    bench.set_defaults(func=cmd_rbc_bench)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ModelValidationError, DomainViolationError) as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return EXIT_VALIDATION
    except NonConvergenceError as exc:
        sys.stderr.write(f"did not converge: {exc}\n")
        return EXIT_NONCONVERGENCE
    except DivergenceError as exc:
        sys.stderr.write(f"ill-posed: {exc}\n")
        return EXIT_ILL_POSED
    except AdpError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
