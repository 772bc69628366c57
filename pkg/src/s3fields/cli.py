"""Command-line entry point.

Exit codes form a stable contract for CI: 0 success, 1 usage or configuration
error, 2 verification failure, 3 flow non-convergence.
"""

from __future__ import annotations

import argparse
import os
import secrets
import sys

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VERIFY = 2
EXIT_NO_CONVERGENCE = 3

SPECTRUM_FIELDS = [
    "kind",
    "n",
    "k",
    "eigenvalue_closed_form",
    "eigenvalue_numeric",
    "mult_real_closed",
    "mult_real_numeric",
    "abs_error",
]

TRACE_FIELDS = ["iter", "energy", "residual", "step", "unit_violation"]


def _apply_thread_env():
    """S3FIELDS_THREADS is the only environment variable we honor; it caps the
    BLAS thread pools and must be applied before numpy loads."""
    threads = os.environ.get("S3FIELDS_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="s3fields",
        description="Spectra, energy identities and energy minimization for unit vector fields on the 3-sphere.",
    )
    parser.add_argument("--config", help="key = value config file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="closed-form vs numerically assembled operator spectra")
    sp.add_argument("kind", choices=["vertical", "hopf-map", "identity"])
    sp.add_argument("--degree", type=int, help="basis degree (default from config)")
    sp.add_argument("--format", choices=["csv", "json"], dest="fmt")
    sp.add_argument("--output", help="report path (stdout if omitted)")
    sp.add_argument("--tolerance", type=float, help="override the eigenvalue match tolerance")

    vf = sub.add_parser("verify", help="randomized identity/inequality/Hessian/rigidity suites")
    vf.add_argument("suite", choices=["identities", "inequalities", "hessians", "rigidity"])
    vf.add_argument("--seed", type=int)
    vf.add_argument("--samples", type=int, default=100_000, help="sample budget for inequality scans")
    vf.add_argument("--fresh", action="store_true", help="draw a new seed and print it")
    vf.add_argument("--output", help="JSON report path")

    fl = sub.add_parser("flow", help="projected gradient descent of the vertical energy")
    fl.add_argument("init", choices=["hopf", "perturbed", "random"])
    fl.add_argument("--amplitude", type=float, default=0.3)
    fl.add_argument("--seed", type=int)
    fl.add_argument("--step", type=float)
    fl.add_argument("--tol", type=float)
    fl.add_argument("--max-iters", type=int)
    fl.add_argument("--output-dir", default=".")
    return parser


def _load_config(args):
    from .config import ConfigError, RunConfig, load_config_file

    try:
        cfg = load_config_file(args.config) if args.config else RunConfig()
        if getattr(args, "degree", None) is not None:
            cfg = cfg.with_overrides(basis_degree=args.degree)
        if getattr(args, "fmt", None):
            cfg = cfg.with_overrides(output_format=args.fmt)
        if getattr(args, "seed", None) is not None:
            cfg = cfg.with_overrides(seed=args.seed)
        if getattr(args, "step", None) is not None:
            cfg = cfg.with_overrides(flow_step=args.step)
        if getattr(args, "max_iters", None) is not None:
            cfg = cfg.with_overrides(flow_max_iters=args.max_iters)
        if getattr(args, "tol", None) is not None:
            tols = dict(cfg.tolerances)
            tols["flow_tol"] = args.tol
            cfg = cfg.with_overrides(tolerances=tols)
        if getattr(args, "tolerance", None) is not None:
            tols = dict(cfg.tolerances)
            tols["spectrum_abs"] = args.tolerance
            tols["spectrum_abs_identity"] = args.tolerance
            cfg = cfg.with_overrides(tolerances=tols)
        cfg.validate()
        return cfg
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return None


def cmd_spectrum(args) -> int:
    cfg = _load_config(args)
    if cfg is None:
        return EXIT_CONFIG
    from . import operators as ops
    from . import reporting
    from .harmonics import build_basis

    kind = args.kind.replace("-", "_")
    basis = build_basis(cfg.basis_degree)
    rows = [c.row() for c in ops.spectrum_report(kind, basis)]
    tol = cfg.tol("spectrum_abs_identity" if kind == "identity" else "spectrum_abs")
    bad = [r for r in rows if not (r["abs_error"] < tol and r["mult_real_closed"] == r["mult_real_numeric"])]

    if args.output:
        if cfg.output_format == "json":
            reporting.write_json(args.output, {"kind": kind, "degree": cfg.basis_degree, "tolerance": tol, "rows": rows})
        else:
            reporting.write_csv(args.output, SPECTRUM_FIELDS, rows)
        print(f"wrote {len(rows)} rows to {args.output}")
    else:
        reporting.rows_to_stdout(SPECTRUM_FIELDS, rows)

    if bad:
        print(f"spectrum mismatch on {len(bad)} rows (tolerance {tol:g})", file=sys.stderr)
        return EXIT_VERIFY
    print(f"spectrum {kind}: {len(rows)} rows match closed forms within {tol:g}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    if cfg is None:
        return EXIT_CONFIG
    if args.fresh:
        seed = secrets.randbits(32)
        print(f"fresh seed: {seed}")
        cfg = cfg.with_overrides(seed=seed)
    from . import reporting
    from .verify import SUITES

    suite = SUITES[args.suite]
    ok, report = suite(cfg, args.samples) if args.suite == "inequalities" else suite(cfg)
    if args.output:
        reporting.write_json(args.output, report)
        print(f"wrote report to {args.output}")
    _print_verify_summary(report)
    return EXIT_OK if ok else EXIT_VERIFY


def _print_verify_summary(report: dict):
    from .reporting import fmt

    print(f"suite {report['suite']} (seed {report['seed']}): {'PASS' if report['ok'] else 'FAIL'}")
    for key, value in report.items():
        if key in ("suite", "seed", "rows", "membership_rows", "second_difference_rows", "ok"):
            continue
        print(f"  {key}: {fmt(value) if isinstance(value, float) else value}")
    for row in report.get("rows", [])[:8]:
        print(f"  {row}")


def cmd_flow(args) -> int:
    cfg = _load_config(args)
    if cfg is None:
        return EXIT_CONFIG
    import numpy as np

    from . import fields as FL
    from . import reporting
    from . import variational as V
    from .harmonics import build_basis, hopf_grid

    basis = build_basis(cfg.basis_degree)
    grid = hopf_grid(cfg.grid_levels)
    if args.init == "hopf":
        F0 = FL.hopf_left(basis, grid)
    elif args.init == "perturbed":
        F0 = FL.perturbed_hopf(basis, grid, amplitude=args.amplitude, seed=cfg.seed)
    else:
        F0 = FL.random_unit(basis, grid, 2, seed=cfg.seed)

    result = V.gradient_flow(
        F0,
        step=cfg.flow_step,
        tol=cfg.tol("flow_tol"),
        max_iters=cfg.flow_max_iters,
        classify_tol=cfg.tol("classify"),
    )
    trace, cls = result.trace, result.classification
    outdir = args.output_dir
    os.makedirs(outdir, exist_ok=True)
    reporting.write_csv(os.path.join(outdir, "flow_trace.csv"), TRACE_FIELDS, trace.rows)
    result.final_field.save(os.path.join(outdir, "final_field.json"))
    energy_gap = abs(trace.final_energy - 2.0 * np.pi**2)
    reporting.write_json(
        os.path.join(outdir, "classification.json"),
        {
            "init": args.init,
            "seed": cfg.seed,
            "status": trace.status,
            "iterations": len(trace.rows) - 1,
            "final_energy": trace.final_energy,
            "energy_gap_to_2pi2": energy_gap,
            "classification": cls.to_dict(),
        },
    )
    print(
        f"flow {args.init}: {trace.status} after {len(trace.rows) - 1} iterations, "
        f"energy gap {energy_gap:.3e}, classified "
        f"{'hopf/' + cls.side if cls.is_hopf else 'non-hopf'}"
    )
    if trace.status != "converged":
        return EXIT_NO_CONVERGENCE
    if args.init in ("perturbed", "random"):
        if not (cls.is_hopf and energy_gap < cfg.tol("flow_energy")):
            return EXIT_VERIFY
    return EXIT_OK


def main(argv=None) -> int:
    _apply_thread_env()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors; remap to contract
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    handlers = {"spectrum": cmd_spectrum, "verify": cmd_verify, "flow": cmd_flow}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
