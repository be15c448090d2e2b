"""Command line driver: ``radial-ns {thresholds,check,run,mms}``.

Exit codes: 0 success, 1 negative verdict (not admissible under enforce,
failed run, order outside its band), 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import io as rio
from .config import load, to_text
from .errors import RadialNSError, UsageError
from .params import ModelParams, Regime, root_k1, root_k2
from .solver import SchemeConfig, run
from .verification import CONSTANT_CASE, ORDER_BANDS, ManufacturedCase, convergence_study

OUTPUT_ENV = "RADIAL_NS_OUTPUT_DIR"

log = logging.getLogger("radial_ns")


def thresholds_text() -> str:
    k1, k2 = root_k1(), root_k2()
    rows = [
        ("k1", k1),
        ("k2", k2),
        ("k1_cubic_residual", k1**3 - 6 * k1**2 + 8 * k1 - 4),
        ("k2_cubic_residual", 2 * k2**3 - 9 * k2**2 + 10 * k2 - 4),
        ("alpha_min_2d", 1 - 2 / k1),
        ("alpha_min_2d_weighted", 9 - 6 * math.sqrt(2)),
        ("alpha_min_3d", 1 - 1 / k2),
    ]
    return "\n".join(f"{name} = {value:.10g}" for name, value in rows) + "\n"


def cmd_thresholds(args) -> int:
    sys.stdout.write(thresholds_text())
    return 0


def cmd_check(args) -> int:
    cfg = load(args.config)
    policy = args.policy or cfg.policy
    report = cfg.admissibility()
    if args.json:
        body = report.to_dict()
        body["policy"] = policy
        print(json.dumps(body, indent=2, sort_keys=True))
    else:
        print(report.to_text())
        print(f"policy: {policy}")
    return 0 if report.admissible or policy == "warn" else 1


def run_outputs(cfg, config_text: str):
    """Run ``cfg`` and build every output file in memory: {name: bytes}, exit code."""
    report = cfg.validate_for_run()
    if not report.admissible:
        log.warning("running outside the admissible window: %s", ", ".join(report.violated_conditions))
    files = {}
    snaps = []

    def on_sample(state, sample):
        name = f"snapshot_{len(snaps):05d}.csv"
        snaps.append(name)
        files[name] = rio.snapshot_text(state, cfg.grid, cfg.params).encode()

    error = None
    try:
        result = run(cfg, on_sample=on_sample)
    except RadialNSError as exc:
        result, error = exc.partial_result, f"{type(exc).__name__}: {exc}"
    files["diagnostics.csv"] = rio.diagnostics_csv(result.samples, cfg).encode()
    status = {
        "completed": result.completed,
        "n_steps": result.n_steps,
        "n_rejected": result.n_rejected,
        "failed_step": result.failed_step,
        "failure": error or result.failure,
        "global_min_rho": result.global_min_rho,
        "global_max_rho": result.global_max_rho,
        "final_time": result.final_state.time if result.final_state is not None else 0.0,
    }
    files["manifest.json"] = rio.manifest_text(config_text, report.to_dict(), dict(files), status).encode()
    return files, (0 if result.completed else 1)


def cmd_run(args) -> int:
    cfg = load(args.config)
    out_dir = os.environ.get(OUTPUT_ENV) or cfg.output_dir
    files, code = run_outputs(cfg, to_text(cfg))
    rio.write_files(out_dir, files)
    print(f"wrote {len(files)} files to {out_dir}")
    if code:
        print("run failed; see manifest.json", file=sys.stderr)
    return code


def _sizes(text: str):
    try:
        return tuple(int(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise UsageError(f"bad --sizes {text!r}") from None


def cmd_mms(args) -> int:
    params = ModelParams(args.dim, args.alpha, args.gamma)
    case = CONSTANT_CASE if args.case == "constant" else ManufacturedCase()
    scheme = SchemeConfig(advection=args.scheme)
    result = convergence_study(case, params, scheme, _sizes(args.sizes), workers=args.workers)
    text = result.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    ok = result.passes()
    lo, hi = ORDER_BANDS[args.scheme]
    verdict = "exact" if result.exact else f"orders rho={result.order_rho:.4f} u={result.order_u:.4f}"
    print(f"{'pass' if ok else 'fail'}: {args.scheme} {verdict} band=[{lo}, {hi}]"
          + ("" if result.reliable else " (unreliable: " + "; ".join(result.notes) + ")"))
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="radial-ns", description="Radial compressible Navier-Stokes experiments")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("thresholds", help="print the admissibility thresholds").set_defaults(fn=cmd_thresholds)

    p = sub.add_parser("check", help="admissibility report for a config")
    p.add_argument("config")
    p.add_argument("--json", action="store_true")
    p.add_argument("--policy", choices=("warn", "enforce"))
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("run", help=f"run a config (output dir override: ${OUTPUT_ENV})")
    p.add_argument("config")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("mms", help="manufactured-solution convergence study")
    p.add_argument("--scheme", choices=tuple(ORDER_BANDS), default="muscl-minmod")
    p.add_argument("--sizes", default="128,256,512")
    p.add_argument("--case", choices=("builtin", "constant"), default="builtin")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.7)
    p.add_argument("--gamma", type=float, default=1.4)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_mms)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
