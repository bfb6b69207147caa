"""Command-line front end.

Three subcommands:

* ``run``    -- execute an experiment described by a JSON config, writing a
  CSV series, a JSON summary, and a run manifest next to each other.
* ``check``  -- run a named self-check suite and report per-check results.
* ``infer``  -- read a data matrix (binary or CSV) and emit simultaneous
  confidence intervals plus the zero-mean test decision as JSON.

Exit codes are fixed for CI use: 0 success, 1 check failure, 2 validation
or input error, 3 numerical failure. Result files never contain
timestamps; reruns of the same config are bit-identical regardless of the
--threads setting (the kernels are single-threaded; the flag only caps the
compiler's thread pool). Timestamps live in the manifest only.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import os
import sys
from datetime import datetime, timezone
from typing import List, Optional

import numpy as np

from . import __version__
from .bootstrap import (
    bootstrap_quantile,
    empirical_resample,
    mean_test,
    multiplier_sample,
    simultaneous_cis,
)
from .checks import SUITES, run_suite, suite_passed
from .experiments import CSV_COLUMNS, ExperimentConfig, run_experiment
from .populations import load_matrix
from .util import NumericalError, ValidationError, atomic_write_text, canonical_json, sha256_hex

__all__ = ["main", "RunManifest", "cmd_run", "cmd_check", "cmd_infer"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


@dataclasses.dataclass
class RunManifest:
    """Run provenance, written atomically before and after the experiment."""

    config_hash: str
    tool_version: str
    started_at: str
    finished_at: Optional[str]
    outputs: List[str]
    master_seed: int
    status: str
    error: Optional[str] = None

    def to_json_dict(self) -> dict:
        return dataclasses.asdict(self)

    def write(self, path: str) -> None:
        atomic_write_text(path, canonical_json(self.to_json_dict()) + "\n")


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _apply_threads(threads: Optional[int]) -> None:
    """Cap the jit compiler's worker pool. The numeric kernels are
    single-threaded, so this cannot change any result; it exists so batch
    schedulers can bound resource use."""
    if threads is None:
        env = os.environ.get("HDCLT_THREADS", "").strip()
        if not env:
            return
        try:
            threads = int(env)
        except ValueError:
            raise ValidationError("HDCLT_THREADS must be an integer, got %r" % (env,))
    if threads < 1:
        raise ValidationError("--threads must be >= 1")
    try:
        import numba

        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
    except ImportError:
        pass


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)


def _write_csv(path: str, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row)
    atomic_write_text(path, buf.getvalue())


def cmd_run(args: argparse.Namespace) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print("cannot read config: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION

    cfg = ExperimentConfig.from_json(text)  # ValidationError carries the parse location
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=int(args.seed))
    if args.out is not None:
        cfg = dataclasses.replace(cfg, out_path=args.out)

    base = cfg.out_path
    csv_path, json_path, manifest_path = base + ".csv", base + ".json", base + ".manifest.json"
    _ensure_parent(base)

    manifest = RunManifest(
        config_hash=sha256_hex(cfg.to_json()),
        tool_version=__version__,
        started_at=_utc_now(),
        finished_at=None,
        outputs=[csv_path, json_path],
        master_seed=cfg.seed,
        status="running",
    )
    manifest.write(manifest_path)

    try:
        outcome = run_experiment(cfg)
    except ValidationError as exc:
        manifest.status, manifest.error, manifest.finished_at = "failed", str(exc), _utc_now()
        manifest.write(manifest_path)
        raise
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        manifest.status, manifest.error, manifest.finished_at = "failed", str(exc), _utc_now()
        manifest.write(manifest_path)
        print("numerical failure: %s" % exc, file=sys.stderr)
        return EXIT_NUMERICAL

    _write_csv(csv_path, outcome.csv_rows)
    # summaries already embed the config dict
    atomic_write_text(json_path, canonical_json(outcome.summary) + "\n")

    manifest.status, manifest.finished_at = "ok", _utc_now()
    manifest.write(manifest_path)
    print("wrote %s, %s" % (csv_path, json_path))
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    results = run_suite(args.suite, seed=args.seed)
    for item in results:
        print("%s %s: %s" % ("PASS" if item["passed"] else "FAIL", item["id"], item["detail"]))
    passed = suite_passed(results)
    report = {
        "suite": args.suite,
        "seed": args.seed,
        "passed": passed,
        "checks": results,
    }
    if args.out is not None:
        _ensure_parent(args.out)
        atomic_write_text(args.out, canonical_json(report) + "\n")
    if not passed:
        failed = [item["id"] for item in results if not item["passed"]]
        print("failed checks: %s" % ", ".join(failed), file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _read_data_matrix(path: str) -> np.ndarray:
    try:
        return load_matrix(path)
    except ValidationError as exc:
        if "bad magic" not in str(exc):
            raise
    except OSError as exc:
        raise ValidationError("cannot read data file: %s" % exc)
    try:
        data = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ValidationError("%s: neither a matrix file nor numeric CSV (%s)" % (path, exc))
    return data


def cmd_infer(args: argparse.Namespace) -> int:
    data = _read_data_matrix(args.data)
    if data.shape[0] < 2:
        raise ValidationError("need at least 2 rows, got %d" % data.shape[0])
    sampler = multiplier_sample if args.method == "multiplier" else empirical_resample
    summary = sampler(data, B=args.B, seed=args.seed, alpha=args.alpha)
    cis = simultaneous_cis(data, summary, args.alpha)
    payload = {
        "n": int(data.shape[0]),
        "p": int(data.shape[1]),
        "alpha": args.alpha,
        "method": args.method,
        "B": args.B,
        "seed": args.seed,
        "centers": list(cis.centers),
        "half_width": cis.half_width,
        "q_hat": bootstrap_quantile(summary, args.alpha),
        "reject": mean_test(data, summary, args.alpha),
    }
    text = canonical_json(payload) + "\n"
    if args.out is not None:
        _ensure_parent(args.out)
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdclt",
        description="High-dimensional CLT and bootstrap laboratory",
    )
    parser.add_argument("--version", action="version", version="hdclt " + __version__)
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="execute an experiment from a JSON config")
    p_run.add_argument("--config", required=True, help="path to the experiment config JSON")
    p_run.add_argument("--out", default=None, help="output base path (overrides the config)")
    p_run.add_argument("--seed", type=int, default=None, help="master seed override")
    p_run.add_argument("--threads", type=int, default=None)

    p_check = sub.add_parser("check", help="run a self-check suite")
    p_check.add_argument("--suite", default="all", choices=SUITES + ("all",))
    p_check.add_argument("--out", default=None, help="write the JSON report here")
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("--threads", type=int, default=None)

    p_infer = sub.add_parser("infer", help="simultaneous intervals for a data matrix")
    p_infer.add_argument("data", help="matrix file (binary format or numeric CSV)")
    p_infer.add_argument("--alpha", type=float, default=0.1)
    p_infer.add_argument("--method", default="multiplier", choices=("multiplier", "empirical"))
    p_infer.add_argument("--B", type=int, default=2000)
    p_infer.add_argument("--seed", type=int, default=0)
    p_infer.add_argument("--out", default=None, help="write the JSON result here")
    p_infer.add_argument("--threads", type=int, default=None)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_VALIDATION
    handler = {"run": cmd_run, "check": cmd_check, "infer": cmd_infer}[args.command]
    try:
        _apply_threads(args.threads)
        return handler(args)
    except ValidationError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print("numerical failure: %s" % exc, file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
