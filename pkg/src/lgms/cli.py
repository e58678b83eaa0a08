"""Command line entry point: ``lgms verify --surface bl3 --suite theorem-a``."""

from __future__ import annotations

import argparse
import os
import re
import sys

from .report import SUITES, RunConfig, run


def _orientation(text: str) -> int:
    value = int(text)
    if value not in (-1, 1):
        raise argparse.ArgumentTypeError("orientation must be +1 or -1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lgms", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="solve, compute E_W, check weights and collections")
    v.add_argument("--surface", required=True,
                   help="catalog id or comma separated ids, e.g. p2,bl3,product:p2,p1")
    v.add_argument("--suite", choices=SUITES, default="all")
    v.add_argument("--t", type=float, default=None, help="deformation parameter")
    v.add_argument("--orientation", type=_orientation, default=-1)
    v.add_argument("--snap-tol", type=float, default=0.02)
    v.add_argument("--cert-tol", type=float, default=1e-10)
    v.add_argument("--dedup", type=float, default=1e-6)
    v.add_argument("--max-step", type=float, default=5e-2)
    v.add_argument("--json", dest="json_path")
    v.add_argument("--svg-dir")
    v.add_argument("--trace-csv")
    v.add_argument("--timings", action="store_true", help="include wall-clock timings in JSON")
    return parser


_ID = re.compile(r"product:[^,;]+,[^,;]+|projbundle:s=\d+,a=\d+(?:,\d+)*|[^,;]+")


def split_surfaces(text: str) -> list[str]:
    """Split "p2,product:p2,p1,bl3" into catalog ids, keeping parametrised ids whole."""
    return [m.group(0).strip() for m in _ID.finditer(text) if m.group(0).strip()]


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    seed = os.environ.get("LGMS_SEED")
    try:
        cfg = RunConfig(
            surfaces=split_surfaces(args.surface), suite=args.suite, t=args.t,
            orientation=args.orientation, dedup_rel=args.dedup, cert_tol=args.cert_tol,
            snap_tol=args.snap_tol, max_step=args.max_step, json_path=args.json_path,
            svg_dir=args.svg_dir, trace_csv=args.trace_csv, timings=args.timings,
            seed=None if seed is None else int(seed))
    except ValueError as exc:
        print(f"lgms: {exc}", file=sys.stderr)
        return 2
    try:
        status, report = run(cfg)
    except OSError as exc:
        print(f"lgms: {exc}", file=sys.stderr)
        return 2
    for s in report.surfaces:
        flag = "PASS" if s.passed else "FAIL"
        checks = " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in s.checks.items())
        print(f"{flag} {s.X.name} t={s.t:g} {checks}")
        if s.ew is not None:
            from .report import _label
            print("  E_W: " + ", ".join(f"z{e.index}->{_label(s.X, e.cls)}" for e in s.ew))
        if s.theorem_a is not None:
            n_ok = sum(r.passed for r in s.theorem_a.rows)
            print(f"  weight rows: {n_ok}/{len(s.theorem_a.rows)} pass")
        for err in s.errors:
            print(f"  error: {err}")
    return status


if __name__ == "__main__":
    sys.exit(main())
