"""Verification runs and their JSON reports."""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .continuation import StepControl
from .critsolve import CriticalSet, SolverOptions, critical_set
from .hmscheck import (TheoremAReport, certify_collection, ew_table, order_classes,
                       verify_theorem_a)
from .laurent import default_t
from .toric_core import CATALOG_NAMES, ToricSurfaceData, build_variety, normalized_volume

SCHEMA_VERSION = 1
SUITES = ("solve", "ew", "theorem-a", "collection", "all")


@dataclass
class RunConfig:
    surfaces: list[str]
    suite: str = "all"
    t: float | None = None
    orientation: int = -1
    dedup_rel: float = 1e-6
    cert_tol: float = 1e-10
    snap_tol: float = 0.02
    max_step: float = 5e-2
    json_path: str | None = None
    svg_dir: str | None = None
    trace_csv: str | None = None
    timings: bool = False
    seed: int | None = None

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; choose from {SUITES}")
        if self.orientation not in (-1, 1):
            raise ValueError("orientation must be +1 or -1")
        for name, v in (("dedup_rel", self.dedup_rel), ("cert_tol", self.cert_tol),
                        ("snap_tol", self.snap_tol), ("max_step", self.max_step)):
            if not v > 0:
                raise ValueError(f"{name} must be positive")
        for s in self.surfaces:
            build_variety(s)  # raises on unknown names
        if self.t is not None and self.t < 0:
            raise ValueError("t must be non-negative")

    def wants(self, suite: str) -> bool:
        return self.suite == "all" or self.suite == suite

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("json_path", "svg_dir", "trace_csv"):
            d.pop(k)
        return d


@dataclass
class SurfaceResult:
    X: ToricSurfaceData
    t: float
    crit: CriticalSet | None = None
    ew: list | None = None
    theorem_a: TheoremAReport | None = None
    collection: object | None = None
    errors: list[str] = field(default_factory=list)
    checks: dict[str, bool] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.errors and all(self.checks.values())


@dataclass
class VerificationReport:
    config: RunConfig
    surfaces: list[SurfaceResult]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.surfaces)

    def to_json(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "config": self.config.to_json(),
            "pass": self.passed,
            "surfaces": [surface_json(s, self.config) for s in self.surfaces],
        }

    def dumps(self) -> str:
        return json.dumps(_fixed(self.to_json()), sort_keys=True, indent=1)


def _fixed(obj):
    """Round every float to 12 significant digits for byte-stable output."""
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _fixed(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_fixed(v) for v in obj]
    if isinstance(obj, np.generic):
        return _fixed(obj.item())
    return obj


def _label(X: ToricSurfaceData, c) -> str:
    parts = []
    for coef, name in zip(c, X.pic_basis_labels):
        if coef == 0:
            continue
        mag = "" if abs(coef) == 1 else str(abs(coef))
        sign = "-" if coef < 0 else ("+" if parts else "")
        parts.append(f"{sign}{mag}{name}")
    return "".join(parts) or "0"


def surface_json(r: SurfaceResult, cfg: RunConfig) -> dict:
    X = r.X
    out: dict = {"name": X.name, "t": r.t, "pass": r.passed, "checks": r.checks,
                 "errors": r.errors}
    if cfg.timings:
        out["timings"] = r.timings
    if r.crit is not None:
        out["crit"] = [
            {"index": i, "z": [[float(c.real), float(c.imag)] for c in z],
             "arg": [float(a) for a in r.crit.args()[i]],
             "residual": float(r.crit.residuals[i]), "base": i == r.crit.base_index}
            for i, z in enumerate(r.crit.points)]
    if r.ew is not None:
        out["ew"] = [{"z": e.index, "class": list(e.cls), "label": _label(X, e.cls),
                      "raw": list(e.divisor.raw),
                      "snapped": [str(s) for s in e.divisor.snapped],
                      "sides": list(e.divisor.sides), "wall_resolved": e.resolved}
                     for e in r.ew]
    if r.theorem_a is not None:
        rows = []
        for row in r.theorem_a.rows:
            d = row.to_json(X)
            if row.record is not None:
                d["windings"] = list(row.record.loop.windings)
                d["path"] = row.record.path.to_json(512)
            rows.append(d)
        out["theorem_a"] = rows
    if r.collection is not None:
        c = r.collection.to_json()
        c["labels"] = [_label(X, k) for k in r.collection.order]
        out["collection"] = c
    return out


def run_surface(name: str, cfg: RunConfig) -> SurfaceResult:
    X = build_variety(name)
    t = default_t(X) if cfg.t is None else cfg.t
    res = SurfaceResult(X, t)
    opts = SolverOptions(dedup_rel=cfg.dedup_rel, cert_tol=cfg.cert_tol)
    ctl = StepControl(max_step=cfg.max_step)
    clock = time.perf_counter()
    try:
        res.crit = critical_set(X, t, cfg.orientation, opts)
        res.checks["count"] = len(res.crit) == normalized_volume(X)
        res.checks["residuals"] = bool(np.all(res.crit.residuals < cfg.cert_tol))
        res.timings["solve"] = time.perf_counter() - clock
        if cfg.suite == "solve":
            return res
        res.ew = ew_table(X, res.crit)
        res.checks["ew_base_zero"] = not any(res.ew[res.crit.base_index].cls)
        res.checks["ew_injective"] = len({e.cls for e in res.ew}) == len(res.ew)
        res.timings["ew"] = time.perf_counter() - clock
        if cfg.wants("theorem-a"):
            res.theorem_a = verify_theorem_a(X, t, cfg.orientation, ctl, res.crit,
                                             cfg.snap_tol)
            res.checks["theorem_a"] = res.theorem_a.passed
            res.timings["theorem_a"] = time.perf_counter() - clock
        if cfg.wants("collection"):
            res.collection = certify_collection(X, order_classes(X, [e.cls for e in res.ew]))
            res.checks["collection"] = res.collection.passed
            res.timings["collection"] = time.perf_counter() - clock
    except Exception as exc:  # any module abort fails the surface with a diagnostic
        res.errors.append(f"{type(exc).__name__}: {exc}")
    return res


def run(cfg: RunConfig) -> tuple[int, VerificationReport]:
    """Execute the configured suites; exit status 0 iff every row passed."""
    report = VerificationReport(cfg, [run_surface(s, cfg) for s in cfg.surfaces])
    if cfg.json_path:
        with open(cfg.json_path, "w") as fh:
            fh.write(report.dumps())
            fh.write("\n")
    if cfg.svg_dir:
        from .svg import emit_svg
        os.makedirs(cfg.svg_dir, exist_ok=True)
        for s in report.surfaces:
            if s.X.dim == 2:
                emit_svg(s, os.path.join(cfg.svg_dir, f"{_safe(s.X.name)}.svg"))
    if cfg.trace_csv:
        write_traces(report, cfg.trace_csv)
    return (0 if report.passed else 1), report


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in name)


def write_traces(report: VerificationReport, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("label,theta,coords_re_im...,lifted...\n")
        for s in report.surfaces:
            if s.theorem_a is None:
                continue
            for row in s.theorem_a.rows:
                if row.record is not None:
                    label = f"{s.X.name}:z{row.z_index}:{s.X.cone_labels[row.sigma]}"
                    row.record.path.write_csv(fh, label)


def default_surfaces() -> list[str]:
    return list(CATALOG_NAMES)
