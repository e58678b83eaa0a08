"""Multistart Newton for the critical locus of a Laurent potential, and offset sets."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .continuation import Homotopy, StepControl, newton, track_path
from .laurent import LGSystem, lg_potential, lg_system
from .toric_core import ToricSurfaceData, build_variety, normalized_volume, parse_catalog_id

TWO_PI = 2.0 * np.pi


class UndercountError(RuntimeError):
    def __init__(self, found, expected):
        super().__init__(f"found {len(found)} critical points, expected {expected}")
        self.found = found
        self.expected = expected


class DegenerateCriticalPointError(RuntimeError):
    """The Jacobian is numerically singular at a root: W is at or near the discriminant."""


class OracleUnavailable(LookupError):
    pass


class PathJumpError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverOptions:
    dedup_rel: float = 1e-6
    cert_tol: float = 1e-10
    n_radii: int | None = None  # default 9 in dimension <= 2, 3 above
    max_phase_denominator: int | None = None  # default normalized_volume
    newton_iters: int = 60
    max_log_step: float = 1.0
    cond_limit: float = 1e12
    degenerate_tol: float = 1e-6  # smallest singular value of J relative to the term scale
    max_offset: float = 1.0


def unit_arg(x):
    """Arg normalised into [0, 1), with values within 1e-12 of 1 sent to 0."""
    a = np.mod(np.asarray(x, dtype=float), 1.0)
    return np.where(a > 1.0 - 1e-12, 0.0, a)


def arg(z):
    """Arg(r e^{2 pi i theta}) = theta in [0, 1)."""
    return unit_arg(np.angle(np.asarray(z, dtype=complex)) / TWO_PI)


@dataclass
class CriticalSet:
    points: np.ndarray  # shape (N, n), complex
    base_index: int
    residuals: np.ndarray
    t: float
    offset: np.ndarray | None = None
    system: LGSystem | None = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.points)

    def args(self) -> np.ndarray:
        return arg(self.points)

    def index_of(self, z: Sequence[complex], rel: float = 1e-6) -> int | None:
        z = np.asarray(z, dtype=complex)
        d = np.max(np.abs(self.points - z[None, :]), axis=1)
        d = d / np.maximum(1.0, np.max(np.abs(self.points), axis=1))
        k = int(np.argmin(d))
        return k if d[k] < rel else None

    def to_json(self) -> dict:
        return {
            "points": [[[float(c.real), float(c.imag)] for c in p] for p in self.points],
            "residuals": [float(r) for r in self.residuals],
            "base_index": int(self.base_index),
            "t": float(self.t),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _phase_grid(q: int) -> list[float]:
    fr = sorted({Fraction(k, d) for d in range(1, q + 1) for k in range(d)})
    return [float(f) for f in fr]


def _seeds(n: int, t: float, opts: SolverOptions, q: int) -> np.ndarray:
    n_r = opts.n_radii or (9 if n <= 2 else 3)
    hi = 1.0 + t / n
    radii = np.linspace(-hi, hi, n_r)
    phases = np.array(_phase_grid(q)) + 0.5 / (q * q + 1)  # stay off symmetry lines
    per_coord = (radii[:, None] + TWO_PI * 1j * phases[None, :]).ravel()
    return np.array(list(itertools.product(per_coord, repeat=n)), dtype=complex)


def _batched_newton(sys: LGSystem, w: np.ndarray, coeffs, offset, opts: SolverOptions):
    w = w.copy()
    active = np.arange(len(w))
    for _ in range(opts.newton_iters):
        if active.size == 0:
            break
        wa = w[active]
        F = sys.F_log(wa, coeffs, offset)
        scale = np.max(np.abs(coeffs * np.exp(wa @ sys.N.T)), axis=1)
        done = np.max(np.abs(F), axis=1) < 1e-13 * np.maximum(1.0, scale)
        J = sys.J_log(wa, coeffs)
        with np.errstate(all="ignore"):
            try:
                dw = np.linalg.solve(J, -F[..., None])[..., 0]
            except np.linalg.LinAlgError:
                dw = np.stack([_safe_solve(Jk, -Fk) for Jk, Fk in zip(J, F)])
        dw = np.where(np.isfinite(dw), dw, 0.0)
        norm = np.max(np.abs(dw), axis=1, keepdims=True)
        dw = dw * np.minimum(1.0, opts.max_log_step / np.maximum(norm, 1e-300))
        wa = wa + dw
        wa.real = np.clip(wa.real, -60, 60)
        w[active] = wa
        escaped = np.max(np.abs(wa.real), axis=1) >= 60
        active = active[~(done | escaped)]
    return w


def _safe_solve(J, b):
    try:
        return np.linalg.solve(J, b)
    except np.linalg.LinAlgError:
        return np.zeros_like(b)


def term_scale(sys: LGSystem, w: np.ndarray, coeffs) -> float:
    return float(np.max(np.abs(coeffs * np.exp(w @ sys.N.T))))


def polish(sys: LGSystem, z, t: float, theta: float = 0.0, offset=None, tol: float = 1e-10):
    coeffs = sys.family.coefficients(t, theta)
    h = Homotopy(lambda w, lam: sys.F_log(w, coeffs, offset),
                 lambda w, lam: sys.J_log(w, coeffs), None,
                 lambda w, lam: term_scale(sys, w, coeffs))
    w, res, _, ok = newton(h, np.log(np.asarray(z, dtype=complex)), 0.0, tol, 20)
    return np.exp(w), res, ok


def base_index_of(sys: LGSystem, points: np.ndarray) -> int:
    """Point whose monomial arguments Arg(z^{n_rho}) are all closest to 0."""
    if len(points) == 0:
        return 0
    phases = np.angle(points) / TWO_PI
    mono = unit_arg(phases @ sys.N.T)
    dist = np.minimum(mono, 1.0 - mono)
    return int(np.argmin(np.max(dist, axis=1)))


def _sort_key(z: np.ndarray):
    a = np.round(arg(z), 6)
    a = np.where(a >= 1.0, 0.0, a)
    return tuple(a) + tuple(np.round(np.abs(z), 9))


def _assemble(sys, pts, residuals, t, offset) -> CriticalSet:
    order = sorted(range(len(pts)), key=lambda i: _sort_key(pts[i]))
    pts = np.array([pts[i] for i in order], dtype=complex).reshape(len(order), sys.dim)
    residuals = np.array([residuals[i] for i in order])
    return CriticalSet(pts, base_index_of(sys, pts), residuals, t,
                       None if offset is None else np.asarray(offset, dtype=complex), sys)


def solve_critical(sys: LGSystem, t: float = 0.0, a: Sequence[float] | None = None,
                   opts: SolverOptions = SolverOptions(), expected: int | None = None,
                   X: ToricSurfaceData | None = None) -> CriticalSet:
    """All solutions of z_i dW/dz_i = a_i at deformation parameter t."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if a is not None and np.max(np.abs(a)) > opts.max_offset:
        raise ValueError(f"offset {a} exceeds the configured bound {opts.max_offset}")
    if expected is None:
        expected = normalized_volume(X) if X is not None else _newton_polytope_volume(sys)
    n = sys.dim
    q = opts.max_phase_denominator or expected
    coeffs = sys.family.coefficients(t, 0.0)
    w = _batched_newton(sys, _seeds(n, t, opts, q), coeffs, a, opts)
    F = sys.F_log(w, coeffs, a)
    scale = np.max(np.abs(coeffs * np.exp(w @ sys.N.T)), axis=1)
    good = np.all(np.isfinite(F), axis=1) & (np.max(np.abs(F), axis=1) < 1e-6 * np.maximum(1, scale))
    found: list[np.ndarray] = []
    residuals: list[float] = []
    cand = w[good]
    # collapse seeds that reached the same root before polishing one by one
    key = np.concatenate([np.round(cand.real, 5), np.round(unit_arg(cand.imag / TWO_PI), 5) % 1.0], axis=1)
    _, first = np.unique(key, axis=0, return_index=True)
    for wk in cand[np.sort(first)]:
        z, res, ok = polish(sys, np.exp(wk), t, 0.0, a, opts.cert_tol)
        if not ok:
            continue
        if any(np.max(np.abs(z - p)) < opts.dedup_rel * max(1.0, np.max(np.abs(p))) for p in found):
            continue
        wz = np.log(z)
        sv = np.linalg.svd(sys.J_log(wz, coeffs), compute_uv=False)
        if sv[-1] < opts.degenerate_tol * term_scale(sys, wz, coeffs) or sv[0] > opts.cond_limit * sv[-1]:
            raise DegenerateCriticalPointError(
                f"singular Jacobian at z={z} (smallest singular value {sv[-1]:.2e}); "
                "the potential lies at or near the discriminant")
        found.append(z)
        residuals.append(res)
    crit = _assemble(sys, found, residuals, t, a)
    if len(found) < expected:
        raise UndercountError(crit, expected)
    if len(found) > expected:
        raise RuntimeError(f"found {len(found)} critical points, more than the bound {expected}")
    return crit


def _newton_polytope_volume(sys: LGSystem) -> int:
    """Normalized volume of the convex hull of the exponents (fan of a Fano polytope)."""
    from scipy.spatial import ConvexHull
    import math
    pts = np.vstack([sys.N, np.zeros(sys.dim)])
    if sys.dim == 1:
        return int(round(np.ptp(pts)))
    return int(round(ConvexHull(pts).volume * math.factorial(sys.dim)))


def critical_set(X: ToricSurfaceData, t: float | None = None, orientation: int = -1,
                 opts: SolverOptions = SolverOptions()) -> CriticalSet:
    from .laurent import default_t
    t = default_t(X) if t is None else t
    sys = lg_system(lg_potential(X, t, orientation))
    return solve_critical(sys, t, None, opts, X=X)


# ---------------------------------------------------------------------------
# closed forms


def _pn_points(n: int) -> list[tuple[complex, ...]]:
    return [tuple([np.exp(TWO_PI * 1j * k / (n + 1))] * n) for k in range(n + 1)]


def _closed_points(name: str) -> list[tuple[complex, ...]]:
    head, params = parse_catalog_id(name)
    if head == "p1":
        return _pn_points(1)
    if head == "p2":
        return _pn_points(2)
    if head == "pn":
        return _pn_points(int(params[0]))
    if head == "p1xp1":
        return [a + b for a in _pn_points(1) for b in _pn_points(1)]
    if head == "product":
        A = _closed_points(params[0])
        B = _closed_points(params[1])
        return [a + b for a in A for b in B]
    if head == "bl3":
        r = np.exp(TWO_PI * 1j / 3)
        return [(1, 1), (r, r), (r * r, r * r), (1, -1), (-1, 1), (-1, -1)]
    raise OracleUnavailable(f"no closed form for {name}")


def closed_form_oracle(name: str) -> CriticalSet:
    X = build_variety(name)
    pts = np.array(_closed_points(name), dtype=complex)
    sys = lg_system(lg_potential(X, 0.0))
    res = [float(np.max(np.abs(sys.evaluate(p, 0.0)))) for p in pts]
    return _assemble(sys, list(pts), res, 0.0, None)


# ---------------------------------------------------------------------------
# offset systems


def offset_set(sys: LGSystem, t: float, a: Sequence[float], base: CriticalSet,
               ctl: StepControl = StepControl(), dedup_rel: float = 1e-6) -> CriticalSet:
    """Continue every base point along s -> s*a, s in [0, 1]. Index order is kept."""
    a = np.asarray(a, dtype=complex)
    coeffs = sys.family.coefficients(t, 0.0)
    h = Homotopy(lambda w, s: sys.F_log(w, coeffs, s * a),
                 lambda w, s: sys.J_log(w, coeffs),
                 lambda w, s: -a,
                 lambda w, s: term_scale(sys, w, coeffs))
    out, residuals = [], []
    for z in base.points:
        samples = track_path(h, np.log(z), 0.0, 1.0, ctl)
        w_end = samples[-1][1]
        out.append(np.exp(w_end))
        residuals.append(float(np.max(np.abs(sys.evaluate(out[-1], t, 0.0, a)))))
    out = np.array(out)
    for i, j in itertools.combinations(range(len(out)), 2):
        if np.max(np.abs(out[i] - out[j])) < dedup_rel * max(1.0, np.max(np.abs(out[i]))):
            raise PathJumpError(f"offset continuation merged points {i} and {j}")
    return CriticalSet(out, base.base_index, np.array(residuals), t, a, sys)
