"""The exceptional map E_W, the weight identity m_W = -m_X, and line bundle cohomology."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .continuation import Homotopy, StepControl, TrackingError, track_path
from .critsolve import CriticalSet, critical_set, term_scale, unit_arg
from .laurent import LGSystem, default_t
from .monodromy import (MonodromyRecord, NotLatticeError, loop_for,
                        monodromy_weight, track)
from .toric_core import (ToricSurfaceData, build_variety, canonical_class,
                         class_of, cone_weight, intersection_number, lattice_points,
                         normalized_volume, reference_divisor, toric_weight)

TWO_PI = 2.0 * np.pi


class SnapError(ValueError):
    """No rational with bounded denominator lies within tolerance of an argument."""


class NonInjectiveError(RuntimeError):
    pass


class CohomologyError(ArithmeticError):
    pass


# Potentials that sit on a wall between chambers: (exponent of the term to
# rotate, phase). Points whose E_W values collide are pushed off the wall by
# rotating that coefficient; the side each integral argument falls on decides
# whether it counts as 0 or 1.
CHAMBER_DIRECTIONS = {
    "bl2": ((-1, -1), -1e-3),
}


@dataclass(frozen=True)
class ArgDivisor:
    raw: tuple[float, ...]
    snapped: tuple[Fraction, ...]
    sides: tuple[str, ...]  # "exact", "below" or "above" (raw relative to snapped)

    def residual(self) -> float:
        return max((abs(r - float(s)) for r, s in zip(self.raw, self.snapped)), default=0.0)


def snap_value(x: float, max_q: int, tol: float) -> Fraction:
    best = None
    for q in range(1, max_q + 1):
        k = min(max(round(x * q), 0), q)
        cand = Fraction(k, q)
        err = abs(x - float(cand))
        if best is None or err < best[0] - 1e-15:
            best = (err, cand)
    if best[0] >= tol:
        raise SnapError(f"argument {x:.6f} has no rational approximation with "
                        f"denominator <= {max_q} within {tol}")
    return best[1]


def _side(raw: float, snapped: Fraction) -> str:
    d = raw - float(snapped)
    if abs(d) < 1e-12:
        return "exact"
    return "above" if d > 0 else "below"


def ray_args(X: ToricSurfaceData, z: Sequence[complex]) -> np.ndarray:
    """Arg(z^{n_rho}) in [0, 1) for every ray."""
    phases = np.angle(np.asarray(z, dtype=complex)) / TWO_PI
    return unit_arg(np.array(X.rays, dtype=float) @ phases)


def arg_divisor(X: ToricSurfaceData, z: Sequence[complex], snap_tol: float = 0.01,
                max_q: int | None = None) -> ArgDivisor:
    raw = ray_args(X, z)
    q = max_q or normalized_volume(X)
    snapped = tuple(snap_value(float(x), q, snap_tol) for x in raw)
    return ArgDivisor(tuple(float(x) for x in raw), snapped,
                      tuple(_side(float(r), s) for r, s in zip(raw, snapped)))


def floor_class(X: ToricSurfaceData, D: ArgDivisor) -> tuple[int, ...]:
    """[D]_Z: exact class in Pic tensor Q, floored coordinate-wise."""
    c = class_of(X, D.snapped)
    return tuple(math.floor(Fraction(x)) for x in c)


def real_cone_weight(X: ToricSurfaceData, D: ArgDivisor | Sequence, sigma: int,
                     exact: bool = True) -> tuple:
    """Linear part on sigma of the fractional divisor D_W(z)."""
    if isinstance(D, ArgDivisor):
        coeffs = D.snapped if exact else tuple(float(x) for x in D.raw)
    else:
        coeffs = tuple(D)
    return cone_weight(X, coeffs, sigma)


@dataclass
class EWEntry:
    index: int
    divisor: ArgDivisor
    cls: tuple[int, ...]
    resolved: bool = False  # True when a wall side decision was applied


def _perturbed_point(sys: LGSystem, t: float, term: int, delta: float, z) -> np.ndarray:
    fam = sys.family
    base = fam.coefficients(t, 0.0)

    def coeffs(lam):
        c = base.copy()
        c[term] = c[term] * np.exp(TWO_PI * 1j * delta * lam)
        return c

    rate = np.zeros(len(base), dtype=complex)
    rate[term] = TWO_PI * 1j * delta

    h = Homotopy(lambda w, lam: sys.F_log(w, coeffs(lam)),
                 lambda w, lam: sys.J_log(w, coeffs(lam)),
                 lambda w, lam: (coeffs(lam) * rate * np.exp(w @ sys.N.T)) @ sys.N,
                 lambda w, lam: term_scale(sys, w, coeffs(lam)))
    samples = track_path(h, np.log(np.asarray(z, dtype=complex)), 0.0, 1.0)
    return np.exp(samples[-1][1])


def ew_table(X: ToricSurfaceData, crit: CriticalSet, snap_tol: float = 0.01) -> list[EWEntry]:
    """E_W at every critical point, with wall crossing resolved where needed."""
    entries = []
    for i, z in enumerate(crit.points):
        D = arg_divisor(X, z, snap_tol)
        entries.append(EWEntry(i, D, floor_class(X, D)))
    collide = _collisions(entries)
    if not collide:
        return entries
    if X.name not in CHAMBER_DIRECTIONS or crit.system is None:
        raise NonInjectiveError(
            f"E_W is not injective on {X.name}: points {sorted(collide)} share a class; "
            "the potential is not inside a chamber")
    exponent, delta = CHAMBER_DIRECTIONS[X.name]
    term = X.ray_index(exponent)
    for i in sorted(collide):
        e = entries[i]
        zp = _perturbed_point(crit.system, crit.t, term, delta, crit.points[i])
        moved = ray_args(X, zp)
        snapped = list(e.divisor.snapped)
        sides = list(e.divisor.sides)
        for r, s in enumerate(snapped):
            if s.denominator == 1:
                snapped[r] = Fraction(1) if 0.5 < moved[r] < 1.0 else Fraction(0)
                sides[r] = "below" if snapped[r] == 1 else "above"
        D = ArgDivisor(e.divisor.raw, tuple(snapped), tuple(sides))
        entries[i] = EWEntry(i, D, floor_class(X, D), True)
    still = _collisions(entries)
    if still:
        raise NonInjectiveError(f"E_W stays non-injective on {X.name} after wall resolution: "
                                f"points {sorted(still)}")
    return entries


def _collisions(entries) -> set[int]:
    seen: dict[tuple, list[int]] = {}
    for e in entries:
        seen.setdefault(e.cls, []).append(e.index)
    return {i for ids in seen.values() if len(ids) > 1 for i in ids}


def ew_map(X: ToricSurfaceData, crit: CriticalSet, z_index: int,
           snap_tol: float = 0.01) -> tuple[int, ...]:
    return ew_table(X, crit, snap_tol)[z_index].cls


def degree(X: ToricSurfaceData, c: Sequence[int]):
    """Degree against -K: intersection on surfaces, else the class-pairing proxy sum(c)."""
    if X.dim == 2:
        K = canonical_class(X)
        return -intersection_number(X, c, K)
    return sum(c)


def order_classes(X: ToricSurfaceData, classes) -> list[tuple[int, ...]]:
    return sorted({tuple(c) for c in classes}, key=lambda c: (degree(X, c), c))


def ew_image(X: ToricSurfaceData, t: float | None = None, crit: CriticalSet | None = None
             ) -> list[tuple[int, ...]]:
    if crit is None:
        crit = critical_set(X, t)
    table = ew_table(X, crit)
    return order_classes(X, [e.cls for e in table])


# ---------------------------------------------------------------------------
# weight identity


@dataclass
class TheoremARow:
    z_index: int
    sigma: int
    E: tuple[int, ...]
    m_w: tuple[int, ...] | None
    m_x: tuple[int, ...]
    end_index: int | None
    base_index: int
    error: str | None = None
    record: MonodromyRecord | None = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return (self.error is None and self.end_index == self.base_index
                and self.m_w is not None
                and all(a + b == 0 for a, b in zip(self.m_w, self.m_x)))

    def to_json(self, X: ToricSurfaceData) -> dict:
        return {"z": self.z_index, "sigma": X.cone_labels[self.sigma], "E": list(self.E),
                "m_w": None if self.m_w is None else list(self.m_w), "m_x": list(self.m_x),
                "end": self.end_index, "pass": self.passed, "error": self.error}


@dataclass
class TheoremAReport:
    surface: str
    t: float
    crit: CriticalSet
    ew: list[EWEntry]
    rows: list[TheoremARow]

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(r.passed for r in self.rows)


def verify_theorem_a(X: ToricSurfaceData, t: float | None = None, orientation: int = -1,
                     ctl: StepControl = StepControl(), crit: CriticalSet | None = None,
                     snap: float = 0.02) -> TheoremAReport:
    """Track gamma(z; sigma) for every critical point z and maximal cone sigma."""
    t = default_t(X) if t is None else t
    if crit is None:
        crit = critical_set(X, t, orientation)
    sys = crit.system
    if sys.family.orientation != orientation:
        sys = LGSystem(sys.family.with_orientation(orientation))
    ew = ew_table(X, crit)
    rows = []
    for e in ew:
        for s in range(len(X.max_cones)):
            m_x = toric_weight(X, e.cls, s)
            loop = loop_for(X, crit, e.index, s, e.cls)
            try:
                path = track(sys, loop, crit, t, ctl)
            except (TrackingError, RuntimeError) as exc:
                rows.append(TheoremARow(e.index, s, e.cls, None, m_x, None,
                                        crit.base_index, f"{type(exc).__name__}: {exc}"))
                continue
            try:
                m_w = monodromy_weight(path, snap)
            except NotLatticeError as exc:
                rows.append(TheoremARow(e.index, s, e.cls, None, m_x, path.end_index,
                                        crit.base_index, f"NotLatticeError: {exc}",
                                        MonodromyRecord(loop, path, ())))
                continue
            rows.append(TheoremARow(e.index, s, e.cls, m_w, m_x, path.end_index,
                                    crit.base_index, None, MonodromyRecord(loop, path, m_w)))
    return TheoremAReport(X.name, t, crit, ew, rows)


# ---------------------------------------------------------------------------
# cohomology of line bundles


def _pn_cohomology(n: int, k: int) -> tuple[int, ...]:
    h = [0] * (n + 1)
    if k >= 0:
        h[0] = math.comb(n + k, n)
    if k <= -n - 1:
        h[n] = math.comb(-k - 1, n)
    return tuple(h)


def _kunneth(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return tuple(out)


def _is_projective_space(X: ToricSurfaceData) -> bool:
    return X.pic_rank == 1 and X.n_rays == X.dim + 1


def surface_cohomology(X: ToricSurfaceData, c: Sequence[int]) -> tuple[int, int, int]:
    """(h0, h1, h2) by lattice points, Serre duality and Riemann-Roch."""
    D = reference_divisor(X, c)
    h0 = len(lattice_points(X, D))
    h2 = len(lattice_points(X, tuple(-1 - d for d in D)))
    K = canonical_class(X)
    twice_chi = 2 + intersection_number(X, c, c) - intersection_number(X, c, K)
    if twice_chi % 2:
        raise CohomologyError(f"odd 2*chi for class {tuple(c)} on {X.name}")
    h1 = h0 + h2 - twice_chi // 2
    if h1 < 0:
        raise CohomologyError(f"negative h1 for class {tuple(c)} on {X.name}")
    return h0, h1, h2


def cohomology(X: ToricSurfaceData, c: Sequence[int]) -> tuple[int, ...]:
    """(h^0, ..., h^n) of the line bundle with class c."""
    c = tuple(int(x) for x in c)
    if X.dim == 2:
        return surface_cohomology(X, c)
    if _is_projective_space(X):
        return _pn_cohomology(X.dim, c[0])
    if X.factors:
        A, B = (build_variety(f) for f in X.factors)
        return _kunneth(cohomology(A, c[:A.pic_rank]), cohomology(B, c[A.pic_rank:]))
    raise NotImplementedError(f"no cohomology engine for {X.name}")


def kunneth_cohomology(X: ToricSurfaceData, c: Sequence[int]) -> tuple[int, ...]:
    """Factor-wise computation for products, used as an independent cross-check."""
    if not X.factors:
        raise ValueError(f"{X.name} is not a product")
    A, B = (build_variety(f) for f in X.factors)
    return _kunneth(cohomology(A, c[:A.pic_rank]), cohomology(B, c[A.pic_rank:]))


@dataclass
class CollectionReport:
    order: list[tuple[int, ...]]
    h: list[list[list[int]]]  # h[i][j][k] = h^i(E_k - E_j)
    rank: int

    @property
    def h0(self):
        return self.h[0]

    @property
    def h1(self):
        return self.h[1] if len(self.h) > 1 else None

    @property
    def h2(self):
        return self.h[2] if len(self.h) > 2 else None

    @property
    def exceptional(self) -> bool:
        m = len(self.order)
        for j in range(m):
            if [self.h[i][j][j] for i in range(len(self.h))] != [1] + [0] * (len(self.h) - 1):
                return False
            for k in range(j + 1, m):
                if any(self.h[i][k][j] for i in range(len(self.h))):
                    return False
        return True

    @property
    def strong(self) -> bool:
        m = len(self.order)
        return self.exceptional and not any(
            self.h[i][j][k] for i in range(1, len(self.h))
            for j in range(m) for k in range(j + 1, m))

    @property
    def rank_full(self) -> bool:
        return len(self.order) == self.rank

    @property
    def passed(self) -> bool:
        return self.strong and self.rank_full

    def verdicts(self) -> dict:
        return {"exceptional": self.exceptional, "strong": self.strong,
                "rank_full": self.rank_full}

    def to_json(self) -> dict:
        out = {"order": [list(c) for c in self.order], "verdicts": self.verdicts()}
        for i, mat in enumerate(self.h):
            out[f"h{i}"] = mat
        return out


def certify_collection(X: ToricSurfaceData, classes: Sequence[Sequence[int]]) -> CollectionReport:
    """Ext^i(E_j, E_k) = H^i(E_k - E_j) for all ordered pairs."""
    order = [tuple(int(x) for x in c) for c in classes]
    m = len(order)
    h = [[[0] * m for _ in range(m)] for _ in range(X.dim + 1)]
    for j in range(m):
        for k in range(m):
            diff = tuple(b - a for a, b in zip(order[j], order[k]))
            for i, v in enumerate(cohomology(X, diff)):
                h[i][j][k] = v
    return CollectionReport(order, h, normalized_volume(X))
