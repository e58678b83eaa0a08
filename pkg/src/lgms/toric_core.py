"""Lattice geometry of smooth toric Fano varieties.

Fans, the divisor class sequence ``0 -> M -> Div_T -> Pic -> 0``, cone-wise
weights of support functions, section polytopes and surface intersection
theory. All integer work is exact.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import intlinalg as la

Vector = tuple[int, ...]
TDivisor = tuple  # one coefficient per ray (int, Fraction or float)
PicClass = tuple  # coordinates in ``pic_basis_labels`` order


class CatalogError(ValueError):
    """Unknown catalog identifier or invalid parameters."""


class NoIntegerSolution(ArithmeticError):
    """A linear system that should be unimodular had no integral solution."""


@dataclass(frozen=True)
class ToricSurfaceData:
    """One catalog variety. Despite the name, ``dim`` may be any n >= 1."""

    name: str
    dim: int
    rays: tuple[Vector, ...]
    max_cones: tuple[tuple[int, ...], ...]
    pic_rank: int
    ray_classes: tuple[Vector, ...]
    pic_basis_labels: tuple[str, ...]
    intersection_matrix: tuple[Vector, ...] | None
    ray_labels: tuple[str, ...]
    cone_labels: tuple[str, ...]
    basis_divisors: tuple[Vector, ...]
    factors: tuple[str, ...] = ()
    # rows of U from the Smith decomposition that project Div_T onto Pic,
    # followed by the fixed change of basis onto the labelled generators
    _quotient: tuple[Vector, ...] = field(default=(), repr=False, compare=False)
    _adapter: tuple[tuple[Fraction, ...], ...] = field(default=(), repr=False, compare=False)

    @property
    def n_rays(self) -> int:
        return len(self.rays)

    def ray_index(self, ray: Sequence[int]) -> int:
        return self.rays.index(tuple(ray))

    def cone_index(self, label: str) -> int:
        return self.cone_labels.index(label)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "rays": [list(r) for r in self.rays],
            "max_cones": [list(c) for c in self.max_cones],
            "pic_rank": self.pic_rank,
            "ray_classes": [list(c) for c in self.ray_classes],
            "pic_basis_labels": list(self.pic_basis_labels),
            "intersection_matrix": (None if self.intersection_matrix is None
                                    else [list(r) for r in self.intersection_matrix]),
            "ray_labels": list(self.ray_labels),
            "cone_labels": list(self.cone_labels),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# ---------------------------------------------------------------------------
# catalog


@dataclass
class _FanSpec:
    rays: list[Vector]
    cones: list[tuple[int, ...]]
    ray_labels: list[str]
    basis_labels: list[str]
    basis_divisors: list[list[int]]
    cone_labels: list[str] | None = None
    factors: tuple[str, ...] = ()


def _unit(n: int, i: int) -> Vector:
    return tuple(int(j == i) for j in range(n))


def _pn_spec(n: int) -> _FanSpec:
    if n < 1:
        raise CatalogError("pn requires n >= 1")
    rays = [_unit(n, i) for i in range(n)] + [tuple([-1] * n)]
    cones = [tuple(c) for c in itertools.combinations(range(n + 1), n)]
    labels = [f"e{i + 1}" for i in range(n)] + ["e0"]
    basis = [[0] * n + [1]]
    return _FanSpec(rays, cones, labels, ["H"], basis)


def _surface_spec(rays, labels, basis_labels, basis_rays, first_cone_label=1):
    """Cyclic fan in the plane: consecutive rays span the maximal cones."""
    k = len(rays)
    cones = [(i, (i + 1) % k) for i in range(k)]
    basis = []
    for combo in basis_rays:
        d = [0] * k
        for r in combo:
            d[rays.index(r)] += 1
        basis.append(d)
    cone_labels = [f"s{i + first_cone_label}" for i in range(k)]
    return _FanSpec(list(rays), cones, list(labels), list(basis_labels), basis, cone_labels)


def _bl_spec(k: int) -> _FanSpec:
    if k == 1:
        return _surface_spec(
            [(1, 0), (0, 1), (-1, 1), (0, -1)],
            ["e1", "e2", "e0", "v0"],
            ["H", "E"],
            [[(0, -1)], [(0, 1)]],
        )
    if k == 2:
        return _surface_spec(
            [(1, 0), (0, 1), (-1, 0), (-1, -1), (0, -1)],
            ["e1", "e2", "n1", "n2", "n3"],
            ["H", "E1", "E2"],
            [[(-1, 0), (-1, -1), (0, -1)], [(-1, 0)], [(0, -1)]],
        )
    if k == 3:
        return _surface_spec(
            [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)],
            ["e1", "n1", "e2", "n2", "n3", "n4"],
            ["H", "E1", "E2", "E3"],
            [[(-1, 0), (-1, -1), (0, -1)], [(-1, 0)], [(0, -1)], [(1, 1)]],
        )
    raise CatalogError(f"bl{k} is not a toric del Pezzo surface")


def _product_spec(a: _FanSpec, b: _FanSpec, name_a: str, name_b: str) -> _FanSpec:
    na, nb = len(a.rays[0]), len(b.rays[0])
    rays = [tuple(r) + (0,) * nb for r in a.rays] + [(0,) * na + tuple(r) for r in b.rays]
    ka = len(a.rays)
    cones = [tuple(ca) + tuple(ka + j for j in cb) for ca in a.cones for cb in b.cones]
    labels = [f"{l}'" for l in a.ray_labels] + [f"{l}''" for l in b.ray_labels]
    basis_labels = [f"{l}_1" for l in a.basis_labels] + [f"{l}_2" for l in b.basis_labels]
    basis = ([list(d) + [0] * len(b.rays) for d in a.basis_divisors]
             + [[0] * ka + list(d) for d in b.basis_divisors])
    return _FanSpec(rays, cones, labels, basis_labels, basis,
                    factors=(name_a, name_b))


def _projbundle_spec(s: int, a: Sequence[int]) -> _FanSpec:
    r = len(a)
    if s < 1 or r < 1:
        raise CatalogError("projbundle needs s >= 1 and at least one twist")
    if any(x < 0 for x in a) or list(a) != sorted(a):
        raise CatalogError("projbundle twists must satisfy 0 <= a_1 <= ... <= a_r")
    if sum(a) > s:
        raise CatalogError(f"projbundle s={s}, a={list(a)} is not Fano (sum a_i > s)")
    n = s + r
    es = [_unit(n, i) for i in range(s)]
    vs = [_unit(n, s + j) for j in range(r)]
    e0 = tuple(-1 if i < s else a[i - s] for i in range(n))
    v0 = tuple(0 if i < s else -1 for i in range(n))
    rays = es + vs + [e0, v0]
    base = list(range(s)) + [s + r]          # e_1..e_s, e_0
    fibre = list(range(s, s + r)) + [s + r + 1]  # v_1..v_r, v_0
    cones = [tuple(sorted(cb + cf)) for cb in itertools.combinations(base, s)
             for cf in itertools.combinations(fibre, r)]
    labels = ([f"e{i + 1}" for i in range(s)] + [f"v{j + 1}" for j in range(r)]
              + ["e0", "v0"])
    k = len(rays)
    basis = [[int(i == s + r) for i in range(k)], [int(i == s + r + 1) for i in range(k)]]
    return _FanSpec(rays, cones, labels, ["piH", "xi"], basis)


def _sort_planar(spec: _FanSpec) -> _FanSpec:
    """Reorder a complete 2d fan counterclockwise from (1, 0)."""
    order = sorted(range(len(spec.rays)),
                   key=lambda i: math.atan2(spec.rays[i][1], spec.rays[i][0]) % (2 * math.pi))
    rays = [spec.rays[i] for i in order]
    k = len(rays)
    cones = [(i, (i + 1) % k) for i in range(k)]
    labels = [spec.ray_labels[i] for i in order]
    basis = [[d[i] for i in order] for d in spec.basis_divisors]
    return _FanSpec(rays, cones, labels, spec.basis_labels, basis,
                    [f"s{i + 1}" for i in range(k)], spec.factors)


def parse_catalog_id(name: str) -> tuple[str, list]:
    """Split a catalog string like ``"pn:3"`` or ``"product:p2,p1"``."""
    name = name.strip()
    head, _, rest = name.partition(":")
    head = head.lower()
    if head == "pn":
        try:
            return head, [int(rest)] if rest else []
        except ValueError as exc:
            raise CatalogError(f"cannot parse pn dimension {rest!r}") from exc
    if head == "product":
        parts = rest.split(",")
        if len(parts) != 2:
            raise CatalogError("product expects two factors, e.g. product:p2,p1")
        return head, parts
    if head == "projbundle":
        kv = {}
        for piece in _split_kv(rest):
            key, _, val = piece.partition("=")
            kv[key] = val
        try:
            s = int(kv["s"])
            a = [int(x) for x in kv["a"].split(",") if x]
        except (KeyError, ValueError) as exc:
            raise CatalogError(f"cannot parse projbundle parameters {rest!r}") from exc
        return head, [s, *a]
    if rest:
        raise CatalogError(f"catalog entry {head!r} takes no parameters")
    return head, []


def _split_kv(rest: str) -> list[str]:
    # "s=1,a=1,2" -> ["s=1", "a=1,2"]
    out: list[str] = []
    for tok in rest.replace(" ", "").split(","):
        if "=" in tok or not out:
            out.append(tok)
        else:
            out[-1] += "," + tok
    return out


def _spec_for(name: str, params: Sequence | None = None) -> tuple[str, _FanSpec]:
    head, parsed = parse_catalog_id(name)
    params = list(params) if params else parsed
    if head == "p1":
        return "p1", _pn_spec(1)
    if head == "p2":
        spec = _pn_spec(2)
        spec.cone_labels = ["s0", "s1", "s2"]
        spec.cones = [(0, 1), (1, 2), (2, 0)]
        return "p2", spec
    if head == "pn":
        if not params:
            raise CatalogError("pn needs a dimension, e.g. pn:3")
        n = int(params[0])
        if n == 1:
            return "p1", _pn_spec(1)
        if n == 2:
            return _spec_for("p2")
        return f"pn:{n}", _pn_spec(n)
    if head == "p1xp1":
        spec = _sort_planar(_product_spec(_pn_spec(1), _pn_spec(1), "p1", "p1"))
        return "p1xp1", spec
    if head in ("bl1", "bl2", "bl3"):
        return head, _bl_spec(int(head[2]))
    if head == "product":
        na, sa = _spec_for(params[0])
        nb, sb = _spec_for(params[1])
        spec = _product_spec(sa, sb, na, nb)
        if len(spec.rays[0]) == 2:
            spec = _sort_planar(spec)
        return f"product:{na},{nb}", spec
    if head == "projbundle":
        s, *a = (int(x) for x in params)
        spec = _projbundle_spec(s, a)
        if len(spec.rays[0]) == 2:
            spec = _sort_planar(spec)
        return f"projbundle:s={s},a={','.join(map(str, a))}", spec
    raise CatalogError(f"unknown catalog entry {name!r}")


CATALOG_NAMES = ("p1", "p2", "pn:3", "p1xp1", "bl1", "bl2", "bl3",
                 "product:p2,p1", "projbundle:s=1,a=1")
DEL_PEZZO = ("p2", "p1xp1", "bl1", "bl2", "bl3")


def build_variety(name: str, params: Sequence | None = None) -> ToricSurfaceData:
    """Build a catalog variety with its Picard data computed from the fan."""
    canonical, spec = _spec_for(name, params)
    n = len(spec.rays[0])
    k = len(spec.rays)
    for cone in spec.cones:
        det = la.determinant([spec.rays[i] for i in cone])
        if abs(det) != 1:
            raise CatalogError(f"{canonical}: cone {cone} is not smooth (det {det})")
    # cokernel of m -> (<m, n_rho>)_rho via Smith normal form
    S, U, _ = la.smith_normal_form([list(r) for r in spec.rays])
    if any(S[i][i] != 1 for i in range(n)):
        raise CatalogError(f"{canonical}: Pic has torsion or fan is degenerate")
    quotient = [U[i] for i in range(n, k)]
    rho = k - n
    B = la.transpose([la.matvec(quotient, d) for d in spec.basis_divisors])
    adapter = la.inverse_rational(B)
    if adapter is None or abs(la.determinant(B)) != 1:
        raise CatalogError(f"{canonical}: basis divisors do not generate Pic")
    ray_classes = []
    for i in range(k):
        q = la.matvec(quotient, [int(j == i) for j in range(k)])
        ray_classes.append(la.as_integers(la.matvec(adapter, q)))

    inter = None
    if n == 2:
        R = _ray_intersections(spec.rays, spec.cones)
        G = [list(d) for d in spec.basis_divisors]
        inter = tuple(tuple(int(x) for x in row)
                      for row in la.matmul(G, la.matmul(R, la.transpose(G))))

    cone_labels = spec.cone_labels or [f"s{i + 1}" for i in range(len(spec.cones))]
    return ToricSurfaceData(
        name=canonical,
        dim=n,
        rays=tuple(tuple(r) for r in spec.rays),
        max_cones=tuple(tuple(c) for c in spec.cones),
        pic_rank=rho,
        ray_classes=tuple(ray_classes),
        pic_basis_labels=tuple(spec.basis_labels),
        intersection_matrix=inter,
        ray_labels=tuple(spec.ray_labels),
        cone_labels=tuple(cone_labels),
        basis_divisors=tuple(tuple(d) for d in spec.basis_divisors),
        factors=spec.factors,
        _quotient=tuple(tuple(r) for r in quotient),
        _adapter=tuple(tuple(r) for r in adapter),
    )


def _ray_intersections(rays, cones) -> list[list[int]]:
    """Intersection numbers of the toric boundary curves of a smooth surface.

    Neighbouring rays meet once; D_i^2 = -a_i where n_{i-1} + n_{i+1} = a_i n_i.
    """
    k = len(rays)
    R = [[0] * k for _ in range(k)]
    nbrs: dict[int, list[int]] = {i: [] for i in range(k)}
    for a, b in cones:
        R[a][b] = R[b][a] = 1
        nbrs[a].append(b)
        nbrs[b].append(a)
    for i in range(k):
        p, q = nbrs[i]
        s = (rays[p][0] + rays[q][0], rays[p][1] + rays[q][1])
        # s = a * n_i exactly for a smooth complete fan
        x, y = rays[i]
        a = Fraction(s[0], x) if x else Fraction(s[1], y)
        if (a * x, a * y) != s or a.denominator != 1:
            raise CatalogError("fan is not smooth complete; cannot form self-intersection")
        R[i][i] = -int(a)
    return R


# ---------------------------------------------------------------------------
# divisor classes and weights


def class_of(X: ToricSurfaceData, D: Sequence) -> PicClass:
    """Class in Pic of a T-divisor, in the labelled basis.

    Rational (or float) coefficients are pushed to Pic tensor Q (resp. R).
    """
    if len(D) != X.n_rays:
        raise ValueError(f"divisor has {len(D)} coefficients, expected {X.n_rays}")
    if all(isinstance(x, float) for x in D):
        q = la.matvec(X._quotient, D)
        return tuple(float(x) for x in la.matvec(X._adapter, q))
    q = la.matvec(X._quotient, [Fraction(x) for x in D])
    c = la.matvec(X._adapter, q)
    ints = la.as_integers(c)
    return ints if ints is not None else tuple(c)


def principal_divisor(X: ToricSurfaceData, m: Sequence[int]) -> TDivisor:
    """div(z^m) = sum <m, n_rho> V_rho."""
    return tuple(sum(a * b for a, b in zip(m, r)) for r in X.rays)


def anticanonical_divisor(X: ToricSurfaceData) -> TDivisor:
    return tuple([1] * X.n_rays)


def canonical_class(X: ToricSurfaceData) -> PicClass:
    return class_of(X, tuple([-1] * X.n_rays))


def _cone_system(X: ToricSurfaceData, sigma: int):
    cone = X.max_cones[sigma]
    return cone, [list(X.rays[i]) for i in cone]


def cone_weight(X: ToricSurfaceData, D: Sequence, sigma: int) -> tuple:
    """Linear part m(D; sigma) of the support function of D on a maximal cone.

    Solves <m, n_rho> = D_rho over the rays of sigma. Integer divisors give
    integer weights (smooth cones are unimodular).
    """
    cone, A = _cone_system(X, sigma)
    rhs = [D[i] for i in cone]
    if all(isinstance(x, float) for x in rhs):
        import numpy as np
        return tuple(float(x) for x in np.linalg.solve(np.array(A, float), np.array(rhs)))
    sol = la.solve_rational(A, rhs)
    ints = la.as_integers(sol)
    return ints if ints is not None else tuple(sol)


def complement_rays(X: ToricSurfaceData, sigma: int) -> list[int]:
    cone = set(X.max_cones[sigma])
    return [i for i in range(X.n_rays) if i not in cone]


def _divisor_supported_on(X: ToricSurfaceData, E: Sequence[int], support: list[int]) -> TDivisor:
    if len(support) != X.pic_rank:
        raise ValueError("support size must equal the Picard rank")
    C = la.transpose([X.ray_classes[i] for i in support])
    sol = la.solve_rational(C, list(E))
    if sol is None:
        raise NoIntegerSolution(f"classes of rays {support} do not span Pic")
    ints = la.as_integers(sol)
    if ints is None:
        raise NoIntegerSolution(f"class {tuple(E)} has no integral representative on {support}")
    D = [0] * X.n_rays
    for i, a in zip(support, ints):
        D[i] = a
    return tuple(D)


def divisor_off_cone(X: ToricSurfaceData, E: Sequence[int], sigma: int) -> TDivisor:
    """The unique T-divisor of class E whose coefficients vanish on the rays of sigma."""
    return _divisor_supported_on(X, E, complement_rays(X, sigma))


def standard_basis_rays(X: ToricSurfaceData) -> list[int]:
    return [X.ray_index(_unit(X.dim, i)) for i in range(X.dim)]


def reference_divisor(X: ToricSurfaceData, E: Sequence[int]) -> TDivisor:
    """Representative of E vanishing on the rays e_1, ..., e_n.

    This is the fixed representative whose cone weights define m_X(E; sigma).
    """
    basis = set(standard_basis_rays(X))
    return _divisor_supported_on(X, E, [i for i in range(X.n_rays) if i not in basis])


def toric_weight(X: ToricSurfaceData, E: Sequence[int], sigma: int) -> tuple[int, ...]:
    """m_X(E; sigma): weight of the reference representative of E on sigma."""
    return cone_weight(X, reference_divisor(X, E), sigma)


@dataclass(frozen=True)
class GluingReport:
    divisor: TDivisor | None
    violations: tuple[tuple[int, int, int], ...]  # (ray, cone_a, cone_b)

    @property
    def ok(self) -> bool:
        return not self.violations


def weights_to_support_function(X: ToricSurfaceData, weights: Sequence[Sequence]) -> GluingReport:
    """Glue cone-wise linear functionals into a T-divisor, or report mismatches."""
    if len(weights) != len(X.max_cones):
        raise ValueError("need one weight per maximal cone")
    values: dict[int, list[tuple[int, object]]] = {i: [] for i in range(X.n_rays)}
    for s, cone in enumerate(X.max_cones):
        for i in cone:
            v = sum(Fraction(a) * b for a, b in zip(weights[s], X.rays[i]))
            values[i].append((s, v))
    violations = []
    coeffs = []
    for i in range(X.n_rays):
        s0, v0 = values[i][0]
        for s, v in values[i][1:]:
            if v != v0:
                violations.append((i, s0, s))
        coeffs.append(v0)
    if violations:
        return GluingReport(None, tuple(violations))
    ints = la.as_integers(coeffs)
    return GluingReport(ints if ints is not None else tuple(coeffs), ())


# ---------------------------------------------------------------------------
# polytopes and volumes


def lattice_points(X: ToricSurfaceData, D: Sequence[int]) -> list[Vector]:
    """Lattice points of the section polytope {m : <m, n_rho> >= -D_rho}."""
    n = X.dim
    rays = X.rays
    verts = []
    for subset in itertools.combinations(range(X.n_rays), n):
        A = [list(rays[i]) for i in subset]
        m = la.solve_rational(A, [-D[i] for i in subset])
        if m is None:
            continue
        if all(sum(a * b for a, b in zip(m, r)) >= -d for r, d in zip(rays, D)):
            verts.append(m)
    if not verts:
        return []
    lo = [math.ceil(min(v[j] for v in verts)) for j in range(n)]
    hi = [math.floor(max(v[j] for v in verts)) for j in range(n)]
    pts = []
    for m in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        if all(sum(a * b for a, b in zip(m, r)) >= -d for r, d in zip(rays, D)):
            pts.append(tuple(m))
    return pts


def normalized_volume(X: ToricSurfaceData) -> int:
    """n! times the volume of the polar polytope, summed over its cone simplices."""
    return sum(abs(int(la.determinant([X.rays[i] for i in cone]))) for cone in X.max_cones)


def intersection_number(X: ToricSurfaceData, c1: Sequence, c2: Sequence):
    if X.intersection_matrix is None:
        raise ValueError(f"{X.name} is not a surface; no intersection pairing")
    M = X.intersection_matrix
    total = sum(Fraction(c1[i]) * M[i][j] * Fraction(c2[j])
                for i in range(X.pic_rank) for j in range(X.pic_rank))
    return int(total) if total.denominator == 1 else total
