"""Laurent polynomial families W_{t,theta} and their logarithmic critical systems."""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .toric_core import ToricSurfaceData

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Term:
    exponent: tuple[int, ...]
    base_coeff: complex = 1.0
    t_rate: float = 0.0
    winding: int = 0

    def coeff(self, t: float, theta: float, orientation: int = -1) -> complex:
        # theta only matters mod 1 since windings are integers
        phase = orientation * self.winding * (theta % 1.0)
        return complex(self.base_coeff) * np.exp(-t * self.t_rate) * cmath.exp(TWO_PI * 1j * phase)

    def to_json(self) -> dict:
        c = complex(self.base_coeff)
        return {"exponent": list(self.exponent), "re": c.real, "im": c.imag,
                "t_rate": self.t_rate, "winding": self.winding}

    @classmethod
    def from_json(cls, d: dict) -> "Term":
        return cls(tuple(d["exponent"]), complex(d["re"], d["im"]),
                   float(d["t_rate"]), int(d["winding"]))


@dataclass(frozen=True)
class LaurentFamily:
    """sum_e c_e exp(-t r_e) exp(2 pi i o w_e theta) z^e, o = ``orientation``."""

    terms: tuple[Term, ...]
    orientation: int = -1

    def __post_init__(self):
        if self.orientation not in (-1, 1):
            raise ValueError("orientation must be +1 or -1")
        dims = {len(term.exponent) for term in self.terms}
        if len(dims) != 1:
            raise ValueError("all exponents must have the same length")

    @property
    def dim(self) -> int:
        return len(self.terms[0].exponent)

    @property
    def exponents(self) -> np.ndarray:
        return np.array([term.exponent for term in self.terms], dtype=float)

    @property
    def windings(self) -> np.ndarray:
        return np.array([term.winding for term in self.terms], dtype=float)

    def coefficients(self, t: float, theta: float = 0.0) -> np.ndarray:
        return np.array([term.coeff(t, theta, self.orientation) for term in self.terms])

    def with_windings(self, windings: Sequence[int]) -> "LaurentFamily":
        if len(windings) != len(self.terms):
            raise ValueError("need one winding per term")
        return replace(self, terms=tuple(replace(term, winding=int(w))
                                         for term, w in zip(self.terms, windings)))

    def with_orientation(self, orientation: int) -> "LaurentFamily":
        return replace(self, orientation=int(orientation))

    def with_phase(self, index: int, delta: float) -> "LaurentFamily":
        """Rotate one base coefficient by exp(2 pi i delta)."""
        terms = list(self.terms)
        term = terms[index]
        terms[index] = replace(term, base_coeff=complex(term.base_coeff)
                               * cmath.exp(TWO_PI * 1j * delta))
        return replace(self, terms=tuple(terms))

    def __call__(self, z: Sequence[complex], t: float, theta: float = 0.0) -> complex:
        z = np.asarray(z, dtype=complex)
        mono = np.prod(z[None, :] ** self.exponents, axis=1)
        return complex(np.sum(self.coefficients(t, theta) * mono))

    def to_json(self) -> dict:
        return {"orientation": self.orientation, "terms": [t.to_json() for t in self.terms]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, d: dict) -> "LaurentFamily":
        return cls(tuple(Term.from_json(x) for x in d["terms"]), int(d.get("orientation", -1)))


# exponents of the terms carrying exp(-t); everything else has coefficient 1
_DAMPED = {
    "bl1": {(-1, 1)},
    "bl2": {(1, 0), (0, 1)},
}


def _damped_rays(X: ToricSurfaceData) -> set[tuple[int, ...]]:
    if X.name in _DAMPED:
        return _DAMPED[X.name]
    if X.name.startswith("projbundle"):
        return {X.rays[X.ray_labels.index("e0")]}
    return set()


def default_t(X: ToricSurfaceData) -> float:
    return 8.0 if _damped_rays(X) else 0.0


def lg_potential(X: ToricSurfaceData, t: float | None = None,
                 orientation: int = -1) -> LaurentFamily:
    """The mirror potential of X: one monomial per ray, in ray order."""
    damped = _damped_rays(X)
    terms = tuple(Term(tuple(r), 1.0, 1.0 if tuple(r) in damped else 0.0, 0) for r in X.rays)
    return LaurentFamily(terms, orientation)


class ZeroCoordinateError(ValueError):
    """Evaluation at a point of C^n outside the torus."""


@dataclass(frozen=True)
class LGSystem:
    """f_i(z) = z_i dW/dz_i - a_i, with helpers in logarithmic coordinates w = log z.

    In w the system reads F(w) = N^T (c * exp(N w)) - a where N stacks the
    exponents; the Jacobian is N^T diag(c * exp(N w)) N.
    """

    family: LaurentFamily

    @property
    def dim(self) -> int:
        return self.family.dim

    @property
    def N(self) -> np.ndarray:
        return self.family.exponents

    # ---- z coordinates
    def evaluate(self, z: Sequence[complex], t: float = 0.0, theta: float = 0.0,
                 offset: Sequence[float] | None = None) -> np.ndarray:
        z = np.asarray(z, dtype=complex).reshape(-1)
        if np.any(z == 0):
            raise ZeroCoordinateError(f"coordinate vanishes at {z}")
        N = self.N
        mono = self.family.coefficients(t, theta) * np.prod(z[None, :] ** N, axis=1)
        f = N.T @ mono
        if offset is not None:
            f = f - np.asarray(offset, dtype=complex)
        return f

    def jacobian(self, z: Sequence[complex], t: float = 0.0, theta: float = 0.0) -> np.ndarray:
        """dF_i/dz_j = sum_e c_e e_i e_j z^e / z_j."""
        z = np.asarray(z, dtype=complex).reshape(-1)
        if np.any(z == 0):
            raise ZeroCoordinateError(f"coordinate vanishes at {z}")
        N = self.N
        mono = self.family.coefficients(t, theta) * np.prod(z[None, :] ** N, axis=1)
        return (N.T * mono) @ N / z[None, :]

    # ---- log coordinates, vectorised over a batch of points (rows of w)
    def F_log(self, w: np.ndarray, coeffs: np.ndarray, offset=None) -> np.ndarray:
        mono = coeffs * np.exp(w @ self.N.T)
        f = mono @ self.N
        if offset is not None:
            f = f - np.asarray(offset, dtype=complex)
        return f

    def J_log(self, w: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
        mono = coeffs * np.exp(w @ self.N.T)
        N = self.N
        return np.einsum("...k,ki,kj->...ij", mono, N, N)

    def dF_dtheta_log(self, w: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
        rate = TWO_PI * 1j * self.family.orientation * self.family.windings
        mono = coeffs * rate * np.exp(w @ self.N.T)
        return mono @ self.N


def lg_system(W: LaurentFamily) -> LGSystem:
    return LGSystem(W)
