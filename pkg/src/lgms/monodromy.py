"""Coefficient loops gamma(z; sigma), path tracking and monodromy weights."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .continuation import Homotopy, StepControl, track_path
from .critsolve import CriticalSet, arg, offset_set, term_scale
from .laurent import LGSystem
from .toric_core import ToricSurfaceData, divisor_off_cone

TWO_PI = 2.0 * np.pi


class EndpointUnmatched(RuntimeError):
    pass


class NotLatticeError(ValueError):
    """The lifted endpoint is not within the snap tolerance of a lattice point."""


class CollisionError(RuntimeError):
    """Two tracked points ended on the same critical point."""


@dataclass(frozen=True)
class LoopSpec:
    windings: tuple[int, ...]
    source_index: int
    cone_index: int | None = None

    def to_json(self) -> dict:
        return {"windings": list(self.windings), "source": self.source_index,
                "sigma": self.cone_index}


@dataclass
class ArgPath:
    thetas: np.ndarray          # (S,)
    points: np.ndarray          # (S, n) complex
    lifted: np.ndarray          # (S, n) real
    start_index: int
    end_index: int

    @property
    def displacement(self) -> np.ndarray:
        return self.lifted[-1] - self.lifted[0]

    @property
    def max_jump(self) -> float:
        if len(self.lifted) < 2:
            return 0.0
        return float(np.max(np.abs(np.diff(self.lifted, axis=0))))

    def downsample(self, limit: int = 512) -> "ArgPath":
        if len(self.thetas) <= limit:
            return self
        idx = np.unique(np.linspace(0, len(self.thetas) - 1, limit).round().astype(int))
        return ArgPath(self.thetas[idx], self.points[idx], self.lifted[idx],
                       self.start_index, self.end_index)

    def to_json(self, limit: int = 512) -> dict:
        p = self.downsample(limit)
        return {"theta": p.thetas.tolist(), "lifted": p.lifted.tolist(),
                "start": self.start_index, "end": self.end_index}

    def write_csv(self, fh, label: str = "") -> None:
        n = self.points.shape[1]
        w = csv.writer(fh)
        for th, z, lift in zip(self.thetas, self.points, self.lifted):
            row = [label, f"{th:.12g}"]
            for k in range(n):
                row += [f"{z[k].real:.12g}", f"{z[k].imag:.12g}"]
            row += [f"{x:.12g}" for x in lift]
            w.writerow(row)


@dataclass
class MonodromyRecord:
    loop: LoopSpec
    path: ArgPath
    weight: tuple[int, ...]
    permutation_entry: tuple[int, int] = field(init=False)

    def __post_init__(self):
        self.permutation_entry = (self.path.start_index, self.path.end_index)


def loop_for(X: ToricSurfaceData, crit: CriticalSet, z_index: int, sigma: int,
             E: Sequence[int]) -> LoopSpec:
    """Windings of gamma(z; sigma): coefficients of the representative of E off sigma."""
    D = divisor_off_cone(X, E, sigma)
    return LoopSpec(tuple(int(x) for x in D), z_index, sigma)


def reverse_loop(loop: LoopSpec, source_index: int | None = None) -> LoopSpec:
    """The same loop traversed backwards (negated windings)."""
    src = loop.source_index if source_index is None else source_index
    return LoopSpec(tuple(-w for w in loop.windings), src, loop.cone_index)


def _loop_homotopy(sys: LGSystem, windings, t: float, offset=None) -> tuple[LGSystem, Homotopy]:
    looped = LGSystem(sys.family.with_windings(windings))
    fam = looped.family
    off = None if offset is None else np.asarray(offset, dtype=complex)

    def F(w, th):
        return looped.F_log(w, fam.coefficients(t, th), off)

    def J(w, th):
        return looped.J_log(w, fam.coefficients(t, th))

    def dF(w, th):
        return looped.dF_dtheta_log(w, fam.coefficients(t, th))

    def scale(w, th):
        return term_scale(looped, w, fam.coefficients(t, th))

    return looped, Homotopy(F, J, dF, scale)


def match_point(crit: CriticalSet, z: np.ndarray, rel: float = 1e-6) -> int:
    k = crit.index_of(z, rel)
    if k is None:
        d = np.max(np.abs(crit.points - z[None, :]), axis=1)
        raise EndpointUnmatched(f"endpoint {z} is not a known critical point "
                                f"(nearest distance {d.min():.3e})")
    return k


def track(sys: LGSystem, loop: LoopSpec, crit: CriticalSet, t: float | None = None,
          ctl: StepControl = StepControl(), offset=None, match_rel: float = 1e-6) -> ArgPath:
    """Continue crit.points[loop.source_index] around the loop, theta from 0 to 1.

    The lift starts at Arg(z) in [0, 1) and follows Im(log z) / 2 pi.
    """
    t = crit.t if t is None else t
    if offset is None and crit.offset is not None:
        offset = crit.offset
    _, h = _loop_homotopy(sys, loop.windings, t, offset)
    z0 = crit.points[loop.source_index]
    w0 = np.log(np.abs(z0)) + TWO_PI * 1j * arg(z0)
    samples = track_path(h, w0, 0.0, 1.0, ctl)
    thetas = np.array([s[0] for s in samples])
    ws = np.array([s[1] for s in samples])
    points = np.exp(ws)
    lifted = ws.imag / TWO_PI
    end = match_point(crit, points[-1], match_rel)
    return ArgPath(thetas, points, lifted, loop.source_index, end)


def monodromy_weight(path: ArgPath, snap: float = 0.02) -> tuple[int, ...]:
    end = path.lifted[-1]
    m = np.rint(end)
    if np.max(np.abs(end - m)) >= snap:
        raise NotLatticeError(f"lifted endpoint {end} is not within {snap} of a lattice point")
    return tuple(int(x) for x in m)


def monodromy_record(sys: LGSystem, loop: LoopSpec, crit: CriticalSet, t=None,
                     ctl: StepControl = StepControl(), snap: float = 0.02) -> MonodromyRecord:
    path = track(sys, loop, crit, t, ctl)
    return MonodromyRecord(loop, path, monodromy_weight(path, snap))


def monodromy_permutation(sys: LGSystem, loop: LoopSpec | Sequence[int], crit: CriticalSet,
                          t: float | None = None, ctl: StepControl = StepControl()) -> list[int]:
    """Image index of every critical point under continuation along the loop."""
    windings = loop.windings if isinstance(loop, LoopSpec) else tuple(loop)
    perm = []
    for i in range(len(crit)):
        perm.append(track(sys, LoopSpec(windings, i), crit, t, ctl).end_index)
    if len(set(perm)) != len(perm):
        raise CollisionError(f"monodromy is not a bijection: {perm}; "
                             "the loop passes at or near the discriminant")
    return perm


def offset_equivariance_check(sys: LGSystem, loop: LoopSpec | Sequence[int], crit: CriticalSet,
                              a: Sequence[float], t: float | None = None,
                              ctl: StepControl = StepControl()) -> bool:
    """Monodromy on Crit_a(W) agrees with monodromy on Crit(W) under the offset correspondence."""
    t = crit.t if t is None else t
    base_perm = monodromy_permutation(sys, loop, crit, t, ctl)
    shifted = offset_set(sys, t, a, crit, ctl)
    return monodromy_permutation(sys, loop, shifted, t, ctl) == base_perm
