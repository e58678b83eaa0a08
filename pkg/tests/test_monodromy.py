import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import crit, variety
from lgms.continuation import StepControl
from lgms.hmscheck import ew_table, real_cone_weight, arg_divisor
from lgms.monodromy import (LoopSpec, NotLatticeError, loop_for, monodromy_permutation,
                            monodromy_record, monodromy_weight, offset_equivariance_check,
                            reverse_loop, track)

# index conventions at the default deformation: p2 z^k has Arg (k/3, k/3);
# bl1 index 1 sits at Arg (1/4, 1/2) and index 3 at (3/4, 1/2)
P2_Z1, BL1_Z10, BL1_Z11 = 1, 1, 3


def test_p2_loop_windings():
    X, C = variety("p2"), crit("p2")
    assert X.max_cones[0] == (0, 1)
    assert loop_for(X, C, P2_Z1, 0, (1,)).windings == (0, 0, 1)


@pytest.mark.parametrize("name", ["p2", "bl1", "bl3"])
def test_base_point_loop_is_constant(name):
    X, C = variety(name), crit(name)
    for s in range(len(X.max_cones)):
        loop = loop_for(X, C, C.base_index, s, (0,) * X.pic_rank)
        assert set(loop.windings) == {0}


def test_bl1_loop_windings():
    X, C = variety("bl1"), crit("bl1")
    assert X.cone_labels[2] == "s3"
    assert list(X.pic_basis_labels) == ["H", "E"]
    loop = loop_for(X, C, BL1_Z11, 2, (2, -1))  # 2H - E
    assert loop.windings == (2, 1, 0, 0)
    assert X.rays[0] == (1, 0) and X.rays[1] == (0, 1)


def test_p2_track_stays_on_diagonal():
    X, C = variety("p2"), crit("p2")
    path = track(C.system, loop_for(X, C, P2_Z1, 0, (1,)), C)
    assert np.max(np.abs(path.lifted[:, 0] - path.lifted[:, 1])) < 1e-9
    assert np.allclose(path.lifted[-1], [0, 0], atol=1e-9)
    assert path.end_index == C.base_index
    # z^3 = e^{2 pi i theta}: the argument drops linearly by theta/3 under our phase sign
    assert np.allclose(path.lifted[:, 0], 1 / 3 - path.thetas / 3, atol=1e-9)


def test_bl1_track_on_line():
    X, C = variety("bl1"), crit("bl1")
    E = ew_table(X, C)[BL1_Z10].cls
    path = track(C.system, loop_for(X, C, BL1_Z10, 0, E), C)
    assert np.max(np.abs(2 * path.lifted[:, 0] - path.lifted[:, 1])) < 0.01
    assert np.allclose(path.lifted[-1], [0, 0], atol=0.02)
    assert path.end_index == C.base_index


def test_constant_loop():
    C = crit("bl3")
    path = track(C.system, LoopSpec((0,) * 6, C.base_index), C)
    assert np.all(path.points == path.points[0])
    assert np.all(path.lifted == path.lifted[0])
    assert path.end_index == C.base_index
    assert monodromy_weight(path) == (0, 0)


def test_weight_fixtures():
    X, C = variety("p2"), crit("p2")
    rec = monodromy_record(C.system, loop_for(X, C, P2_Z1, 1, (1,)), C)
    assert rec.weight == (1, 0)
    assert rec.permutation_entry == (P2_Z1, C.base_index)
    X, C = variety("bl1"), crit("bl1")
    rec = monodromy_record(C.system, loop_for(X, C, BL1_Z11, 2, (2, -1)), C)
    assert rec.weight == (2, 1)


def test_not_lattice():
    # z^2 taken once around the 1/(z1 z2) loop stops at z^1, off the lattice
    C = crit("p2")
    path = track(C.system, LoopSpec((0, 0, 1), 2), C)
    assert path.end_index == P2_Z1
    with pytest.raises(NotLatticeError):
        monodromy_weight(path)


def test_permutations():
    X, C = variety("p2"), crit("p2")
    assert monodromy_permutation(C.system, (0, 0, 0), C) == [0, 1, 2]
    perm = monodromy_permutation(C.system, loop_for(X, C, P2_Z1, 0, (1,)), C)
    assert perm[P2_Z1] == C.base_index
    assert sorted(perm) == [0, 1, 2]


@pytest.mark.parametrize("name,windings", [("p2", (1, 0, 0)), ("p2", (0, 2, 1)),
                                           ("bl3", (1, 0, 0, 1, 0, 0)),
                                           ("bl1", (2, 1, 0, 0))])
def test_reverse_loop_inverts(name, windings):
    C = crit(name)
    fwd = monodromy_permutation(C.system, windings, C)
    back = monodromy_permutation(C.system, tuple(-w for w in windings), C)
    assert [back[fwd[i]] for i in range(len(C))] == list(range(len(C)))


@pytest.mark.parametrize("name", ["p2", "bl1", "bl3"])
def test_reverse_loop_negates_displacement(name):
    X, C = variety(name), crit(name)
    for e in ew_table(X, C):
        for s in range(len(X.max_cones)):
            loop = loop_for(X, C, e.index, s, e.cls)
            p = track(C.system, loop, C)
            q = track(C.system, reverse_loop(loop, p.end_index), C)
            assert q.end_index == e.index
            assert np.allclose(q.displacement, -p.displacement, atol=1e-6)


P1_PLUS = (0, 1)   # gamma_+ winds the 1/z term
P1_MINUS = (1, 0)


def test_p1_monodromies_swap():
    C = crit("p1")
    assert monodromy_permutation(C.system, P1_PLUS, C) == [1, 0]
    assert monodromy_permutation(C.system, P1_MINUS, C) == [1, 0]


@pytest.mark.parametrize("name,loop,a", [("p1", P1_PLUS, [0.05]), ("p1", P1_MINUS, [0.05]),
                                         ("p1", P1_PLUS, [0.0]),
                                         ("p2", (0, 0, 1), [0.05, 0.0]),
                                         ("p2", (1, 0, 0), [0.03, -0.04])])
def test_offset_equivariance(name, loop, a):
    C = crit(name)
    assert offset_equivariance_check(C.system, loop, C, a)


@pytest.mark.parametrize("name", ["p2", "bl1", "bl3", "p1xp1"])
def test_refinement_stability(name):
    X, C = variety(name), crit(name)
    fine = StepControl(max_step=0.025, initial_step=5e-3)
    for e in ew_table(X, C):
        for s in range(len(X.max_cones)):
            loop = loop_for(X, C, e.index, s, e.cls)
            a = monodromy_record(C.system, loop, C)
            b = monodromy_record(C.system, loop, C, ctl=fine)
            assert a.weight == b.weight and a.permutation_entry == b.permutation_entry


@pytest.mark.parametrize("name", ["p2", "bl1", "bl3"])
def test_slope_matches_real_weight(name):
    X, C = variety(name), crit(name)
    for e in ew_table(X, C):
        D = arg_divisor(X, C.points[e.index])
        for s in range(len(X.max_cones)):
            p = track(C.system, loop_for(X, C, e.index, s, e.cls), C)
            m = np.array(real_cone_weight(X, D, s, exact=False), dtype=float)
            assert np.allclose(p.lifted[0] - p.lifted[-1], m, atol=0.05)


def test_path_serialisation():
    X, C = variety("p2"), crit("p2")
    p = track(C.system, loop_for(X, C, 2, 1, (2,)), C)
    d = p.to_json(8)
    assert len(d["theta"]) <= 8 and d["start"] == 2 and d["end"] == C.base_index
    buf = io.StringIO()
    p.write_csv(buf, "x")
    rows = buf.getvalue().strip().splitlines()
    assert len(rows) == len(p.thetas) and len(rows[0].split(",")) == 2 + 4 + 2
    assert p.max_jump < 0.25


@given(st.lists(st.integers(-2, 2), min_size=3, max_size=3))
@settings(max_examples=15, deadline=None)
def test_p2_permutation_is_bijection(windings):
    C = crit("p2")
    perm = monodromy_permutation(C.system, tuple(windings), C)
    assert sorted(perm) == [0, 1, 2]
    # on P2 every loop acts by the rotation z -> omega^k z with k the total winding
    k = (-sum(windings)) % 3
    assert perm == [(i + k) % 3 for i in range(3)]
