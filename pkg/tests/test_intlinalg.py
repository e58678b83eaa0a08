from fractions import Fraction

import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from lgms import intlinalg as la

small = st.integers(-6, 6)


def matrices(rows, cols):
    return st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


@given(st.integers(1, 4).flatmap(lambda m: st.integers(1, 4).flatmap(lambda n: matrices(m, n))))
@settings(max_examples=150, deadline=None)
def test_smith_form_is_certified(A):
    S, U, V = la.smith_normal_form(A)
    assert la.matmul(la.matmul(U, A), V) == S
    assert abs(la.determinant(U)) == 1 and abs(la.determinant(V)) == 1
    d = [S[i][i] for i in range(min(len(S), len(S[0])))]
    assert all(S[i][j] == 0 for i in range(len(S)) for j in range(len(S[0])) if i != j)
    assert all(x >= 0 for x in d)
    nz = [x for x in d if x]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert d[:len(nz)] == nz


@given(st.integers(1, 4).flatmap(lambda n: matrices(n, n)))
@settings(max_examples=100, deadline=None)
def test_determinant_and_solve_against_sympy(A):
    M = sympy.Matrix(A)
    assert la.determinant(A) == Fraction(int(M.det()))
    b = list(range(1, len(A) + 1))
    x = la.solve_rational(A, b)
    if M.det() == 0:
        assert x is None
    else:
        assert la.matvec(A, x) == b


def test_smith_form_of_p2_rays():
    S, _, _ = la.smith_normal_form([[1, 0], [0, 1], [-1, -1]])
    assert [S[0][0], S[1][1]] == [1, 1]
