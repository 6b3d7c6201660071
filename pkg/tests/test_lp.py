from fractions import Fraction as F

import numpy as np
from hypothesis import given, settings, strategies as st

from diagforge.lp import solve_feasibility
from oracles import vertex_feasible


def test_feasible_point():
    res = solve_feasibility([[1, 1], [1, -1]], [2, 0])
    assert res.feasible and res.x == [1, 1]


def test_inconsistent_system_certificate():
    res = solve_feasibility([[1, 1], [1, 1]], [1, 2])
    assert not res.feasible
    cert = res.certificate
    assert cert.verify() and cert.pairing > 0


def test_sign_flip_rows():
    res = solve_feasibility([[1, -1]], [-1])
    assert res.feasible and res.x[1] - res.x[0] == 1


def test_negative_orthant():
    res = solve_feasibility([[1, 1]], [-1])
    assert not res.feasible
    assert res.certificate.to_json()["pairing"] == "1/1"


def test_degenerate_cycling_prone():
    # Beale-style degenerate instance; Bland's rule must terminate.
    A = [[F(1, 4), -8, -1, 9, 1, 0, 0], [F(1, 2), -12, F(-1, 2), 3, 0, 1, 0],
         [0, 0, 1, 0, 0, 0, 1]]
    res = solve_feasibility(A, [0, 0, 1])
    assert res.feasible


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5), st.data())
def test_agrees_with_vertex_oracle(m, n, data):
    ints = st.integers(-3, 3)
    A = [[F(data.draw(ints)) for _ in range(n)] for _ in range(m)]
    b = [F(data.draw(ints)) for _ in range(m)]
    res = solve_feasibility(A, b)
    assert res.feasible == vertex_feasible(A, b)
    if res.feasible:
        assert all(v >= 0 for v in res.x)
        assert all(sum(a * x for a, x in zip(row, res.x)) == bi for row, bi in zip(A, b))
    else:
        assert res.certificate.verify()
