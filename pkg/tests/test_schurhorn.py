from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diagforge.carpenter import DiagonalSpec
from diagforge.errors import Infeasible, InvalidInput, NecessityViolated
from diagforge.numkit import diagonalize_normal, is_unitary
from diagforge.schurhorn import (DiscreteSpectrum, TracialSpectrum, check_necessity,
                                 feasibility_partition, synth_diagonal_discrete,
                                 synth_diagonal_tracial, three_point_shortcut)
from oracles import schur_horn_system, vertex_feasible

TRI = [0, 1, 1j]
SQUARE = TracialSpectrum([0, 1, 1j, 1 + 1j], [F(1, 4)] * 4)


class TestNecessity:
    def test_inside(self):
        assert check_necessity([0.5, 0.5j, 0.5 + 0.5j], TRI)

    def test_far_point(self):
        res = check_necessity([2], TRI)
        assert not res and res.index == 0
        assert res.distance == pytest.approx(1.0)

    def test_vertices(self):
        res = check_necessity(TRI, TRI)
        assert res and res.max_distance == 0

    def test_essential_only(self):
        N = DiscreteSpectrum([(2, 1)], [0, 1])
        assert check_necessity([1.5], N)
        assert not check_necessity([1.5], N, essential_only=True)


class TestFeasibility:
    def test_constant_target(self):
        N = TracialSpectrum([0, 1, 1j], [F(1, 2), F(1, 4), F(1, 4)])
        w = feasibility_partition(N, [((F(1, 4), F(1, 4)), 1)])
        assert w.gamma == [[F(1, 2), F(1, 4), F(1, 4)]] and w.is_exact()

    def test_square_infeasible(self):
        with pytest.raises(Infeasible) as info:
            feasibility_partition(SQUARE, [(0, F(1, 2)), (1 + 1j, F(1, 2))])
        cert = info.value.certificate
        assert cert.verify() and cert.pairing > 0

    def test_perturbed_square_feasible(self):
        c = (F(1, 4), F(1, 4))
        w = feasibility_partition(SQUARE, [(c, F(1, 2)), ((1 - c[0], 1 - c[1]), F(1, 2))])
        assert w.is_exact()

    def test_weights_must_sum_to_one(self):
        with pytest.raises(InvalidInput):
            feasibility_partition(SQUARE, [(0, F(1, 2))])

    def test_float_round_off_absorbed(self):
        z = [0.1 + 0.7j, -0.3 + 0.2j, 0.9 - 0.4j]
        N = TracialSpectrum(z, [F(1, 3), F(1, 6), F(1, 2)])
        w = feasibility_partition(N, [(N.trace(), 1)])
        assert w.trace_shift is None or max(abs(x) for x in w.trace_shift) < 1e-9

    def test_three_point_matches_barycentric(self):
        N = TracialSpectrum(TRI, [F(1, 3)] * 3)
        blocks = [((F(1, 2), F(1, 6)), F(1, 2)), ((F(1, 6), F(1, 2)), F(1, 2))]
        ok, gamma = three_point_shortcut(N, blocks)
        w = feasibility_partition(N, blocks)
        assert ok and gamma == w.gamma

    def test_three_point_trace_mismatch(self):
        N = TracialSpectrum(TRI, [F(1, 3)] * 3)
        assert three_point_shortcut(N, [((F(1, 2), 0), 1)]) == (False, None)

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_lp_matches_oracle(self, data):
        n = data.draw(st.integers(1, 4))
        m = data.draw(st.integers(1, 3))
        eighth = st.integers(-2, 10).map(lambda k: F(k, 8))
        z = [(data.draw(eighth), data.draw(eighth)) for _ in range(n)]
        cuts = sorted(data.draw(st.lists(st.integers(1, 7), min_size=n - 1, max_size=n - 1)))
        bounds = [0] + cuts + [8]
        omega = [F(bounds[i + 1] - bounds[i], 8) for i in range(n)]
        if any(w == 0 for w in omega):
            return
        ws = {1: [F(1)], 2: [F(3, 8), F(5, 8)], 3: [F(1, 4), F(1, 4), F(1, 2)]}[m]
        blocks = [((data.draw(eighth), data.draw(eighth)), w) for w in ws]
        N = TracialSpectrum(z, omega)
        try:
            feasibility_partition(N, blocks)
            lp = True
        except Infeasible:
            lp = False
        assert lp == vertex_feasible(*schur_horn_system(z, omega, blocks))


def eigen_multiset(res):
    N = res.unitary.conj().T @ np.diag(res.normal) @ res.unitary
    _, eig = diagonalize_normal(N, tol=1e-8)
    key = lambda v: (round(v.real, 6), round(v.imag, 6))
    return sorted(map(key, eig)), sorted(map(key, res.normal))


class TestSynthTracial:
    def test_constant(self):
        N = TracialSpectrum([0, 1, 1j, 1 + 1j], [F(1, 8), F(3, 8), F(1, 4), F(1, 4)])
        res = synth_diagonal_tracial(N, [(N.trace(), 1)], 0.05)
        assert res.residual < 0.05
        assert np.allclose(res.diagonal(), N.trace())

    def test_square_propagates(self):
        with pytest.raises(Infeasible):
            synth_diagonal_tracial(SQUARE, [(0, F(1, 2)), (1 + 1j, F(1, 2))], 0.05)

    def test_two_blocks(self):
        N = TracialSpectrum(TRI, [F(1, 3)] * 3)
        blocks = [((F(1, 2), F(1, 6)), F(1, 2)), ((F(1, 6), F(1, 2)), F(1, 2))]
        res = synth_diagonal_tracial(N, blocks, 0.05)
        assert max(res.report["block_residuals"]) < 0.05
        assert is_unitary(res.unitary, 1e-10)
        a, b = eigen_multiset(res)
        assert a == b

    def test_trace_distribution(self):
        N = TracialSpectrum([0, 2], [F(2, 5), F(3, 5)])
        res = synth_diagonal_tracial(N, [(1.2, 1)], 0.05)
        counts = [np.sum(np.isclose(res.normal, v)) / res.dim for v in (0, 2)]
        assert counts == [0.4, 0.6]


class TestSynthDiscrete:
    def test_identity(self):
        N = DiscreteSpectrum([(0.5, 2)], [0, 1])
        res = synth_diagonal_discrete(N, DiagonalSpec([0.5, 0.5], [0, 1]), 0.05)
        assert res.report["path"] == "identity" and res.residual == 0
        assert np.allclose(res.unitary, np.eye(res.dim))

    def test_three_point_target(self):
        N = DiscreteSpectrum([], TRI)
        res = synth_diagonal_discrete(N, DiagonalSpec([0.5, 0.5j, 0.5 + 0.5j], [0, 1j, 1]), 0.05)
        assert res.residual < 0.05 and is_unitary(res.unitary, 1e-10)

    def test_flattening_case(self):
        N = DiscreteSpectrum([], TRI)
        res = synth_diagonal_discrete(N, DiagonalSpec([], [(1 + 1j) / 3]), 0.05)
        assert res.residual < 0.05

    def test_finite_eigenvalues_absorbed(self):
        N = DiscreteSpectrum([(0.3 + 0.3j, 2), (0.5, 1)], TRI)
        res = synth_diagonal_discrete(N, DiagonalSpec([0.2, 0.1j], [0.4 + 0.1j, 1j, 0.25]), 0.05)
        assert res.residual < 0.05
        assert list(np.round(res.normal[:3], 12)) == [0.3 + 0.3j, 0.3 + 0.3j, 0.5]
        a, b = eigen_multiset(res)
        assert a == b

    def test_outside_hull(self):
        with pytest.raises(NecessityViolated) as info:
            synth_diagonal_discrete(DiscreteSpectrum([], TRI), DiagonalSpec([2], [0]), 0.05)
        assert info.value.distance == pytest.approx(1.0)

    def test_finite_eig_outside_essential_hull(self):
        with pytest.raises(NecessityViolated):
            synth_diagonal_discrete(DiscreteSpectrum([(2, 1)], TRI), DiagonalSpec([], [0]), 0.05)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 4), st.integers(1, 4), st.integers(0, 2), st.integers(0, 2**32 - 1))
    def test_random(self, H, L, F_count, seed):
        rng = np.random.default_rng(seed)
        pick = lambda k: rng.dirichlet(np.ones(3), size=k) @ np.array(TRI)
        N = DiscreteSpectrum([(z, 1) for z in pick(F_count)], TRI)
        res = synth_diagonal_discrete(N, DiagonalSpec(list(pick(H)), list(pick(L))), 0.1)
        assert res.residual < 0.1
        assert check_necessity(list(res.diagonal()), N.points(), 1e-8 + 0.1)
