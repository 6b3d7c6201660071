from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diagforge.carpenter import (DiagonalSpec, JointPartitionSpec, TracialPartition,
                                 approx_rationals_step, approx_rationals_table, carpenter_block,
                                 carpenter_discrete, carpenter_tracial, carpenter_uhf)
from diagforge.errors import InfeasibleInput, InvalidInput, ModelTooCoarse
from diagforge.numkit import verify_projection_family


def check_family(fam, eps):
    assert verify_projection_family(fam.projections, 1e-9).passed
    assert fam.residual < eps
    diag = fam.diagonals()
    assert diag.min() >= -1e-9 and diag.max() <= 1 + 1e-9


def step_bounds(r, q):
    r = [F(x) for x in r]
    sr, sq = sum(r), sum(q)
    rest = [a - b for a, b in zip(r, q)]
    e2 = max(abs(a / sr - b / sq) for a, b in zip(r, q))
    e3 = max(abs(a / sr - c / sum(rest)) for a, c in zip(r, rest))
    return all(a / 2 <= b < a for a, b in zip(r, q)), e2, e3


class TestRationalSteps:
    def test_singleton(self):
        assert approx_rationals_step([0.5], 0.1) == [F(1, 4)]

    def test_symmetric(self):
        assert approx_rationals_step([0.5, 0.5], 0.01) == [F(1, 4), F(1, 4)]

    def test_irregular(self):
        q = approx_rationals_step([0.3, 0.6], 0.01)
        inside, e2, e3 = step_bounds([0.3, 0.6], q)
        assert inside and e2 < 0.01 and e3 < 0.01

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(1e-3, 0.999), min_size=1, max_size=5),
           st.sampled_from([0.1, 0.01, 0.001]))
    def test_bounds_hold(self, r, eps):
        q = approx_rationals_step(r, eps)
        inside, e2, e3 = step_bounds(r, q)
        assert inside and e2 < eps and e3 < eps

    def test_rejects_zero(self):
        with pytest.raises(InvalidInput):
            approx_rationals_step([0.0, 0.5], 0.1)

    def test_table_symmetric(self):
        t = approx_rationals_table([0.5, 0.5], 0.1, depth=3)
        for row in t.rows:
            assert row[0] == row[1]
        assert sum(r[0] for r in t.rows) >= F(7, 8) * F(1, 2)

    @pytest.mark.parametrize("p, eps, depth", [([F(1, 3), F(2, 3)], 0.05, 5),
                                               ([0.2, 0.3, 0.5], 0.01, None),
                                               ([1.0], 0.1, 4)])
    def test_table_bounds(self, p, eps, depth):
        t = approx_rationals_table(p, eps, depth)
        p = [F(x).limit_denominator(10**12) for x in p]
        partial = [F(0)] * len(p)
        for ell, row in enumerate(t.rows, start=1):
            s = sum(row)
            assert all(abs(pk - qk / s) < eps for pk, qk in zip(p, row))
            partial = [a + b for a, b in zip(partial, row)]
            assert all((1 - F(1, 2**ell)) * pk <= c < pk for pk, c in zip(p, partial))
        # Remainder row makes the columns exact.
        assert [sum(c) for c in zip(*t.all_rows())] == p
        if depth is None:
            assert F(1, 2**t.depth) < F(eps) / 2


class TestBlock:
    def test_trivial(self):
        fam = carpenter_block([1.0], [1.0], 0.1)
        assert fam.dim == 1 and np.allclose(fam.projections[0], 1)

    def test_averaging_pair(self):
        fam = carpenter_block([0.5, 0.5], [0.5, 0.5], 0.1)
        assert fam.dim == 2 and fam.residual < 1e-12
        check_family(fam, 0.1)

    @pytest.mark.parametrize("method", ["compact", "proof"])
    def test_spec_example(self, method):
        fam = carpenter_block([0.3, 0.7], [0.5, 0.5], 0.05, method=method)
        check_family(fam, 0.05)
        assert fam.report["method"] == method

    def test_proof_dimension_formula(self):
        fam = carpenter_block([0.25, 0.75], [0.5, 0.5], 0.05, method="proof")
        # N1 = 4, N2 = 2, N0 minimal with |(a/4 + N0)/(2 N0 + 1) - 1/2| < eps.
        sizes = fam.report["sub_block_sizes"]
        assert len(sizes) == 3 and len(set(sizes)) == 1
        assert fam.dim == 4 + 3 * (sizes[0] - 1)

    def test_endpoints(self):
        check_family(carpenter_block([0.2, 0.8], [0.0, 1.0], 0.05), 0.05)

    def test_mismatched_sums(self):
        with pytest.raises(InfeasibleInput):
            carpenter_block([0.5, 0.6], [0.5, 0.5], 0.1)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 4), st.sampled_from([0.1, 0.05, 0.01]), st.integers(0, 2**32 - 1))
    def test_random(self, n, eps, seed):
        rng = np.random.default_rng(seed)
        check_family(carpenter_block(rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n)), eps), eps)


def joint(heads, tails):
    return JointPartitionSpec([DiagonalSpec(h, t) for h, t in zip(heads, tails)])


class TestDiscrete:
    def test_spec_accessors(self):
        s = DiagonalSpec([0.1, 0.2], [0.3, 0.4])
        assert s.truncate(5) == [0.1, 0.2, 0.3, 0.4, 0.3]
        assert s.essential_values() == {0.3, 0.4}

    def test_single_summand(self):
        fam = carpenter_discrete(joint([[1, 1]], [[1, 1, 1]]), 0.05)
        assert fam.dim == 5 and np.allclose(fam.projections[0], np.eye(5))

    def test_constant_half(self):
        fam = carpenter_discrete(joint([[], []], [[0.5], [0.5]]), 0.05)
        check_family(fam, 0.05)

    def test_identity_head_with_tail(self):
        heads = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
        tails = [[0.5, 0.5, 0], [0.5, 0, 0.5], [0, 0.5, 0.5]]
        fam = carpenter_discrete(joint(heads, tails), 0.05)
        check_family(fam, 0.05)
        assert fam.report["spectrum_equals_essential"]

    def test_zero_column_reinserted(self):
        fam = carpenter_discrete(joint([[0.3], [0.0], [0.7]], [[0.5], [0.0], [0.5]]), 0.05)
        assert fam.report["dropped_zero_columns"] == [1]
        assert np.allclose(fam.projections[1], 0)
        check_family(fam, 0.05)

    def test_index_map_covers_truncation(self):
        fam = carpenter_discrete(joint([[0.2, 0.9], [0.8, 0.1]], [[0.4, 0.6], [0.6, 0.4]]), 0.05)
        imap = fam.report["index_map"]
        assert len(imap) == fam.dim and all(e is not None for e in imap)
        assert imap[0]["kind"] == "exception" and imap[0]["local"] == 0

    def test_invalid(self):
        with pytest.raises(InfeasibleInput):
            joint([[0.5], [0.6]], [[0.5], [0.5]])
        with pytest.raises(InfeasibleInput):
            JointPartitionSpec([DiagonalSpec([0.5], [1]), DiagonalSpec([], [0])])

    @settings(max_examples=25, deadline=None)
    @given(st.integers(1, 4), st.integers(0, 8), st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_random(self, n, H, L, seed):
        rng = np.random.default_rng(seed)
        heads = rng.dirichlet(np.ones(n), size=H).T if H else np.zeros((n, 0))
        tails = rng.dirichlet(np.ones(n), size=L).T
        fam = carpenter_discrete(joint(heads, tails), 0.05)
        check_family(fam, 0.05)
        assert (fam.dim - H) % L == 0


class TestTracial:
    def test_single(self):
        fam = carpenter_tracial(TracialPartition(2, [[1, 1]]), 0.1)
        assert fam.traces() == [1] and fam.residual == 0

    def test_averaging(self):
        fam = carpenter_tracial(TracialPartition(1, [[F(1, 2)], [F(1, 2)]], [F(1, 2), F(1, 2)]), 0.01)
        assert fam.dim == 2 and fam.residual < 1e-15
        assert fam.traces() == [F(1, 2), F(1, 2)]

    def test_irrational(self):
        s = 2 ** -0.5
        fam = carpenter_tracial(TracialPartition(1, [[s], [1 - s]]), 0.01)
        check_family(fam, 0.01)
        assert all(abs(float(t) - x) <= 1 / fam.dim for t, x in zip(fam.traces(), [s, 1 - s]))
        table = fam.report["rational_table"]
        rows = [[F(x) for x in r] for r in table["rows"]] + [[F(x) for x in table["remainder"]]]
        assert [float(sum(c)) for c in zip(*rows)] == pytest.approx([s, 1 - s], abs=1e-12)

    def test_multi_atom_dyadic(self):
        part = TracialPartition(3, [[F(1, 8), F(3, 64), 1], [F(7, 8), F(61, 64), 0]])
        fam = carpenter_tracial(part, 0.01)
        assert fam.residual < 1e-12 and fam.report["trace_exact"]
        check_family(fam, 0.01)

    def test_bad_targets(self):
        with pytest.raises(InfeasibleInput):
            TracialPartition(1, [[F(1, 2)], [F(1, 2)]], [F(1, 3), F(2, 3)])

    def test_model_cap(self):
        with pytest.raises(ModelTooCoarse):
            carpenter_tracial(TracialPartition(1, [[2 ** -0.5], [1 - 2 ** -0.5]]), 1e-6, max_dim=64)


class TestUHF:
    def test_zero_column_dropped(self):
        j, fam = carpenter_uhf([[1], [0]], 0.01)
        assert j == 0 and fam.report["dropped_zero_columns"] == [1]
        assert np.allclose(fam.projections[0], 1) and np.allclose(fam.projections[1], 0)

    def test_thirds(self):
        j, fam = carpenter_uhf([[1 / 3], [2 / 3]], 0.01)
        a = int(round(fam.diagonals()[0, 0] * 2**j))
        assert abs(1 / 3 - a / 2**j) < 0.01
        assert np.allclose(fam.diagonals()[0], a / 2**j)
        check_family(fam, 0.01)

    def test_half_exact(self):
        j, fam = carpenter_uhf([[0.5], [0.5]], 0.01)
        assert j == 1 and fam.residual < 1e-15

    def test_tower_replication(self):
        j, fam = carpenter_uhf([[0.25, 0.6], [0.75, 0.4]], 0.02)
        assert j >= 1 and fam.dim == 2**j
        check_family(fam, 0.02)
        assert all(F(t).denominator <= 2**j for t in fam.report["traces"])

    def test_cap(self):
        with pytest.raises(ModelTooCoarse):
            carpenter_uhf([[1 / 3], [2 / 3]], 1e-6, max_level=8)

    def test_power_of_two(self):
        with pytest.raises(InvalidInput):
            carpenter_uhf([[0.5, 0.5, 0.5], [0.5, 0.5, 0.5]], 0.1)
