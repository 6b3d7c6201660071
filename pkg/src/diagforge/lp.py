"""Exact-rational feasibility for ``A x = b, x >= 0``.

Phase-I simplex on a Fraction tableau with Bland's rule, so it terminates
and every answer is exact. An infeasible system comes back with a Farkas
vector ``y`` satisfying ``A^T y <= 0`` and ``b^T y > 0``, read off from the
Phase-I duals.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .rational import fraction_str, to_fraction


@dataclass
class FarkasCertificate:
    """Dual vector proving ``A x = b, x >= 0`` has no solution."""

    y: list
    A: list
    b: list
    labels: list = field(default=None)

    @property
    def pairing(self):
        return sum(yi * bi for yi, bi in zip(self.y, self.b))

    def column_pairings(self):
        m, ncols = len(self.A), len(self.A[0]) if self.A else 0
        return [sum(self.y[i] * self.A[i][j] for i in range(m)) for j in range(ncols)]

    def verify(self):
        """Exact check: every column pairs to <= 0, the right side to > 0."""
        return all(v <= 0 for v in self.column_pairings()) and self.pairing > 0

    def to_json(self):
        out = {"dual": [fraction_str(v) for v in self.y], "pairing": fraction_str(self.pairing),
               "verified": self.verify()}
        if self.labels is not None:
            out["rows"] = list(self.labels)
        return out


@dataclass
class LPResult:
    feasible: bool
    x: list = None
    certificate: FarkasCertificate = None
    pivots: int = 0


def _pivot(T, r, c):
    piv = T[r][c]
    row = [v / piv for v in T[r]]
    T[r] = row
    for i, other in enumerate(T):
        if i != r and other[c] != 0:
            f = other[c]
            T[i] = [a - f * b for a, b in zip(other, row)]


def solve_feasibility(A, b, labels=None, max_pivots=100000):
    """Decide ``A x = b, x >= 0`` exactly.

    ``A`` is a list of rows and ``b`` a list; entries may be ints, Fractions,
    floats or "p/q" strings (floats are rationalized). Returns an
    :class:`LPResult` with ``x`` when feasible, otherwise with a verified
    :class:`FarkasCertificate`.
    """
    A = [[to_fraction(v) for v in row] for row in A]
    b = [to_fraction(v) for v in b]
    m = len(A)
    ncols = len(A[0]) if m else 0
    if m == 0:
        return LPResult(True, [Fraction(0)] * ncols)
    sign = [(-1 if bi < 0 else 1) for bi in b]
    # Tableau columns: x (ncols), artificials (m), rhs. Last row: reduced costs.
    T = []
    for i in range(m):
        row = [sign[i] * v for v in A[i]] + [Fraction(int(k == i)) for k in range(m)]
        T.append(row + [sign[i] * b[i]])
    cost = [-sum(T[i][j] for i in range(m)) for j in range(ncols)] + [Fraction(0)] * m
    cost.append(-sum(T[i][-1] for i in range(m)))
    T.append(cost)
    basis = [ncols + i for i in range(m)]
    pivots = 0
    while True:
        obj = T[-1]
        entering = next((j for j in range(ncols + m) if obj[j] < 0), None)
        if entering is None:
            break
        best, leave = None, None
        for i in range(m):
            a = T[i][entering]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            # Cannot happen: Phase-I objective is bounded below by 0.
            raise RuntimeError("unbounded phase-I problem")
        _pivot(T, leave, entering)
        basis[leave] = entering
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("simplex pivot limit exceeded")
    optimum = -T[-1][-1]
    if optimum == 0:
        x = [Fraction(0)] * ncols
        for i, j in enumerate(basis):
            if j < ncols:
                x[j] = T[i][-1]
        return LPResult(True, x, pivots=pivots)
    # Reduced cost of artificial i is 1 - y'_i; undo the row sign flips.
    y = [sign[i] * (1 - T[-1][ncols + i]) for i in range(m)]
    cert = FarkasCertificate(y, A, b, labels)
    return LPResult(False, certificate=cert, pivots=pivots)
