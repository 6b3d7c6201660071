"""Independent reference implementations used to check the library.

None of these import the code under test's solvers: feasibility is decided
by enumerating basic solutions with numpy and confirming them in exact
arithmetic.
"""

from fractions import Fraction
from itertools import combinations

import numpy as np


def exact_solve(A, b):
    """Solve a square system exactly by Gauss-Jordan; None if singular."""
    n = len(A)
    M = [[Fraction(v) for v in row] + [Fraction(bi)] for row, bi in zip(A, b)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return None
        M[c], M[piv] = M[piv], M[c]
        p = M[c][c]
        M[c] = [v / p for v in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * bb for a, bb in zip(M[r], M[c])]
    return [row[-1] for row in M]


def _independent_rows(A):
    rows = []
    for i in range(A.shape[0]):
        trial = rows + [i]
        if np.linalg.matrix_rank(A[trial], tol=1e-9) == len(trial):
            rows = trial
    return rows


def vertex_feasible(A, b):
    """Is {x >= 0 : A x = b} nonempty? Decided by basic-solution enumeration.

    A nonempty polyhedron of this form has a vertex, and every vertex is
    the solution of some nonsingular square subsystem on a column basis.
    Float solves screen the candidates; survivors are confirmed exactly.
    """
    Af = np.array([[float(v) for v in row] for row in A])
    bf = np.array([float(v) for v in b])
    rows = _independent_rows(Af)
    if not rows:
        return all(v == 0 for v in b)
    r = len(rows)
    Ar, br = Af[rows], bf[rows]
    cols = list(combinations(range(Af.shape[1]), r))
    sub = np.stack([Ar[:, c] for c in cols])
    dets = np.linalg.det(sub)
    ok = np.abs(dets) > 1e-10
    xs = np.full((len(cols), r), -1.0)
    xs[ok] = np.linalg.solve(sub[ok], np.broadcast_to(br, (int(ok.sum()), r))[..., None])[..., 0]
    for idx in np.flatnonzero(ok & np.all(xs > -1e-7, axis=1)):
        c = cols[idx]
        x = exact_solve([[A[i][j] for j in c] for i in rows], [b[i] for i in rows])
        if x is None or any(v < 0 for v in x):
            continue
        full = [Fraction(0)] * Af.shape[1]
        for j, v in zip(c, x):
            full[j] = v
        if all(sum(Fraction(A[i][j]) * full[j] for j in range(len(full))) == b[i]
               for i in range(len(A))):
            return True
    return False


def schur_horn_system(values, weights, blocks):
    """Rows of the tracial feasibility problem built from scratch."""
    n, m = len(values), len(blocks)
    A, b = [], []
    for j in range(m):
        A.append([Fraction(int(jj == j)) for jj in range(m) for _ in range(n)])
        b.append(Fraction(1))
    for k in range(n):
        A.append([blocks[jj][1] if kk == k else Fraction(0)
                  for jj in range(m) for kk in range(n)])
        b.append(weights[k])
    for j, (beta, _) in enumerate(blocks):
        for part in (0, 1):
            A.append([values[kk][part] if jj == j else Fraction(0)
                      for jj in range(m) for kk in range(n)])
            b.append(beta[part])
    return A, b


def flattened_diagonal(values):
    """Diagonal of V^* diag(values) V for the normalized DFT V, by direct sum.

    Entry (p, p) is (1/n) sum_q |zeta^{pq}|^2 values_q = mean(values).
    """
    values = np.asarray(values, dtype=complex)
    n = len(values)
    zeta = np.exp(2j * np.pi / n)
    V = np.array([[zeta ** ((p * q) % n) for q in range(1, n + 1)]
                  for p in range(1, n + 1)]) / np.sqrt(n)
    return np.real_if_close(np.einsum("qp,q,qp->p", V.conj(), values, V))
