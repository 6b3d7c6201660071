"""Constant diagonals and projections with prescribed diagonals.

Run: python demos/flatten_and_projections.py
"""

import numpy as np

from diagforge import carpenter_block, carpenter_tracial, carpenter_uhf, TracialPartition
from diagforge.numkit import flatten_constant_diagonal, verify_projection_family

np.set_printoptions(precision=4, suppress=True)

# Any normal matrix is unitarily equivalent to one with a constant diagonal.
N = np.diag([0, 1, 1j])
U = flatten_constant_diagonal(N)
print("flattened diagonal:", np.diagonal(U.conj().T @ N @ U))

# Two projections summing to the identity, diagonals close to (0.3, 0.7) on
# the first sub-block and (0.5, 0.5) elsewhere.
fam = carpenter_block([0.3, 0.7], [0.5, 0.5], eps=0.05)
print(f"\nblock family: dim {fam.dim}, residual {fam.residual:.4f}")
print("diagonals:\n", fam.diagonals())
print("family check passed:", verify_projection_family(fam.projections, 1e-9).passed)

# Tracial version: traces are exact rationals close to 1/sqrt(2).
s = 2 ** -0.5
fam = carpenter_tracial(TracialPartition(1, [[s], [1 - s]]), eps=0.01)
print(f"\ntracial family: dim {fam.dim}, traces {[str(t) for t in fam.traces()]}")

# Dyadic tower: the smallest level 2^j that resolves 1/3 within eps.
j, fam = carpenter_uhf([[1 / 3], [2 / 3]], eps=0.01)
print(f"\ntower level {j}: diagonal of first projection {fam.diagonals()[0, 0]:.6f}")
