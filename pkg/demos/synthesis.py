"""Building a normal operator with a prescribed diagonal.

Run: python demos/synthesis.py
"""

from fractions import Fraction as F

import numpy as np

from diagforge import DiagonalSpec, DiscreteSpectrum, TracialSpectrum
from diagforge.errors import Infeasible
from diagforge.schurhorn import feasibility_partition, synth_diagonal_discrete, synth_diagonal_tracial

triangle = [0, 1, 1j]

# Discrete model: essential spectrum {0, 1, i}, a few finite eigenvalues,
# and a target diagonal with a head and a periodic tail.
N = DiscreteSpectrum([(0.3 + 0.3j, 2)], triangle)
target = DiagonalSpec([0.5, 0.5j, 0.5 + 0.5j], [0, 1j, 1])
res = synth_diagonal_discrete(N, target, eps=0.05)
print(f"discrete: truncation size {res.dim}, path {res.report['path']}, "
      f"residual {res.residual:.4f}")

# Tracial model: is the diagonal (a block of 1/2, 1/6 and a block of 1/6, 1/2)
# reachable from the uniform measure on the triangle?
N = TracialSpectrum(triangle, [F(1, 3)] * 3)
blocks = [((F(1, 2), F(1, 6)), F(1, 2)), ((F(1, 6), F(1, 2)), F(1, 2))]
witness = feasibility_partition(N, blocks)
print("\npartition of the spectral measure:")
for row in witness.gamma:
    print("  ", [str(x) for x in row])
res = synth_diagonal_tracial(N, blocks, eps=0.05)
print(f"tracial: matrix size {res.dim}, block residuals "
      f"{np.round(res.report['block_residuals'], 4)}")

# The uniform measure on the unit square cannot produce a diagonal split
# evenly between the corners 0 and 1+i. The LP proves it.
square = TracialSpectrum([0, 1, 1j, 1 + 1j], [F(1, 4)] * 4)
try:
    feasibility_partition(square, [(0, F(1, 2)), (1 + 1j, F(1, 2))])
except Infeasible as exc:
    cert = exc.certificate
    print(f"\nsquare: infeasible, certificate pairing {cert.pairing}, verified {cert.verify()}")
