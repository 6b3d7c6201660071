"""Finite matrices versus truncations of infinite ones.

No 3x3 unitary puts diag(1/2, i/2, (1+i)/2) on the diagonal of
diag(0, 1, i). Adding a periodic tail makes the target reachable to any
accuracy on a large enough truncation.

Run: python demos/obstructions.py [restarts] [iters]
"""

import sys

from diagforge.obstructions import arveson_search, contrast_demo

restarts = int(sys.argv[1]) if len(sys.argv) > 1 else 50
iters = int(sys.argv[2]) if len(sys.argv) > 2 else 1000

search = arveson_search(restarts, iters, seed=0)
print(f"best 3x3 residual over {restarts} restarts: {search.floor:.5f}")

for eps in (0.2, 0.1, 0.05):
    rep = contrast_demo(eps, search=search)
    syn = rep["synthesis"]
    print(f"eps {eps:<5} truncation {syn['M']:>4}  residual {syn['residual']:.4f}  "
          f"below the 3x3 floor: {rep['floor_above_synthesis']}")
