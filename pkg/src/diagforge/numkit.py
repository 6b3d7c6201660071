"""Dense complex linear algebra substrate.

Matrices are plain ``numpy`` arrays of dtype complex128. Rationals are
:class:`fractions.Fraction`. Complex points for the exact hull code are
``(re, im)`` pairs of Fractions.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DegenerateHull, DimensionMismatch, InvalidInput, NotNormal
from .rational import is_exact, to_complex_fraction

UNITARY_TOL = 1e-12
PROJECTION_TOL = 1e-9


# -- predicates ---------------------------------------------------------------

def as_matrix(M):
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    return A


def max_abs(A):
    return float(np.max(np.abs(A))) if np.size(A) else 0.0


def is_hermitian(M, tol=PROJECTION_TOL):
    M = as_matrix(M)
    return max_abs(M - M.conj().T) <= tol


def is_unitary(M, tol=UNITARY_TOL):
    M = as_matrix(M)
    return max_abs(M.conj().T @ M - np.eye(len(M))) <= tol


def is_projection(M, tol=PROJECTION_TOL):
    M = as_matrix(M)
    return is_hermitian(M, tol) and max_abs(M @ M - M) <= tol


def normality_residual(M):
    M = as_matrix(M)
    return max_abs(M @ M.conj().T - M.conj().T @ M)


def is_normal(M, tol=PROJECTION_TOL):
    return normality_residual(M) <= tol


def normalized_trace(M):
    M = as_matrix(M)
    return complex(np.trace(M)) / len(M)


def conditional_expectation_diag(M):
    """Image of ``M`` under the expectation onto the diagonal, as a vector."""
    return np.diagonal(as_matrix(M)).copy()


# -- DFT flattening -----------------------------------------------------------

def dft_unitary(n):
    """n-point DFT unitary with entry (p, q) = zeta^(p*q) / sqrt(n), p, q in 1..n.

    Row index is the exponent and column index the root, zeta = exp(2 pi i/n).
    Exponents are reduced mod n before exponentiating so large n keeps full
    accuracy.
    """
    n = int(n)
    if n < 1:
        raise InvalidInput("dft_unitary needs n >= 1")
    idx = np.arange(1, n + 1)
    expo = np.outer(idx, idx) % n
    return np.exp(2j * np.pi * expo / n) / np.sqrt(n)


def jacobi_eigh(H, tol=1e-15, max_sweeps=100):
    """Cyclic Jacobi eigensolver for a complex Hermitian matrix.

    Each rotation first removes the phase of the pivot entry, then applies
    the real symmetric rotation that annihilates it. Returns
    ``(eigenvalues, V)`` with ``V^* H V`` diagonal (unsorted).
    """
    A = np.array(H, dtype=complex)
    n = len(A)
    V = np.eye(n, dtype=complex)
    if n < 2:
        return np.real(np.diagonal(A)).copy(), V
    scale = max(np.linalg.norm(A), 1e-300)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diagonal(A)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r <= 1e-300 or r <= 1e-18 * scale:
                    continue
                phase = apq / r
                app, aqq = A[p, p].real, A[q, q].real
                theta = (aqq - app) / (2.0 * r)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                cols = [p, q]
                A[:, cols] = A[:, cols] @ g
                A[cols, :] = g.conj().T @ A[cols, :]
                A[p, q] = A[q, p] = 0.0
                V[:, cols] = V[:, cols] @ g
    return np.real(np.diagonal(A)).copy(), V


def _clusters(values, gap):
    """Split sorted real ``values`` where consecutive gaps exceed ``gap``."""
    groups, start = [], 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > gap:
            groups.append(list(range(start, i)))
            start = i
    return groups


def diagonalize_normal(N, tol=PROJECTION_TOL):
    """Unitary diagonalization of a normal matrix.

    Two stages: Jacobi on the Hermitian part, then Jacobi on the skew part
    compressed to each eigenspace of the first stage (eigenvalues closer than
    ``1e-8 * ||N||`` are one eigenspace). Returns ``(W, eigenvalues)`` with
    eigenvalues sorted by (real, imag) and ``W^* N W`` diagonal.
    """
    N = as_matrix(N)
    res = normality_residual(N)
    if res > tol:
        raise NotNormal(f"normality residual {res:.3e} exceeds tol {tol:.3e}")
    n = len(N)
    norm = max(np.linalg.norm(N, 2), 1e-300) if n else 1.0
    herm = (N + N.conj().T) / 2
    skew = (N - N.conj().T) / 2j
    h, W = jacobi_eigh(herm)
    order = np.argsort(h, kind="stable")
    h, W = h[order], W[:, order]
    for group in _clusters(h, 1e-8 * norm):
        if len(group) < 2:
            continue
        Wg = W[:, group]
        k, Vg = jacobi_eigh(Wg.conj().T @ skew @ Wg)
        W[:, group] = Wg @ Vg
    eig = np.diagonal(W.conj().T @ N @ W).copy()
    order = np.lexsort((eig.imag, eig.real))
    return W[:, order], eig[order]


def flatten_constant_diagonal(N, tol=PROJECTION_TOL):
    """Unitary ``U = W V`` making every diagonal entry of ``U^* B U`` equal tau(B).

    Holds for every B in the C*-algebra generated by ``N``.
    """
    W, _ = diagonalize_normal(N, tol)
    return W @ dft_unitary(len(W))


def spectral_projections(N, tol=PROJECTION_TOL, cluster=1e-8):
    """Distinct eigenvalues of a normal ``N`` and their spectral projections."""
    W, eig = diagonalize_normal(N, tol)
    scale = max(1.0, max(abs(eig)) if len(eig) else 1.0)
    values, projs, used = [], [], np.zeros(len(eig), bool)
    for i, lam in enumerate(eig):
        if used[i]:
            continue
        mask = (~used) & (np.abs(eig - lam) <= cluster * scale)
        used |= mask
        cols = W[:, mask]
        values.append(complex(np.mean(eig[mask])))
        projs.append(cols @ cols.conj().T)
    return values, projs


# -- convex hulls in the plane --------------------------------------------------

@dataclass(frozen=True)
class HullQuery:
    point: object
    vertices: tuple

    def __post_init__(self):
        if len(self.vertices) == 0:
            raise InvalidInput("hull query needs at least one vertex")


@dataclass
class HullResult:
    inside: bool
    distance: float
    barycentric: tuple = None
    exact: bool = False


def _pt(z, exact):
    if exact:
        return to_complex_fraction(z)
    if isinstance(z, (tuple, list)):
        return (float(z[0]), float(z[1]))
    z = complex(z)
    return (z.real, z.imag)


def _is_exact_point(z):
    if isinstance(z, (tuple, list)) and len(z) == 2:
        return is_exact(z[0]) and is_exact(z[1])
    return is_exact(z)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points):
    """Andrew's monotone chain; returns hull vertices counter-clockwise.

    Works with floats or Fractions. Collinear points are dropped, so a
    segment comes back as two points and a single point as one.
    """
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _segment_distance(p, a, b):
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    px, py = float(p[0]), float(p[1])
    dx, dy = bx - ax, by - ay
    L = dx * dx + dy * dy
    t = 0.0 if L == 0 else min(1.0, max(0.0, ((px - ax) * dx + (py - ay) * dy) / L))
    return float(np.hypot(px - ax - t * dx, py - ay - t * dy))


def hull_distance(point, vertices):
    """Euclidean distance from ``point`` to conv(``vertices``); 0 inside."""
    exact = _is_exact_point(point) and all(_is_exact_point(v) for v in vertices)
    p = _pt(point, exact)
    hull = convex_hull([_pt(v, exact) for v in vertices])
    return _distance_to_hull(p, hull)


def _distance_to_hull(p, hull):
    if len(hull) == 1:
        return _segment_distance(p, hull[0], hull[0])
    if len(hull) == 2:
        if _cross(hull[0], hull[1], p) == 0 and min(hull)[0] <= p[0] <= max(hull)[0] and \
                min(h[1] for h in hull) <= p[1] <= max(h[1] for h in hull):
            return 0.0
        return _segment_distance(p, hull[0], hull[1])
    m = len(hull)
    if all(_cross(hull[i], hull[(i + 1) % m], p) >= 0 for i in range(m)):
        return 0.0
    return min(_segment_distance(p, hull[i], hull[(i + 1) % m]) for i in range(m))


def barycentric(point, triple, exact=None):
    """Barycentric weights of ``point`` in a triangle via Cramer's rule."""
    if len(triple) != 3:
        raise InvalidInput("barycentric coordinates need exactly three vertices")
    if exact is None:
        exact = _is_exact_point(point) and all(_is_exact_point(v) for v in triple)
    p = _pt(point, exact)
    a, b, c = (_pt(v, exact) for v in triple)
    det = _cross(a, b, c)
    if det == 0 or (not exact and abs(det) <= 1e-14):
        raise DegenerateHull("barycentric coordinates requested for collinear vertices")
    wa = _cross(p, b, c) / det
    wb = _cross(a, p, c) / det
    wc = 1 - wa - wb if exact else _cross(a, b, p) / det
    return (wa, wb, wc)


def hull_membership(q, tol=1e-12, barycentric_coords=None):
    """Is ``q.point`` within ``tol`` of the convex hull of ``q.vertices``?

    Uses exact rational arithmetic when every coordinate is an int or
    Fraction. Barycentric weights come back automatically for three
    non-collinear vertices; pass ``barycentric_coords=True`` to demand them
    (raising :class:`DegenerateHull` on collinear triples) or ``False`` to
    skip them.
    """
    exact = _is_exact_point(q.point) and all(_is_exact_point(v) for v in q.vertices)
    p = _pt(q.point, exact)
    verts = [_pt(v, exact) for v in q.vertices]
    dist = _distance_to_hull(p, convex_hull(verts))
    weights = None
    if barycentric_coords is True or (barycentric_coords is None and len(verts) == 3):
        try:
            weights = barycentric(q.point, q.vertices, exact)
        except DegenerateHull:
            if barycentric_coords:
                raise
        except InvalidInput:
            if barycentric_coords:
                raise
    inside = dist == 0.0 if exact and tol == 0 else dist <= tol
    return HullResult(inside=bool(inside), distance=dist, barycentric=weights, exact=exact)


# -- projection families ---------------------------------------------------------

@dataclass
class FamilyReport:
    dim: int
    count: int
    hermitian: float
    idempotent: float
    orthogonal: float
    completeness: float
    tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = max(self.hermitian, self.idempotent, self.orthogonal,
                          self.completeness) <= self.tol

    @property
    def residuals(self):
        return {"hermitian": self.hermitian, "idempotent": self.idempotent,
                "orthogonal": self.orthogonal, "completeness": self.completeness}


def verify_projection_family(P, tol=PROJECTION_TOL):
    """Max-norm residuals for a family of orthogonal projections summing to I."""
    mats = [np.asarray(p, dtype=complex) for p in P]
    if not mats:
        raise InvalidInput("empty projection family")
    d = mats[0].shape
    if len(d) != 2 or d[0] != d[1] or any(m.shape != d for m in mats):
        raise DimensionMismatch("projection family matrices differ in shape")
    herm = idem = orth = 0.0
    for i, A in enumerate(mats):
        herm = max(herm, max_abs(A - A.conj().T))
        idem = max(idem, max_abs(A @ A - A))
        for B in mats[i + 1:]:
            orth = max(orth, max_abs(A @ B))
    comp = max_abs(sum(mats) - np.eye(d[0]))
    return FamilyReport(dim=d[0], count=len(mats), hermitian=herm, idempotent=idem,
                        orthogonal=orth, completeness=comp, tol=tol)


def fraction_matrix_to_float(rows):
    return np.array([[float(Fraction(x)) for x in r] for r in rows])
