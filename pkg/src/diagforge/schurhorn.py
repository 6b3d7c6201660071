"""Approximate Schur-Horn synthesis for normal operators.

Two finite models are supported. In the discrete model a normal operator
has finitely many eigenvalues of finite multiplicity plus essential values
of infinite multiplicity, and targets are periodic-tail diagonals that get
truncated. In the tracial model a normal operator is a list of values with
rational trace weights, and targets are step diagonals (value, weight).
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import carpenter as cp
from .errors import Infeasible, InvalidInput, NecessityViolated, ToleranceUnreachable
from .lp import solve_feasibility
from .numkit import barycentric, dft_unitary, hull_distance, max_abs
from .rational import fraction_str, lcm_of_denominators, round_counts, to_fraction

HULL_TOL = 1e-9
# Largest tau(A) - tau(N) mismatch treated as float round-off.
TRACE_SNAP = 1e-9
# eps is split so rounding and float noise cannot push a residual over it.
EPS_SAFETY = 0.9
ABSORB_CAP = 10**6


# -- spectral data ------------------------------------------------------------------

@dataclass
class DiscreteSpectrum:
    """Eigenvalues of finite multiplicity plus essential values."""

    finite_eigs: list
    essential: list

    def __post_init__(self):
        self.finite_eigs = [(_to_complex(z), int(mult)) for z, mult in self.finite_eigs]
        self.essential = [_to_complex(z) for z in self.essential]
        if not self.essential:
            raise InvalidInput("essential spectrum must be nonempty")
        if any(mult < 1 for _, mult in self.finite_eigs):
            raise InvalidInput("multiplicities must be positive")

    def expanded_finite(self):
        return [z for z, mult in self.finite_eigs for _ in range(mult)]

    def points(self):
        return [z for z, _ in self.finite_eigs] + list(self.essential)


@dataclass
class TracialSpectrum:
    """Values z_k with rational trace weights summing to exactly 1."""

    values: list
    weights: list

    def __post_init__(self):
        self.values = list(self.values)
        self.weights = [to_fraction(w) for w in self.weights]
        if not self.values or len(self.values) != len(self.weights):
            raise InvalidInput("need one weight per value")
        if any(w < 0 for w in self.weights):
            raise InvalidInput("weights must be nonnegative")
        if sum(self.weights) != 1:
            raise InvalidInput("weights must sum to exactly 1")

    def trace(self):
        return sum(_to_complex(z) * float(w) for z, w in zip(self.values, self.weights))

    def points(self):
        return [_to_complex(z) for z in self.values]


def _as_blocks(blocks):
    out = [(b, to_fraction(w)) for b, w in blocks]
    if not out:
        raise InvalidInput("need at least one block")
    if sum(w for _, w in out) != 1:
        raise InvalidInput("block weights must sum to exactly 1")
    if any(w <= 0 for _, w in out):
        raise InvalidInput("block weights must be positive")
    return out


# -- necessity ----------------------------------------------------------------------

@dataclass
class NecessityResult:
    ok: bool
    max_distance: float
    index: int = None
    value: complex = None
    distance: float = 0.0

    def __bool__(self):
        return self.ok


def check_necessity(A_diag, N, tol=HULL_TOL, essential_only=False):
    """Do all entries of ``A_diag`` lie within ``tol`` of the spectral hull?

    ``N`` is a :class:`DiscreteSpectrum`, a :class:`TracialSpectrum` or a
    plain list of spectrum points. With ``essential_only`` a discrete
    spectrum contributes only its essential values. The result is truthy on
    success; on failure it names the first worst entry and its distance.
    """
    if isinstance(N, DiscreteSpectrum):
        pts = list(N.essential) if essential_only else N.points()
    elif isinstance(N, TracialSpectrum):
        pts = N.points() if not essential_only else [
            z for z, w in zip(N.values, N.weights) if w > 0]
    else:
        pts = list(N)
    worst, worst_i = 0.0, None
    for i, a in enumerate(A_diag):
        d = float(hull_distance(a, pts))
        if d > worst:
            worst, worst_i = d, i
    if worst <= tol:
        return NecessityResult(True, worst)
    return NecessityResult(False, worst, worst_i, complex(A_diag[worst_i]), worst)


# -- tracial feasibility ------------------------------------------------------------

@dataclass
class FeasibilityWitness:
    gamma: list
    values: list
    weights: list
    targets: list
    block_weights: list
    trace_shift: tuple = None

    def residuals(self):
        """Exact constraint residuals: row sums, trace marginals, values."""
        z = [_cfrac(v) for v in self.values]
        rows = [sum(r) - 1 for r in self.gamma]
        n = len(self.values)
        marg = [sum(w * r[k] for w, r in zip(self.block_weights, self.gamma)) - self.weights[k]
                for k in range(n)]
        vals = []
        for r, beta in zip(self.gamma, self.targets):
            b = _cfrac(beta)
            vals.append((sum(g * zk[0] for g, zk in zip(r, z)) - b[0],
                         sum(g * zk[1] for g, zk in zip(r, z)) - b[1]))
        return {"rows": rows, "marginals": marg, "values": vals}

    def is_exact(self):
        res = self.residuals()
        return (all(v == 0 for v in res["rows"]) and all(v == 0 for v in res["marginals"])
                and all(v == (0, 0) for v in res["values"]))

    def to_json(self):
        return [[fraction_str(g) for g in row] for row in self.gamma]


def _to_complex(z):
    if isinstance(z, (tuple, list)):
        return complex(float(to_fraction(z[0])), float(to_fraction(z[1])))
    if isinstance(z, (Fraction, int)):
        return complex(float(z))
    return complex(z)


def _cfrac(z):
    if isinstance(z, (tuple, list)):
        return to_fraction(z[0]), to_fraction(z[1])
    if isinstance(z, (Fraction, int)):
        return Fraction(z), Fraction(0)
    z = complex(z)
    return to_fraction(z.real), to_fraction(z.imag)


def _feasibility_system(values, weights, blocks):
    z = [_cfrac(v) for v in values]
    n, m = len(z), len(blocks)
    A, b, labels = [], [], []

    def row():
        return [Fraction(0)] * (m * n)

    for j in range(m):
        r = row()
        for k in range(n):
            r[j * n + k] = Fraction(1)
        A.append(r), b.append(Fraction(1)), labels.append(f"row_sum[{j}]")
    for k in range(n):
        r = row()
        for j, (_, w) in enumerate(blocks):
            r[j * n + k] = w
        A.append(r), b.append(weights[k]), labels.append(f"trace[{k}]")
    for j, (beta, _) in enumerate(blocks):
        bre, bim = _cfrac(beta)
        for part, target, name in ((0, bre, "re"), (1, bim, "im")):
            r = row()
            for k in range(n):
                r[j * n + k] = z[k][part]
            A.append(r), b.append(target), labels.append(f"value_{name}[{j}]")
    return A, b, labels


def feasibility_partition(N, A_blocks):
    """Coefficients gamma[j][k] >= 0 splitting each target block over the spectrum.

    Solves exactly: rows sum to 1, ``sum_j w_j gamma[j][k] = omega_k`` and
    ``sum_k z_k gamma[j][k] = beta_j``. Floats are rationalized first.
    Raises :class:`Infeasible` carrying a verified Farkas certificate.
    """
    blocks = _as_blocks(A_blocks)
    blocks, shift = _snap_trace(N, blocks)
    A, b, labels = _feasibility_system(N.values, N.weights, blocks)
    res = solve_feasibility(A, b, labels)
    n = len(N.values)
    if not res.feasible:
        raise Infeasible("no trace-preserving splitting of the target exists", res.certificate)
    gamma = [res.x[j * n:(j + 1) * n] for j in range(len(blocks))]
    return FeasibilityWitness(gamma, list(N.values), list(N.weights),
                              [beta for beta, _ in blocks], [w for _, w in blocks], shift)


def _is_float_data(values):
    return any(not isinstance(v, (tuple, list, Fraction, int)) for v in values)


def _snap_trace(N, blocks, tol=TRACE_SNAP):
    """Absorb float round-off in tau(A) - tau(N) by shifting every target.

    Only applies when some value is a float and the exact mismatch after
    rationalization is at most ``tol``; the shift is returned so it can be
    reported. Since block weights sum to 1, adding the mismatch to every
    target fixes the trace exactly.
    """
    if not _is_float_data(list(N.values) + [beta for beta, _ in blocks]):
        return blocks, None
    z = [_cfrac(v) for v in N.values]
    bs = [_cfrac(beta) for beta, _ in blocks]
    delta = [sum(w * zk[p] for w, zk in zip(N.weights, z))
             - sum(w * bj[p] for (_, w), bj in zip(blocks, bs)) for p in (0, 1)]
    if delta == [0, 0] or max(abs(d) for d in delta) > tol:
        return blocks, None
    snapped = [((bj[0] + delta[0], bj[1] + delta[1]), w) for (_, w), bj in zip(blocks, bs)]
    return snapped, (delta[0], delta[1])


def three_point_shortcut(N, A_blocks):
    """Feasibility for three non-collinear spectral values.

    Feasible exactly when tau(A) = tau(N) and every target lies in the
    triangle; the coefficients are then the barycentric coordinates.
    Returns ``(feasible, gamma)`` with ``gamma`` None when infeasible.
    """
    blocks = _as_blocks(A_blocks)
    if len(N.values) != 3:
        raise InvalidInput("three_point_shortcut needs exactly three values")
    tri = [_cfrac(v) for v in N.values]
    gamma = []
    for beta, _ in blocks:
        coords = barycentric(_cfrac(beta), tri, exact=True)
        if any(c < 0 for c in coords):
            return False, None
        gamma.append(list(coords))
    tau_n = [sum(w * zk[p] for w, zk in zip(N.weights, tri)) for p in (0, 1)]
    tau_a = [sum(w * _cfrac(beta)[p] for beta, w in blocks) for p in (0, 1)]
    if tau_n != tau_a:
        return False, None
    return True, gamma


# -- tracial synthesis ---------------------------------------------------------------

@dataclass
class SynthesisResult:
    dim: int
    unitary: np.ndarray
    normal: np.ndarray
    target: np.ndarray
    report: dict = field(default_factory=dict)

    def diagonal(self):
        """diag(U^* N U) for the diagonal normal N stored as a vector."""
        return (np.abs(self.unitary) ** 2).T @ self.normal

    @property
    def residual(self):
        return float(np.max(np.abs(self.diagonal() - self.target))) if self.dim else 0.0

    def normal_matrix(self):
        return np.diag(self.normal)


def _value_scale(points):
    return max(1.0, sum(abs(_to_complex(z)) for z in points))


def synth_diagonal_tracial(N, A_blocks, eps, max_dim=None):
    """Unitary W and normal N' in M_D with blockwise diag(W^* N' W) close to A.

    The witness from :func:`feasibility_partition` becomes a tracial
    partition over d = lcm(block weight denominators) atoms, realized by
    :func:`carpenter.carpenter_tracial`; then N' = sum_k z_k Q_k with Q_k
    the diagonal patterns.
    """
    if eps <= 0:
        raise InvalidInput("eps must be positive")
    blocks = _as_blocks(A_blocks)
    witness = feasibility_partition(N, blocks)
    d = lcm_of_denominators(w for _, w in blocks)
    atom_block = []
    for j, (_, w) in enumerate(blocks):
        atom_block += [j] * int(w * d)
    n = len(N.values)
    columns = [[witness.gamma[j][k] for j in atom_block] for k in range(n)]
    scale = _value_scale(N.values)
    part = cp.TracialPartition(d, columns, N.weights)
    fam = cp.carpenter_tracial(part, EPS_SAFETY * eps / scale, max_dim=max_dim)
    z = np.array([_to_complex(v) for v in N.values])
    normal = z @ fam.patterns
    b = fam.report["atom_size"]
    D = fam.dim
    beta = np.array([_to_complex(bj) for bj, _ in blocks])
    target = np.repeat(beta[atom_block], b)
    res = SynthesisResult(D, fam.unitary, normal, target)
    diag = res.diagonal()
    pos_block = np.repeat(np.array(atom_block), b)
    per_block = [float(np.max(np.abs(diag[pos_block == j] - beta[j]))) for j in range(len(blocks))]
    traces = fam.traces()
    rounding = max((abs(t - w) for t, w in zip(traces, N.weights)), default=Fraction(0))
    res.report = {
        "D": D, "atoms": d, "atom_size": b, "eps": eps,
        "block_residuals": per_block, "residual": max(per_block),
        "bound": eps + float(sum(abs(zk) for zk in z)) * float(rounding),
        "gamma": witness.to_json(),
        "trace_shift": None if witness.trace_shift is None else
        [float(v) for v in witness.trace_shift],
        "traces": [fraction_str(t) for t in traces],
        "trace_rounding": fraction_str(rounding),
        "trace_exact": rounding == 0,
        "carpenter": fam.report,
    }
    return res


# -- discrete synthesis --------------------------------------------------------------

def _convex_coefficients(value, points):
    """gamma >= 0 with sum 1 and sum gamma_k z_k = value, as floats."""
    n = len(points)
    if n == 1:
        return np.array([1.0])
    A = [[Fraction(1)] * n,
         [_cfrac(z)[0] for z in points],
         [_cfrac(z)[1] for z in points]]
    vre, vim = _cfrac(value)
    res = solve_feasibility(A, [Fraction(1), vre, vim])
    if res.feasible:
        return np.array([float(x) for x in res.x])
    # Within tolerance of the hull but not exactly inside: use the nearest vertex.
    k = int(np.argmin([abs(complex(z) - complex(value)) for z in points]))
    g = np.zeros(n)
    g[k] = 1.0
    return g


def _key(z):
    z = _to_complex(z)
    return (round(z.real, 12), round(z.imag, 12))


def _absorb_block(lam, mu, gamma, beta, z, target, cap=ABSORB_CAP):
    """Size s and essential counts so (lam + sum c_k z_k)/s is within target of beta."""
    for s in range(2, cap + 1):
        c = round_counts(gamma * s - mu, s - 1, 0, s - 1)
        val = (lam + np.dot(c, z)) / s
        if abs(val - beta) < target:
            return s, c
    raise ToleranceUnreachable("cannot absorb a finite eigenvalue within the tolerance")


def synth_diagonal_discrete(N, A, eps, max_dim=None):
    """Truncated diagonal N_M and unitary U with diag(U^* N_M U) close to A.

    Every entry of ``A`` must lie in the hull of the essential values, and
    so must the finite eigenvalues. Each target value is split into convex
    coefficients over the essential values and the resulting partition is
    realized by :func:`carpenter.carpenter_discrete`. Finite eigenvalues are
    then absorbed in extra tail periods: each sits in a flattened block with
    enough essential values that the block average lands on the most
    frequent tail value; the rest of the extra periods are flattened scalar
    blocks. N_M lists finite eigenvalues first, then the other entries in
    block order.
    """
    if eps <= 0:
        raise InvalidInput("eps must be positive")
    max_dim = max_dim or cp.max_dim_default()
    ess = list(N.essential)
    head = [_to_complex(v) for v in A.head]
    tail = [_to_complex(v) for v in A.tail_pattern]
    H, L = len(head), len(tail)
    chk = check_necessity(head + tail, ess, HULL_TOL)
    if not chk:
        raise NecessityViolated("target entry outside the hull of the essential spectrum",
                                chk.index, chk.value, chk.distance)
    finite = N.expanded_finite()
    chk_f = check_necessity(finite, ess, HULL_TOL)
    if not chk_f:
        raise NecessityViolated("finite eigenvalue outside the hull of the essential spectrum",
                                chk_f.index, chk_f.value, chk_f.distance)

    ess_keys = {_key(z) for z in ess}
    if ([_key(v) for v in head] == [_key(v) for v in finite]
            and {_key(v) for v in tail} == ess_keys):
        M = H + L
        normal = np.array(head + tail)
        res = SynthesisResult(M, np.eye(M, dtype=complex), normal, np.array(A.truncate(M)))
        res.report = {"M": M, "path": "identity", "residual": res.residual,
                      "basis_order": list(range(M))}
        return res

    z = np.array(ess)
    n = len(z)
    if not finite:
        near = [ess[int(np.argmin(np.abs(z - v)))] for v in head + tail]
        if all(abs(a - b) < EPS_SAFETY * eps for a, b in zip(near, head + tail)):
            M = H + L
            res = SynthesisResult(M, np.eye(M, dtype=complex), np.array(near),
                                  np.array(head + tail))
            res.report = {"M": M, "path": "nearest", "residual": res.residual,
                          "basis_order": list(range(M))}
            return res

    scale = _value_scale(ess)
    eps_c = EPS_SAFETY * eps / scale
    coeff = {}
    for v in head + tail:
        k = _key(v)
        if k not in coeff:
            coeff[k] = _convex_coefficients(v, ess)
    specs = [cp.DiagonalSpec([coeff[_key(v)][k] for v in head],
                             [coeff[_key(v)][k] for v in tail]) for k in range(n)]
    fam = cp.carpenter_discrete(cp.JointPartitionSpec(specs), eps_c, max_dim=max_dim)
    Mc = fam.dim
    values_c = z @ fam.patterns

    # Absorb finite eigenvalues in whole extra periods.
    blocks = []  # (positions, local unitary, local values)
    extra_periods = 0
    if finite:
        counts = {}
        for p, v in enumerate(tail):
            counts.setdefault(_key(v), []).append(p)
        star = max(counts, key=lambda k: (len(counts[k]), -counts[k][0]))
        beta_star = complex(*star)
        g_star = coeff[star]
        absorb = []
        for lam in finite:
            mu = coeff.get(_key(lam))
            if mu is None:
                mu = _convex_coefficients(lam, ess)
            absorb.append(_absorb_block(lam, mu, g_star, beta_star, z, EPS_SAFETY * eps))
        classes = {k: (len(ps), ps, coeff[k]) for k, ps in counts.items()}
        valid = {}
        for k, (_, _, g) in classes.items():
            sizes = [s for s in range(1, max(64, math.ceil(8 * n / eps_c)) + 1)
                     if cp._scalar_counts(g, s)[1] < eps_c]
            valid[k] = sizes
        need = sum(s for s, _ in absorb)
        E = max(1, math.ceil(need / len(counts[star])))
        while True:
            if Mc + E * L > max_dim:
                raise cp.ModelTooCoarse(f"truncation would exceed max_dim={max_dim}")
            tilings = {}
            for k, (r, _, _) in classes.items():
                R = E * r - (need if k == star else 0)
                t = cp._tile(R, valid[k], valid[k][0]) if R >= 0 else None
                if t is None:
                    break
                tilings[k] = t
            else:
                break
            E += 1
        extra_periods = E
        pos = {k: [Mc + e * L + p for e in range(E) for p in ps] for k, (_, ps, _) in classes.items()}
        cur = {k: 0 for k in classes}
        for lam, (s, c) in zip(finite, absorb):
            vals = [lam] + [zk for zk, ck in zip(z, c) for _ in range(ck)]
            blocks.append((pos[star][cur[star]:cur[star] + s], dft_unitary(s), vals, True))
            cur[star] += s
        for k, t in tilings.items():
            for s in t:
                c, _ = cp._scalar_counts(classes[k][2], s)
                vals = [zk for zk, ck in zip(z, c) for _ in range(ck)]
                blocks.append((pos[k][cur[k]:cur[k] + s], dft_unitary(s), vals, False))
                cur[k] += s

    M = Mc + extra_periods * L
    G = np.zeros((M, M), dtype=complex)
    G[:Mc, :Mc] = fam.unitary
    W = np.zeros(M, dtype=complex)
    W[:Mc] = values_c
    eig_pos = []
    for positions, Ub, vals, has_eig in blocks:
        G[np.ix_(positions, positions)] = Ub
        W[positions] = vals
        if has_eig:
            eig_pos.append(positions[0])
    rest = [i for i in range(M) if i not in set(eig_pos)]
    order = eig_pos + rest
    R = np.zeros((M, M))
    R[np.arange(M), order] = 1.0
    U = R @ G
    normal = W[order]
    res = SynthesisResult(M, U, normal, np.array(A.truncate(M)))
    res.report = {
        "M": M, "path": "carpenter", "eps": eps, "carpenter_eps": eps_c,
        "carpenter_dim": Mc, "extra_periods": extra_periods,
        "absorption_blocks": [len(b[0]) for b in blocks if b[3]],
        "basis_order": order, "residual": res.residual,
        "stage_errors": fam.report["stage_errors"],
        "spectrum_equals_essential": fam.report.get("spectrum_equals_essential"),
    }
    return res


def unitary_residual(U):
    return max_abs(U.conj().T @ U - np.eye(U.shape[0]))
