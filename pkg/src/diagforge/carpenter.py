"""Projection families with prescribed approximate diagonals.

Every construction here ends the same way: a set of diagonal 0/1 patterns
``Q_k`` and one unitary ``U`` with ``P_k = U^* Q_k U``. The unitaries are
direct sums of DFT flattenings (plus one Householder reflection for the
exceptional coordinate of a block), so the diagonals of the ``P_k`` are
averages of pattern entries and can be predicted before any matrix is
formed.
"""

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InfeasibleInput, InvalidInput, ModelTooCoarse, ToleranceUnreachable
from .numkit import dft_unitary
from .rational import fraction_str, round_counts, simplest_between, to_fraction

SUM_TOL = 1e-12
DEFAULT_MAX_DIM = 4096
MAX_HALVINGS = 64
# Exact inputs with denominators up to this take the exact shortcut in the
# rational approximation step.
EXACT_DENOMINATOR_CAP = 4096


def max_dim_default():
    env = os.environ.get("DIAGFORGE_MAX_DIM")
    return int(env) if env else DEFAULT_MAX_DIM


# -- data types -----------------------------------------------------------------

@dataclass(frozen=True)
class DiagonalSpec:
    """Diagonal of an operator on l^2: a finite head then a repeating tail."""

    head: tuple
    tail_pattern: tuple

    def __post_init__(self):
        object.__setattr__(self, "head", tuple(self.head))
        object.__setattr__(self, "tail_pattern", tuple(self.tail_pattern))
        if not self.tail_pattern:
            raise InvalidInput("tail_pattern must be nonempty")

    @property
    def period(self):
        return len(self.tail_pattern)

    def __getitem__(self, i):
        h = len(self.head)
        if i < h:
            return self.head[i]
        return self.tail_pattern[(i - h) % self.period]

    def truncate(self, M):
        if M < len(self.head):
            raise InvalidInput("truncation shorter than the head")
        return [self[i] for i in range(M)]

    def essential_values(self):
        return set(self.tail_pattern)


@dataclass(frozen=True)
class JointPartitionSpec:
    specs: tuple

    def __post_init__(self):
        specs = tuple(self.specs)
        object.__setattr__(self, "specs", specs)
        if not specs:
            raise InfeasibleInput("empty partition")
        if len({len(s.head) for s in specs}) != 1 or len({s.period for s in specs}) != 1:
            raise InfeasibleInput("specs must share head length and period")
        for arr in (self.head_array(), self.tail_array()):
            if np.any(np.abs(arr.imag) > SUM_TOL):
                raise InfeasibleInput("partition entries must be real")
            re = arr.real
            if np.any(re < -SUM_TOL) or np.any(re > 1 + SUM_TOL):
                raise InfeasibleInput("partition entries must lie in [0, 1]")
            if arr.shape[1] and np.max(np.abs(re.sum(axis=0) - 1)) > SUM_TOL:
                raise InfeasibleInput("partition entries must sum to 1 at every index")

    @property
    def n(self):
        return len(self.specs)

    @property
    def head_length(self):
        return len(self.specs[0].head)

    @property
    def period(self):
        return self.specs[0].period

    def head_array(self):
        return np.array([[complex(v) for v in s.head] for s in self.specs]).reshape(
            len(self.specs), -1)

    def tail_array(self):
        return np.array([[complex(v) for v in s.tail_pattern] for s in self.specs])

    def truncate(self, M):
        return np.array([[complex(v).real for v in s.truncate(M)] for s in self.specs])


@dataclass
class TracialPartition:
    """Partition of unity over ``dim`` atoms of equal trace 1/dim."""

    dim: int
    columns: list
    trace_targets: list = None

    def __post_init__(self):
        self.columns = [list(c) for c in self.columns]
        if self.dim < 1 or not self.columns:
            raise InfeasibleInput("tracial partition needs dim >= 1 and a column")
        if any(len(c) != self.dim for c in self.columns):
            raise InfeasibleInput("every column must have length dim")
        arr = np.array([[float(x) for x in c] for c in self.columns])
        if np.any(arr < -SUM_TOL) or np.any(arr > 1 + SUM_TOL):
            raise InfeasibleInput("column entries must lie in [0, 1]")
        if np.max(np.abs(arr.sum(axis=0) - 1)) > SUM_TOL:
            raise InfeasibleInput("columns must sum to 1 pointwise")
        averages = [sum(to_fraction(x) for x in c) / self.dim for c in self.columns]
        if self.trace_targets is None:
            self.trace_targets = averages
        self.trace_targets = [to_fraction(t) for t in self.trace_targets]
        if len(self.trace_targets) != len(self.columns):
            raise InfeasibleInput("one trace target per column")
        if sum(self.trace_targets) != 1:
            raise InfeasibleInput("trace targets must sum to exactly 1")
        for t, a in zip(self.trace_targets, averages):
            if abs(float(t - a)) > 1e-9:
                raise InfeasibleInput("trace target disagrees with the column average")

    @property
    def n(self):
        return len(self.columns)


@dataclass
class ProjectionFamily:
    """Projections ``P_k = U^* diag(patterns[k]) U`` and their diagonal residuals."""

    projections: list
    unitary: np.ndarray
    patterns: np.ndarray
    target: np.ndarray
    report: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.unitary.shape[0]

    @property
    def n(self):
        return len(self.projections)

    def diagonals(self):
        return np.array([np.diagonal(P).real for P in self.projections])

    def residuals(self):
        return np.max(np.abs(self.diagonals() - self.target), axis=1)

    @property
    def residual(self):
        return float(np.max(self.residuals()))

    def traces(self):
        """Exact normalized traces from the patterns (pattern sums / dim)."""
        return [Fraction(int(round(p.sum())), self.dim) for p in self.patterns]


def _family_from_patterns(U, patterns, target, report):
    patterns = np.asarray(patterns, dtype=float)
    projections = []
    for pat in patterns:
        rows = U[pat > 0.5, :]
        projections.append(rows.conj().T @ rows)
    return ProjectionFamily(projections, U, patterns, np.asarray(target, float), report)


# -- rational approximation lemmas -----------------------------------------------------

def _ratio_errors(r, q):
    sr, sq = sum(r), sum(q)
    rest = [a - b for a, b in zip(r, q)]
    srest = sum(rest)
    e2 = max(abs(a / sr - b / sq) for a, b in zip(r, q))
    e3 = max(abs(a / sr - c / srest) for a, c in zip(r, rest))
    return e2, e3


def approx_rationals_step(r, eps, max_halvings=MAX_HALVINGS):
    """Rationals ``q_k`` in ``[r_k/2, r_k)`` whose proportions track those of ``r``.

    Both ``q / sum(q)`` and ``(r - q) / sum(r - q)`` stay within ``eps`` of
    ``r / sum(r)`` coordinatewise. Each ``q_k`` is the smallest-denominator
    rational in ``[r_k/2, r_k/2 + delta)``, with ``delta`` starting at
    ``min(r)/2`` and halved until all bounds hold. Exact inputs with small
    denominators take ``q = r/2``, which meets every bound with error 0.
    """
    if eps <= 0:
        raise InvalidInput("eps must be positive")
    r = [Fraction(x) if not isinstance(x, str) else to_fraction(x) for x in r]
    if not r or any(not (0 < x <= 1) for x in r):
        raise InvalidInput("approx_rationals_step needs entries in (0, 1]")
    eps = Fraction(eps)
    if all(x.denominator <= EXACT_DENOMINATOR_CAP for x in r):
        return [x / 2 for x in r]
    delta = min(r) / 2
    for _ in range(max_halvings):
        q = [simplest_between(x / 2, x / 2 + delta) for x in r]
        e2, e3 = _ratio_errors(r, q)
        if e2 < eps and e3 < eps:
            return q
        delta /= 2
    raise ToleranceUnreachable(f"no rational step within eps={float(eps)} after "
                               f"{max_halvings} halvings")


@dataclass
class RationalTable:
    rows: list
    remainder: list

    @property
    def depth(self):
        return len(self.rows)

    def all_rows(self):
        """Rows followed by the remainder row; columns then sum exactly to p."""
        return self.rows + [self.remainder]

    def to_json(self):
        return {"rows": [[fraction_str(x) for x in row] for row in self.rows],
                "remainder": [fraction_str(x) for x in self.remainder]}


def approx_rationals_table(p, eps, depth=None):
    """Rows of rationals whose columns sum towards ``p`` and whose row
    proportions all stay within ``eps`` of ``p``.

    Row ``l`` comes from :func:`approx_rationals_step` applied to what is
    left of ``p`` after rows ``1..l-1``, at tolerance ``eps / 2**l``. The
    leftover after ``depth`` rows is returned as ``remainder``.
    """
    p = [to_fraction(x) for x in p]
    if not p or any(not (0 < x <= 1) for x in p):
        raise InvalidInput("table entries must lie in (0, 1]")
    total = sum(p)
    if abs(float(total) - 1) > SUM_TOL:
        raise InvalidInput("table entries must sum to 1")
    p = [x / total for x in p]
    if depth is None:
        depth = max(1, math.ceil(math.log2(2 / eps)) + 1)
    rows, left = [], list(p)
    for level in range(1, depth + 1):
        row = approx_rationals_step(left, Fraction(eps) / 2**level)
        rows.append(row)
        left = [a - b for a, b in zip(left, row)]
    return RationalTable(rows, left)


# -- the single block ----------------------------------------------------------------

@dataclass
class _BlockPlan:
    """Layout of one block: exceptional index, then merged sub-blocks.

    ``G`` acts on the ``n1`` first-part coordinates and ``first_patterns``
    (n x n1) are the 0/1 diagonals there. Sub-block ``j`` (j = 1..n1-1) is
    first-part coordinate ``j`` plus ``m[j-1]`` copy coordinates of which
    ``copies[j-1][k]`` belong to projection ``k``.
    """

    G: np.ndarray
    first_patterns: np.ndarray
    m: list
    copies: list
    error: float
    method: str

    @property
    def n1(self):
        return self.G.shape[0]

    @property
    def dim(self):
        return self.n1 + sum(self.m)

    def assemble(self):
        """Local unitary and patterns in local coordinate order.

        Local order: first-part 0, then for each sub-block its first-part
        coordinate followed by its copies.
        """
        n = self.first_patterns.shape[0]
        ell = self.dim
        first_pos = [0]
        blocks = []
        pos = 1
        for j in range(1, self.n1):
            first_pos.append(pos)
            blocks.append(list(range(pos, pos + self.m[j - 1] + 1)))
            pos += self.m[j - 1] + 1
        patterns = np.zeros((n, ell))
        Gbig = np.eye(ell, dtype=complex)
        Gbig[np.ix_(first_pos, first_pos)] = self.G
        patterns[:, first_pos] = self.first_patterns
        U2 = np.eye(ell, dtype=complex)
        for j, blk in enumerate(blocks):
            start = blk[1] if len(blk) > 1 else None
            cursor = start
            for k in range(n):
                c = self.copies[j][k]
                if c:
                    patterns[k, cursor:cursor + c] = 1.0
                    cursor += c
            U2[np.ix_(blk, blk)] = dft_unitary(len(blk))
        return Gbig @ U2, patterns


def _householder_with_first_row(v):
    """Real symmetric orthogonal matrix whose first row (and column) is ``v``."""
    n = len(v)
    w = -np.asarray(v, float).copy()
    w[0] += 1.0
    nw = w @ w
    if nw < 1e-30:
        return np.eye(n)
    return np.eye(n) - 2.0 * np.outer(w, w) / nw


def _merge_counts(x, beta, m):
    """Copy counts for a sub-block of size m + 1 seeded by first-part values ``x``."""
    t = [b * (m + 1) - xi for xi, b in zip(x, beta)]
    c = round_counts(t, m, 0, m)
    err = max(abs((xi + ci) / (m + 1) - b) for xi, ci, b in zip(x, c, beta))
    return c, err


def _compact_plan(alpha, beta, target, max_m=100000):
    alpha = np.clip(np.asarray(alpha, float), 0, 1)
    beta = [float(b) for b in beta]
    n = len(alpha)
    G = _householder_with_first_row(np.sqrt(alpha))
    # P_k = u_k u_k^T with u_k column k of G: G^* diag(e_k) G since G = G^T.
    x = G**2
    ms, copies, err = [], [], float(np.max(np.abs(x[0] - alpha))) if n else 0.0
    for j in range(1, n):
        for m in range(max_m + 1):
            c, e = _merge_counts(x[j], beta, m)
            if e < target:
                break
        else:
            raise ToleranceUnreachable("no sub-block size meets the tolerance")
        ms.append(m)
        copies.append(c)
        err = max(err, e)
    return _BlockPlan(G.astype(complex), np.eye(n), ms, copies, err, "compact")


def _common_denominator(values, target, max_den=100000):
    """Smallest N with integer counts a (sum N) and max |a/N - v| < target."""
    for N in range(1, max_den + 1):
        a = round_counts([v * N for v in values], N, 0, N)
        err = max(abs(ai / N - v) for ai, v in zip(a, values))
        if err < target:
            return N, a, err
    raise ToleranceUnreachable("no common denominator meets the tolerance")


def _proof_plan(alpha, beta, target, max_n0=100000):
    """Block layout exactly as the two-stage flattening argument builds it."""
    alpha = [float(a) for a in alpha]
    beta = [float(b) for b in beta]
    n = len(alpha)
    N1, a, err1 = _common_denominator(alpha, target)
    N2, b, _ = _common_denominator(beta, target / 2)
    for N0 in range(1, max_n0 + 1):
        vals = [(ak / N1 + N0 * bk) / (N0 * N2 + 1) for ak, bk in zip(a, b)]
        err = max(abs(v - bt) for v, bt in zip(vals, beta))
        if err < target:
            break
    else:
        raise ToleranceUnreachable("no N0 meets the tolerance")
    first = np.zeros((n, N1))
    cursor = 0
    for k in range(n):
        first[k, cursor:cursor + a[k]] = 1.0
        cursor += a[k]
    m = N0 * N2
    copies = [[N0 * bk for bk in b] for _ in range(N1 - 1)]
    return _BlockPlan(dft_unitary(N1), first, [m] * (N1 - 1), copies, max(err1, err), "proof")


def _check_partition_vector(v, name):
    v = [float(x) for x in v]
    if any(x < -SUM_TOL or x > 1 + SUM_TOL for x in v):
        raise InfeasibleInput(f"{name} entries must lie in [0, 1]")
    if abs(sum(v) - 1) > SUM_TOL:
        raise InfeasibleInput(f"{name} must sum to 1")
    return v


def _strict(eps):
    return eps * (1 - 1e-9) - 1e-12


def carpenter_block(alpha, beta, eps, method="compact"):
    """Projections in dimension l whose diagonals read (alpha_k, beta_k, ..., beta_k).

    ``method="proof"`` rationalizes alpha and beta with common denominators
    N1, N2, flattens the N1 part with the N1-point DFT and each re-paired
    block of size N0*N2 + 1 with its own DFT; dimension N1 + (N1-1)*N0*N2.
    ``method="compact"`` (default) replaces the first flattening by a
    Householder reflection whose first row is sqrt(alpha), so the N1 part
    has size n and each re-paired block is sized independently; dimensions
    drop from O(1/eps^2) to O(n/eps).

    Returns a :class:`ProjectionFamily`; ``family.dim`` is l.
    """
    if eps <= 0:
        raise InvalidInput("eps must be positive")
    alpha = _check_partition_vector(alpha, "alpha")
    beta = _check_partition_vector(beta, "beta")
    if len(alpha) != len(beta):
        raise InfeasibleInput("alpha and beta must have equal length")
    target = _strict(eps)
    if method == "compact":
        plan = _compact_plan(alpha, beta, target)
    elif method == "proof":
        plan = _proof_plan(alpha, beta, target)
    else:
        raise InvalidInput(f"unknown method {method!r}")
    U, patterns = plan.assemble()
    tgt = np.tile(np.array(beta)[:, None], (1, plan.dim))
    tgt[:, 0] = alpha
    report = {"method": method, "dim": plan.dim, "eps": eps, "sub_block_sizes":
              [m + 1 for m in plan.m], "predicted_error": plan.error}
    return _family_from_patterns(U, patterns, tgt, report)


# -- discrete MASA truncation --------------------------------------------------------

def _scalar_counts(gamma, s):
    """Counts for a flattened block of size s; every nonzero class stays nontrivial."""
    n = len(gamma)
    lo, hi = (1, s - 1) if n > 1 else (0, s)
    if n * lo > s:
        return None, math.inf
    c = round_counts([g * s for g in gamma], s, lo, hi)
    return c, max(abs(ci / s - g) for ci, g in zip(c, gamma))


def _valid_sizes(gamma, target, cap):
    return [s for s in range(1, cap + 1) if _scalar_counts(gamma, s)[1] < target]


def _tile(R, sizes, prefer):
    """Write R as a sum of ``sizes`` using as few non-``prefer`` parts as possible.

    Returns the parts with fillers first, or None when impossible.
    """
    if R == 0:
        return []
    INF = math.inf
    cost = [INF] * (R + 1)
    parent = [0] * (R + 1)
    cost[0] = 0
    for v in range(1, R + 1):
        for s in sizes:
            if s <= v and cost[v - s] < INF:
                c = cost[v - s] + (0 if s == prefer else 1)
                if c < cost[v]:
                    cost[v], parent[v] = c, s
    if cost[R] == INF:
        return None
    parts, v = [], R
    while v:
        parts.append(parent[v])
        v -= parent[v]
    return sorted(parts, key=lambda s: s == prefer)


def _class_key(col):
    return tuple(round(float(x), 12) for x in col)


def carpenter_discrete(joint, eps, max_dim=None):
    """Truncated discrete-MASA construction.

    Tail coordinates are bucketed by their value tuple. Each head coordinate
    is glued to coordinates of one bucket through :func:`carpenter_block`
    (head value as the exceptional entry, bucket value elsewhere); the rest
    of every bucket is tiled by flattened scalar blocks, at least one per
    bucket, whose patterns have both 0 and 1 for every active projection so
    that repeating them forever leaves spectrum equal to essential spectrum.
    The truncation dimension ``M = head + K * period`` is the smallest for
    which every bucket tiles exactly.

    Returns a :class:`ProjectionFamily` with ``report["M"]`` and
    ``report["index_map"]`` (block membership of each truncated coordinate).
    """
    if eps <= 0:
        raise InvalidInput("eps must be positive")
    max_dim = max_dim or max_dim_default()
    n_all, H, L = joint.n, joint.head_length, joint.period
    head = joint.head_array().real
    tail = joint.tail_array().real
    zero = [k for k in range(n_all) if not np.any(head[k]) and not np.any(tail[k])]
    active = [k for k in range(n_all) if k not in zero]
    n = len(active)
    target = _strict(min(eps, 1.0))
    report = {"eps": eps, "dropped_zero_columns": zero, "stage_errors": {
        "essential_snap": 0.0, "cover_snap": 0.0, "assembly": 0.0}}

    if n == 1:
        M = H + L
        U = np.eye(M, dtype=complex)
        pats = np.zeros((n_all, M))
        pats[active[0]] = 1.0
        report.update(M=M, index_map=[{"block": 0, "kind": "identity"}] * M,
                      spectrum_equals_essential=True)
        return _family_from_patterns(U, pats, joint.truncate(M), report)

    h = head[active]
    t = tail[active]
    classes = {}
    for p in range(L):
        classes.setdefault(_class_key(t[:, p]), []).append(p)
    keys = list(classes)
    gammas = {c: t[:, classes[c][0]] for c in keys}
    rate = {c: len(classes[c]) for c in keys}

    cap = max(64, math.ceil(8 * n / target))
    valid = {}
    for c in keys:
        valid[c] = [s for s in _valid_sizes(gammas[c], target, cap) if s >= n]
        if not valid[c]:
            raise ToleranceUnreachable("no scalar block size meets the tolerance")
    smin = {c: valid[c][0] for c in keys}

    # Exceptional blocks: one per head coordinate, glued to the bucket that
    # keeps the required number of periods smallest.
    plans, owner = [], []
    used = {c: 0 for c in keys}
    for i in range(H):
        candidates = {}
        for c in keys:
            plan = _compact_plan(h[:, i], gammas[c], target)
            candidates[c] = plan
        c_best = min(keys, key=lambda c: ((used[c] + candidates[c].dim - 1 + smin[c]) / rate[c],
                                          keys.index(c)))
        plans.append(candidates[c_best])
        owner.append(c_best)
        used[c_best] += candidates[c_best].dim - 1

    K = max(math.ceil((used[c] + smin[c]) / rate[c]) for c in keys)
    while True:
        if H + K * L > max_dim:
            raise ModelTooCoarse(f"truncation would exceed max_dim={max_dim}")
        tilings = {}
        for c in keys:
            tiling = _tile(K * rate[c] - used[c], valid[c], smin[c])
            if tiling is None or not tiling:
                break
            tilings[c] = tiling
        else:
            break
        K += 1
    M = H + K * L

    U = np.zeros((M, M), dtype=complex)
    pats = np.zeros((n, M))
    index_map = [None] * M
    positions = {c: [H + q * L + p for q in range(K) for p in classes[c]] for c in keys}
    cursor = {c: 0 for c in keys}
    block_id = 0
    errors = {"exception_blocks": 0.0, "scalar_blocks": 0.0}

    def place(pos, Ub, pb, kind, cls):
        nonlocal block_id
        U[np.ix_(pos, pos)] = Ub
        pats[:, pos] = pb
        for local, g in enumerate(pos):
            index_map[g] = {"block": block_id, "kind": kind, "local": local,
                            "class": list(cls)}
        block_id += 1

    for i, (plan, c) in enumerate(zip(plans, owner)):
        Ub, pb = plan.assemble()
        take = plan.dim - 1
        pos = [i] + positions[c][cursor[c]:cursor[c] + take]
        cursor[c] += take
        place(pos, Ub, pb, "exception", c)
        errors["exception_blocks"] = max(errors["exception_blocks"], plan.error)

    nontrivial = True
    for c in keys:
        for s in tilings[c]:
            counts, err = _scalar_counts(gammas[c], s)
            pb = np.zeros((n, s))
            start = 0
            for k, ck in enumerate(counts):
                pb[k, start:start + ck] = 1.0
                start += ck
            pos = positions[c][cursor[c]:cursor[c] + s]
            cursor[c] += s
            place(pos, dft_unitary(s), pb, "scalar", c)
            errors["scalar_blocks"] = max(errors["scalar_blocks"], err)
        rep_counts, _ = _scalar_counts(gammas[c], tilings[c][-1])
        nontrivial &= all(0 < ck < tilings[c][-1] for ck in rep_counts)

    full = np.zeros((n_all, M))
    full[active] = pats
    report["stage_errors"].update(errors)
    report.update(M=M, periods=K, index_map=index_map, spectrum_equals_essential=nontrivial,
                  classes=[{"value": list(c), "per_period": rate[c],
                            "repeating_block": tilings[c][-1]} for c in keys])
    return _family_from_patterns(U, full, joint.truncate(M), report)


# -- tracial matrix model -----------------------------------------------------------

def _round_matrix(c, b, row_totals):
    """Integer matrix a (n x d) with columns summing to b, rows to ``row_totals``,
    and every entry the floor or ceiling of ``b * c``. None if impossible."""
    import networkx as nx

    n, d = c.shape
    scaled = c * b
    lo = np.floor(scaled + 1e-12).astype(int)
    lo = np.minimum(lo, b)
    hi = np.minimum(np.ceil(scaled - 1e-12).astype(int), b)
    hi = np.maximum(hi, lo)
    row_need = np.asarray(row_totals) - lo.sum(axis=1)
    col_need = b - lo.sum(axis=0)
    if np.any(row_need < 0) or np.any(col_need < 0) or row_need.sum() != col_need.sum():
        return None
    need = int(row_need.sum())
    if need == 0:
        return lo
    G = nx.DiGraph()
    for k in range(n):
        if row_need[k]:
            G.add_edge("s", ("r", k), capacity=int(row_need[k]))
    for i in range(d):
        if col_need[i]:
            G.add_edge(("c", i), "t", capacity=int(col_need[i]))
    for k in range(n):
        for i in range(d):
            if hi[k, i] > lo[k, i] and row_need[k] and col_need[i]:
                G.add_edge(("r", k), ("c", i), capacity=int(hi[k, i] - lo[k, i]))
    if "s" not in G or "t" not in G:
        return None
    value, flow = nx.maximum_flow(G, "s", "t")
    if value != need:
        return None
    a = lo.copy()
    for k in range(n):
        for node, f in flow.get(("r", k), {}).items():
            a[k, node[1]] += f
    return a


def _flatten_atoms(counts, b):
    """Patterns and block-diagonal DFT unitary for atoms of size b."""
    n, d = counts.shape
    D = d * b
    patterns = np.zeros((n, D))
    U = np.zeros((D, D), dtype=complex)
    V = dft_unitary(b)
    for i in range(d):
        base = i * b
        U[base:base + b, base:base + b] = V
        cursor = base
        for k in range(n):
            patterns[k, cursor:cursor + counts[k, i]] = 1.0
            cursor += counts[k, i]
    return U, patterns


def _exact_denominator(values):
    fr = [Fraction(float(v)) if not isinstance(v, Fraction) else v for v in values]
    if all(q.denominator <= EXACT_DENOMINATOR_CAP for q in fr):
        return math.lcm(*(q.denominator for q in fr))
    return None


def carpenter_tracial(part, eps, max_dim=None):
    """Tracial construction in the matrix model M_D, D = part.dim * b.

    Every atom of ``part`` (trace 1/d) is split into b equal sub-atoms; the
    counts a[k, i] of sub-atoms of atom i given to projection k are the
    floor or ceiling of b * columns[k][i], with row sums fixed to the trace
    counts round(trace_targets[k] * D). Each atom is then flattened by the
    b-point DFT, so the diagonal of P_k on atom i is a[k, i] / b.

    When every entry is rational with small denominators, b is their least
    common denominator and the result is exact. Otherwise b is the least
    value meeting ``eps``.
    """
    if eps <= 0:
        raise InvalidInput("eps must be positive")
    max_dim = max_dim or max_dim_default()
    d, n = part.dim, part.n
    c = np.array([[float(x) for x in col] for col in part.columns])
    omega = part.trace_targets
    target = _strict(eps)

    entries = [x for col in part.columns for x in col]
    den = _exact_denominator(entries)
    trace_den = math.lcm(*(Fraction(t * d).denominator for t in omega))
    candidates = []
    if den is not None and d * math.lcm(den, trace_den) <= max_dim:
        candidates.append(math.lcm(den, trace_den))
    candidates.extend(range(1, max_dim // d + 1))

    chosen = None
    for b in candidates:
        D = d * b
        totals = round_counts([float(t) * D for t in omega], D, 0, D)
        err = np.max(np.abs(np.round(c * b) / b - c)) if b else math.inf
        if err >= target and b != candidates[0]:
            continue
        counts = _round_matrix(c, b, totals)
        if counts is None:
            continue
        err = float(np.max(np.abs(counts / b - c)))
        if err < target or err <= 1e-12:
            chosen = (b, counts, totals, err)
            break
    if chosen is None:
        raise ModelTooCoarse(f"no model dimension up to {max_dim} meets eps={eps}")
    b, counts, totals, err = chosen
    D = d * b
    U, patterns = _flatten_atoms(counts, b)
    tgt = np.repeat(c, b, axis=1)
    traces = [Fraction(int(t), D) for t in totals]
    report = {
        "D": D, "atom_size": b, "eps": eps, "predicted_error": err,
        "counts": counts.tolist(),
        "traces": [fraction_str(t) for t in traces],
        "trace_targets": [fraction_str(t) for t in omega],
        "trace_errors": [fraction_str(abs(t - w)) for t, w in zip(traces, omega)],
        "trace_exact": all(t == w for t, w in zip(traces, omega)),
    }
    positive = [k for k, w in enumerate(omega) if w > 0]
    if positive and len(positive) == n:
        try:
            report["rational_table"] = approx_rationals_table(omega, eps).to_json()
        except (InvalidInput, ToleranceUnreachable):
            pass
    return _family_from_patterns(U, patterns, tgt, report)


# -- UHF tower ----------------------------------------------------------------------

def carpenter_uhf(columns, eps, max_level=None, max_dim=None):
    """Dyadic construction inside the tower M_{2^m} -> M_{2^j}.

    ``columns`` are n vectors of length 2^m. At level j each diagonal entry
    becomes a block of 2^(j-m) sub-entries whose 0/1 counts are rounded
    from the target and flattened by the DFT. The level is the least one
    at which every diagonal is within ``eps`` and every nonzero column gets
    a nonzero projection. Exactly zero columns are returned as zero
    matrices (noted in the report). Returns ``(j, family)``.
    """
    if eps <= 0:
        raise InvalidInput("eps must be positive")
    c_all = np.array([[float(x) for x in col] for col in columns])
    if c_all.ndim != 2 or c_all.shape[0] == 0:
        raise InvalidInput("columns must be a nonempty list of vectors")
    size = c_all.shape[1]
    m = int(round(math.log2(size))) if size else -1
    if size < 1 or 2**m != size:
        raise InvalidInput("column length must be a power of two")
    if np.any(c_all < -SUM_TOL) or np.any(c_all > 1 + SUM_TOL):
        raise InfeasibleInput("entries must lie in [0, 1]")
    if np.max(np.abs(c_all.sum(axis=0) - 1)) > SUM_TOL:
        raise InfeasibleInput("columns must sum to 1 pointwise")
    max_dim = max_dim or max_dim_default()
    if max_level is None:
        max_level = int(math.floor(math.log2(max_dim)))
    zero = [k for k in range(len(c_all)) if not np.any(c_all[k])]
    active = [k for k in range(len(c_all)) if k not in zero]
    c = c_all[active]
    target = _strict(eps)
    for j in range(m, max_level + 1):
        b = 2 ** (j - m)
        counts = np.array([round_counts(c[:, i] * b, b, 0, b) for i in range(size)]).T
        err = float(np.max(np.abs(counts / b - c)))
        if err < target and np.all(counts.sum(axis=1) > 0):
            break
    else:
        raise ModelTooCoarse(f"no tower level up to {max_level} meets eps={eps}")
    U, pats = _flatten_atoms(counts, b)
    full = np.zeros((len(c_all), size * b))
    full[active] = pats
    report = {"level": j, "m": m, "D": size * b, "eps": eps, "predicted_error": err,
              "dropped_zero_columns": zero,
              "traces": [fraction_str(Fraction(int(p.sum()), size * b)) for p in full]}
    return j, _family_from_patterns(U, full, np.repeat(c_all, b, axis=1), report)
