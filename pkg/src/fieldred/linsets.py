"""F_q-linear sets B(U) in PG(r-1, q^t), witness enumeration and the Condition (A)/(B) decisions."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels, linalg
from .errors import InvariantViolation, UnsupportedSize
from .gf import FieldError
from .projgeo import PointSpace, Subspace, enumerate_subspaces
from .reduction import VfrMap, blowup_batch
from .semilinear import gl_matrices
from .spreads import gammal_arrays

GROUP_LIMIT = 10**7
DFS_VECTOR_LIMIT = 1 << 12


@dataclass
class LinearSet:
    f: VfrMap
    witness: Subspace
    points: np.ndarray  # sorted indices into PointSpace(f.big, f.r)
    weights: dict  # point index -> weight

    @property
    def size(self) -> int:
        return len(self.points)

    def spectrum(self) -> dict:
        out: dict = {}
        for w in self.weights.values():
            out[w] = out.get(w, 0) + 1
        return dict(sorted(out.items()))

    def point_vectors(self) -> np.ndarray:
        return PointSpace(self.f.big, self.f.r).vectors[self.points]


def _log_q(x: int, q: int) -> int:
    w = 0
    while x > 1:
        x //= q
        w += 1
    return w


def linset_from_subspace(f: VfrMap, U: Subspace) -> LinearSet:
    if U.ctx != f.small or U.n != f.n:
        raise FieldError("witness does not live in F_q^{rt}")
    bps = PointSpace(f.big, f.r)
    if U.dim == 0:
        return LinearSet(f, U, np.zeros(0, dtype=np.int64), {})
    vecs = U.vectors()[1:]
    pts = bps.index(f.inverse(vecs))
    uniq, counts = np.unique(pts, return_counts=True)
    weights = {int(p): _log_q(int(c) + 1, f.q) for p, c in zip(uniq, counts)}
    ls = LinearSet(f, U, uniq, weights)
    if sum(f.q**w - 1 for w in weights.values()) != f.q**U.dim - 1:
        raise InvariantViolation("weights do not partition the witness")
    return ls


def subspace_from_vectors(f: VfrMap, big_vectors) -> Subspace:
    return Subspace.from_rows(f.small, f.apply(np.asarray(big_vectors, dtype=np.int64)), f.n)


def pseudoregulus_witness(f: VfrMap, s: int = 1) -> Subspace:
    """{F((lam, lam^(q^s))) : lam in F_{q^t}}."""
    if f.r != 2:
        raise FieldError("pseudoregulus witness needs r = 2")
    lam = np.array(f.basis, dtype=np.int64)
    other = f.big.frob_array(lam, s * f.small.k)
    return subspace_from_vectors(f, np.stack([lam, other], axis=1))


def subgeometry_witness(f: VfrMap) -> Subspace:
    """F(F_q^r) (embedded coordinates): a canonical subgeometry PG(r-1, q)."""
    return subspace_from_vectors(f, np.eye(f.r, dtype=np.int64))


def block_witness(f: VfrMap, v) -> Subspace:
    from .reduction import field_reduce_vector

    return field_reduce_vector(f, v)


# -- witness enumeration --------------------------------------------------------------

@dataclass
class WitnessResult:
    count: int
    witnesses: list | None
    nodes: int
    exhausted: bool


def _fibers(f: VfrMap, L: LinearSet):
    q, nd = f.q, f.n
    codes = np.arange(q**nd, dtype=np.int64)
    vecs = f.small_vectors(codes)
    bps = PointSpace(f.big, f.r)
    pts = bps.index(f.inverse(vecs))
    pos = np.full(bps.count + 1, -1, dtype=np.int64)
    pos[L.points] = np.arange(len(L.points))
    fiber = np.where(pts >= 0, pos[pts], -1)
    allowed = fiber >= 0
    return allowed, np.maximum(fiber, 0)


def _leading_one(codes, q, nd):
    out = []
    for v in codes:
        v = int(v)
        hp = nd - 1
        while hp >= 0 and (v // q**hp) % q == 0:
            hp -= 1
        if hp >= 0 and (v // q**hp) % q == 1:
            out.append(v)
    return np.array(out, dtype=np.int64)


def enumerate_witnesses(
    f: VfrMap,
    L: LinearSet,
    n: int,
    count_only: bool = False,
    workers: int = 1,
    node_budget: int = 0,
    max_out: int = 100000,
) -> WitnessResult:
    """All n-dimensional U' with B(U') = L (as point sets), by fibre-constrained backtracking."""
    if L.size == 0:
        raise FieldError("linear set is empty")
    q = f.q
    if f.small.k != 1:
        return _brute_force_witnesses(f, L, n, count_only, node_budget)
    if q**f.n > DFS_VECTOR_LIMIT:
        raise UnsupportedSize(f"F_{q}^{f.n} too large for witness search")
    allowed, fiber = _fibers(f, L)
    first = _leading_one(np.flatnonzero(allowed), q, f.n)
    parts = [first[i::workers] for i in range(workers)] if workers > 1 else [first]
    parts = [np.sort(p) for p in parts if len(p)]

    # the node budget is shared out evenly so the total never exceeds it
    share = -(-node_budget // len(parts)) if node_budget > 0 else 0

    def run(part):
        return kernels.witness_dfs(allowed, fiber, L.size, q, f.n, n, part, count_only, max_out, share)

    if len(parts) > 1:
        with ThreadPoolExecutor(max_workers=len(parts)) as ex:
            results = list(ex.map(run, parts))
    else:
        results = [run(p) for p in parts]
    count = sum(int(r[0]) for r in results)
    nodes = sum(int(r[1]) for r in results)
    exhausted = all(bool(r[3]) for r in results)
    witnesses = None
    if not count_only:
        if count > max_out * len(results):
            raise UnsupportedSize("too many witnesses to list; use count-only mode")
        witnesses = []
        for r in results:
            for row in r[2][: int(r[0])]:
                witnesses.append(Subspace.from_rows(f.small, f.small_vectors(row), f.n))
        witnesses = sorted(set(witnesses))
        if len(witnesses) != count:
            raise InvariantViolation("witness search produced duplicates")
    return WitnessResult(count, witnesses, nodes, exhausted)


def _brute_force_witnesses(f: VfrMap, L: LinearSet, n: int, count_only: bool = False, node_budget: int = 0) -> WitnessResult:
    target = set(L.points.tolist())
    found = []
    nodes = 0
    bps = PointSpace(f.big, f.r)
    for U in enumerate_subspaces(f.n, n, f.small):
        nodes += 1
        if node_budget and nodes > node_budget:
            return WitnessResult(len(found), None, nodes, False)
        pts = set(bps.index(f.inverse(U.vectors()[1:])).tolist())
        if pts == target:
            found.append(U)
    return WitnessResult(len(found), None if count_only else found, nodes, True)


def brute_force_witnesses(f: VfrMap, L: LinearSet, n: int) -> list:
    """Oracle: scan every n-subspace of F_q^{rt}."""
    return _brute_force_witnesses(f, L, n).witnesses


# -- stabilisers -------------------------------------------------------------------------

def _pgammal_reps(f: VfrMap):
    big, r = f.big, f.r
    if big.size ** (r * r) > (1 << 24):
        raise UnsupportedSize("PGammaL too large to enumerate")
    mats = gl_matrices(big, r)
    flat = mats.reshape(len(mats), -1)
    first = flat[np.arange(len(flat)), np.argmax(flat != 0, axis=1)]
    reps = mats[first == 1]
    if len(reps) * big.k > GROUP_LIMIT:
        raise UnsupportedSize("PGammaL too large to enumerate")
    return reps


@dataclass
class LinsetStabiliser:
    order: int
    mats: np.ndarray  # normalised matrices
    exps: np.ndarray
    enumerated: int


def stab_linset(L: LinearSet) -> LinsetStabiliser:
    """Setwise stabiliser of the point set L in PGammaL(r, q^t), by filtering the whole group."""
    f = L.f
    big = f.big
    reps = _pgammal_reps(f)
    bps = PointSpace(big, f.r)
    inL = np.zeros(bps.count, dtype=bool)
    inL[L.points] = True
    keep_m, keep_e = [], []
    for e in range(big.k):
        for s in range(0, len(reps), 16384):
            chunk = reps[s:s + 16384]
            imgs = bps.images(chunk, np.full(len(chunk), e))
            ok = inL[imgs[:, L.points]].all(axis=1)
            keep_m.append(chunk[ok])
            keep_e.append(np.full(int(ok.sum()), e, dtype=np.int64))
    mats = np.concatenate(keep_m)
    exps = np.concatenate(keep_e)
    return LinsetStabiliser(len(mats), mats, exps, len(reps) * big.k)


def _subspace_images(f: VfrMap, mats, exps, U: Subspace) -> list:
    """F(xi)(U) for each blown-up (mats, exps) pair, as Subspaces (q prime or general)."""
    ctx = f.small
    basis = U.matrix
    out = []
    for e in np.unique(exps):
        sel = np.flatnonzero(exps == e)
        b = ctx.frob_array(basis, int(e))
        imgs = linalg.matmul(ctx, mats[sel], b.T[None, :, :])  # batch x n x dim
        for m in np.swapaxes(imgs, 1, 2):
            out.append(Subspace.from_rows(ctx, m, f.n))
    return out


def _fixes_subspace(f: VfrMap, mats, exps, U: Subspace) -> np.ndarray:
    ps = PointSpace(f.small, f.n)
    pts = U.point_indices()
    inU = np.zeros(ps.count, dtype=bool)
    inU[pts] = True
    vecs = ps.vectors[pts]
    ok = np.empty(len(mats), dtype=bool)
    for e in np.unique(exps):
        sel = np.flatnonzero(exps == e)
        v = f.small.frob_array(vecs, int(e))
        img = kernels.point_images(f.small, mats[sel], v, ps.weights, ps.point_of)
        ok[sel] = inU[img].all(axis=1)
    return ok


def _class_count(f: VfrMap, mats, exps) -> int:
    from .spreads import class_keys

    return len(class_keys(f.small, mats, exps))


def stab_D_pi(f: VfrMap, U: Subspace, method: str = "reduced", stab_L: LinsetStabiliser | None = None) -> dict:
    """|{<F(xi)>_q : xi in GammaL(r, q^t), F(xi)(U) = U}| modulo F_q^* scalars.

    ``full`` blows up all of GammaL(r, q^t); ``reduced`` only blows up lam*xi for
    <xi> in the stabiliser of B(U), which suffices because F(xi)(U) = U forces
    <xi> to fix B(U).
    """
    big = f.big
    if method == "full":
        total = 1
        for i in range(f.r):
            total *= big.size**f.r - big.size**i
        if total * big.k > GROUP_LIMIT:
            raise UnsupportedSize("GammaL too large for the full method")
        mats, exps = gammal_arrays(big, f.r)
    elif method == "reduced":
        if stab_L is None:
            stab_L = stab_linset(linset_from_subspace(f, U))
        lams = np.arange(1, big.size, dtype=np.int64)
        mats = big.mul(lams[None, :, None, None], stab_L.mats[:, None, :, :]).reshape(-1, f.r, f.r)
        exps = np.repeat(stab_L.exps, len(lams))
    else:
        raise FieldError(f"unknown method {method!r}")
    keep_m, keep_e = [], []
    for s in range(0, len(mats), 32768):
        bm, be = blowup_batch(f, mats[s:s + 32768], exps[s:s + 32768])
        ok = _fixes_subspace(f, bm, be, U)
        keep_m.append(bm[ok])
        keep_e.append(be[ok])
    bm = np.concatenate(keep_m)
    be = np.concatenate(keep_e)
    return {"order": _class_count(f, bm, be), "enumerated": len(mats), "method": method}


def stabiliser_orbit(f: VfrMap, U: Subspace, method: str = "reduced", stab_L: LinsetStabiliser | None = None) -> set:
    """Images F(xi)(U) that are witnesses of B(U), xi over GammaL(r, q^t) (or the reduced subset)."""
    big = f.big
    L = linset_from_subspace(f, U)
    if method == "full":
        mats, exps = gammal_arrays(big, f.r)
    else:
        if stab_L is None:
            stab_L = stab_linset(L)
        lams = np.arange(1, big.size, dtype=np.int64)
        mats = big.mul(lams[None, :, None, None], stab_L.mats[:, None, :, :]).reshape(-1, f.r, f.r)
        exps = np.repeat(stab_L.exps, len(lams))
    out = set()
    target = L.points
    for s in range(0, len(mats), 8192):
        bm, be = blowup_batch(f, mats[s:s + 8192], exps[s:s + 8192])
        for img in _subspace_images(f, bm, be, U):
            if np.array_equal(linset_from_subspace(f, img).points, target):
                out.add(img)
    return out


def scalar_orbit(f: VfrMap, U: Subspace) -> set:
    """{F(m_beta)(U) : beta in F_{q^t}^*}."""
    big = f.big
    lams = np.arange(1, big.size, dtype=np.int64)
    mats = lams[:, None, None] * np.eye(f.r, dtype=np.int64)[None]
    bm, be = blowup_batch(f, mats, np.zeros(len(lams), dtype=np.int64))
    return set(_subspace_images(f, bm, be, U))


# -- decisions -----------------------------------------------------------------------------

@dataclass
class ConditionReport:
    X: int | None
    stab_linset_order: int | None
    stab_D_pi_order: int | None
    formula_X: Fraction | None
    verdict_A: bool | None
    verdict_A_orbit: bool | None
    verdict_B: bool | None
    verdict_B_orbit: bool | None
    theta: int
    per_point_counts: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def verdicts_consistent(self) -> bool:
        a = [v for v in (self.verdict_A, self.verdict_A_orbit) if v is not None]
        return len(set(a)) <= 1


def _per_point_counts(f: VfrMap, L: LinearSet, witnesses: list) -> dict:
    """For each point Q of L: witnesses containing the fixed vector F(v_Q), v_Q canonical."""
    vecs = f.apply(L.point_vectors())
    out = {}
    for p, v in zip(L.points.tolist(), vecs):
        out[p] = sum(1 for W in witnesses if W.contains(v))
    return out


def analyse(
    f: VfrMap,
    U: Subspace,
    count_only: bool = False,
    stab_method: str | None = None,
    orbit_method: str | None = None,
    workers: int = 1,
    node_budget: int = 0,
) -> ConditionReport:
    """Compute X, both stabiliser orders, the formula and both routes for (A) and (B).

    If the witness search runs out of ``node_budget``, X is None and a verdict is only
    given when the partial count already exceeds its target.
    """
    L = linset_from_subspace(f, U)
    n = U.dim
    theta = (f.big.size - 1) // (f.q - 1)
    wit = enumerate_witnesses(f, L, n, count_only=count_only, workers=workers, node_budget=node_budget)
    sL = stab_linset(L)
    method = stab_method or ("full" if _gammal_size(f) <= 2 * 10**4 else "reduced")
    sD = stab_D_pi(f, U, method, sL)
    formula = Fraction(sL.order * theta, sD["order"])
    if not wit.exhausted:
        # the count only grows, so a partial count above a target already refutes equality
        lower = wit.count
        return ConditionReport(
            X=None,
            stab_linset_order=sL.order,
            stab_D_pi_order=sD["order"],
            formula_X=formula,
            verdict_A=False if lower > formula else None,
            verdict_A_orbit=None,
            verdict_B=False if lower > theta else None,
            verdict_B_orbit=None,
            theta=theta,
            extra={"points": L.size, "n": n, "spectrum": L.spectrum(), "stab_method": method,
                   "nodes": wit.nodes, "lower_bound_X": wit.count, "exhausted": False, "witnesses": None},
        )
    X = wit.count
    verdict_A = X == formula
    omethod = orbit_method or method
    orbit = stabiliser_orbit(f, U, omethod, sL)
    if wit.witnesses is not None:
        verdict_A_orbit = orbit == set(wit.witnesses)
    else:
        verdict_A_orbit = len(orbit) == X
    scal = scalar_orbit(f, U)
    verdict_B = X == theta
    if wit.witnesses is not None:
        verdict_B_orbit = scal == set(wit.witnesses)
    else:
        verdict_B_orbit = len(scal) == X
    per_point = _per_point_counts(f, L, wit.witnesses) if wit.witnesses is not None else {}
    rep = ConditionReport(
        X=X,
        stab_linset_order=sL.order,
        stab_D_pi_order=sD["order"],
        formula_X=formula,
        verdict_A=verdict_A,
        verdict_A_orbit=verdict_A_orbit,
        verdict_B=verdict_B,
        verdict_B_orbit=verdict_B_orbit,
        theta=theta,
        per_point_counts=per_point,
        extra={
            "points": L.size,
            "n": n,
            "spectrum": L.spectrum(),
            "orbit_size": len(orbit),
            "scalar_orbit_size": len(scal),
            "stab_method": method,
            "orbit_method": omethod,
            "enumerated_linset_group": sL.enumerated,
            "enumerated_D_group": sD["enumerated"],
            "nodes": wit.nodes,
            "exhausted": True,
            "witnesses": wit.witnesses,
        },
    )
    if rep.verdict_A != rep.verdict_A_orbit:
        raise InvariantViolation("counting route and orbit route disagree on Condition (A)")
    return rep


def _gammal_size(f: VfrMap) -> int:
    total = 1
    for i in range(f.r):
        total *= f.big.size**f.r - f.big.size**i
    return total * f.big.k


def condition_A_check(f: VfrMap, U: Subspace, **kw) -> ConditionReport:
    return analyse(f, U, **kw)


def condition_B_check(f: VfrMap, U: Subspace, **kw) -> ConditionReport:
    return analyse(f, U, **kw)


def per_point_identity(f: VfrMap, U: Subspace, rep: ConditionReport) -> dict:
    """Sum of per-point counts two ways: directly, and X (q-1)/(q^t-1) sum_Q |B(Q) cap pi|."""
    L = linset_from_subspace(f, U)
    direct = sum(rep.per_point_counts.values())
    in_pi = sum((f.q ** L.weights[p] - 1) // (f.q - 1) for p in L.points.tolist())
    other = Fraction(rep.X * (f.q - 1) * in_pi, f.big.size - 1)
    per = {
        p: Fraction(rep.X * (f.q - 1) * ((f.q ** L.weights[p] - 1) // (f.q - 1)), f.big.size - 1)
        for p in L.points.tolist()
    }
    return {"direct": direct, "formula": other, "agree": direct == other, "per_point_expected": per}


def rep_theorem_check(f: VfrMap, U: Subspace, rep: ConditionReport, point: int | None = None) -> dict:
    """If (B) holds, witnesses through P meeting the spread element of P only in P coincide."""
    witnesses = rep.extra.get("witnesses")
    if witnesses is None:
        raise FieldError("needs the witness list")
    L = linset_from_subspace(f, U)
    point = int(L.points[0]) if point is None else point
    vq = PointSpace(f.big, f.r).vectors[point]
    fv = f.apply(vq)
    from .reduction import field_reduce_vector

    block = field_reduce_vector(f, vq)
    from .projgeo import meet

    through = [W for W in witnesses if W.contains(fv) and meet(W, block).dim == 1]
    distinct = len(set(through))
    holds = (not rep.verdict_B) or distinct <= 1
    return {"point": point, "witnesses_through": distinct, "holds": holds, "vacuous": not rep.verdict_B}
