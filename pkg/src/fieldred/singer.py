"""Singer cycles through the tower F_{q^n} -> F_{q^d}^{n/d} -> F_q^n and their orbits on subspaces."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import UnsupportedSize
from .gf import ExtFieldCtx, FieldError, field_of_order, find_generator
from .projgeo import PointSpace, Subspace, enumerate_subspaces, n_points
from .reduction import VfrMap, blowup, compose_vfr
from .semilinear import ProjSemilinear, gl_matrices, gl_order, scalar_map
from .spreads import Spread, build_desarguesian, is_spread

NORMALIZE_LIMIT = 2 * 10**6


@dataclass
class SingerCycle:
    q: int
    n: int
    d: int
    omega: int
    inner: VfrMap  # F0: F_{q^n} -> F_{q^d}^{n/d}
    outer: VfrMap  # F: F_{q^d}^{n/d} -> F_q^n
    tower: VfrMap  # F F0
    matrix: np.ndarray
    perm: np.ndarray  # point permutation on PG(n-1, q)

    @property
    def ctx(self) -> ExtFieldCtx:
        return self.tower.small

    @property
    def order(self) -> int:
        return len(self.perm)

    @property
    def cycle(self) -> ProjSemilinear:
        from .semilinear import SemilinearMap

        return ProjSemilinear(SemilinearMap(self.ctx, self.matrix, 0), self.ctx.k)

    def power_perm(self, m: int) -> np.ndarray:
        """Point permutation of g^m."""
        out = np.arange(len(self.perm))
        base = self.perm.copy()
        m %= len(self.perm)
        while m:
            if m & 1:
                out = base[out]
            base = base[base]
            m >>= 1
        return out


def cycle_lengths(perm: np.ndarray) -> list[int]:
    seen = np.zeros(len(perm), dtype=bool)
    out = []
    for s in range(len(perm)):
        if seen[s]:
            continue
        n, x = 0, s
        while not seen[x]:
            seen[x] = True
            x = perm[x]
            n += 1
        out.append(n)
    return out


def build_singer(q: int, n: int, d: int | None = None) -> SingerCycle:
    if n < 2:
        raise FieldError("Singer cycles need n >= 2")
    d = n if d is None else d
    if n % d:
        raise FieldError(f"{d} does not divide {n}")
    small = field_of_order(q)
    mid = field_of_order(q**d)
    big = field_of_order(q**n)
    inner = VfrMap(big, mid, 1)
    outer = VfrMap(mid, small, n // d)
    tower = compose_vfr(outer, inner)
    omega = find_generator(big).code
    phi = blowup(tower, scalar_map(omega, 1, big))
    ps = PointSpace(small, n)
    perm = ps.images(phi.matrix[None])[0]
    c = SingerCycle(q, n, d, omega, inner, outer, tower, phi.matrix, perm)
    if n_points(n, q) <= 10**5 and cycle_lengths(perm) != [n_points(n, q)]:
        from .errors import InvariantViolation

        raise InvariantViolation("blown-up generator is not transitive on points")
    return c


@dataclass
class OrbitReport:
    seed: Subspace
    orbit: list
    is_spread: bool
    stabiliser_exponent: int
    extra: dict = field(default_factory=dict)


def _orbit_point_sets(c: SingerCycle, pts: np.ndarray) -> list[np.ndarray]:
    start = tuple(np.sort(pts).tolist())
    out = [np.sort(pts)]
    cur = pts
    while True:
        cur = c.perm[cur]
        key = np.sort(cur)
        if tuple(key.tolist()) == start:
            return out
        out.append(key)


def _subspace_of_points(ctx: ExtFieldCtx, n: int, pts) -> Subspace:
    ps = PointSpace(ctx, n)
    return Subspace.from_rows(ctx, ps.vectors[np.asarray(pts)], n)


def subspace_orbit(c: SingerCycle, seed: Subspace) -> OrbitReport:
    if seed.dim == 0:
        raise FieldError("seed must be nonempty")
    sets = _orbit_point_sets(c, seed.point_indices())
    orbit = [_subspace_of_points(c.ctx, c.n, s) for s in sets]
    spread = is_spread(orbit)
    m = len(orbit)
    extra = {}
    if spread:
        expected = (c.q**c.n - 1) // (c.q**seed.dim - 1)
        fixed = np.array_equal(np.sort(c.power_perm(m)[seed.point_indices()]), seed.point_indices())
        extra = {"expected_exponent": expected, "power_fixes_seed": bool(fixed)}
    return OrbitReport(seed, orbit, spread, m, extra)


def spread_orbits(c: SingerCycle, d: int) -> list[OrbitReport]:
    """Scan all (d-1)-subspaces and return the orbits that are spreads."""
    if not 1 <= d <= c.n:
        raise FieldError("bad subspace dimension")
    seen: set = set()
    found = []
    for sub in enumerate_subspaces(c.n, d, c.ctx):
        key = tuple(sub.point_indices().tolist())
        if key in seen:
            continue
        sets = _orbit_point_sets(c, sub.point_indices())
        for s in sets:
            seen.add(tuple(s.tolist()))
        total = np.concatenate(sets)
        if len(total) == n_points(c.n, c.q) and len(np.unique(total)) == len(total):
            found.append(subspace_orbit(c, sub))
    return found


def orbit_spread(rep: OrbitReport, c: SingerCycle) -> Spread:
    return Spread(c.ctx, c.n, rep.orbit, (c.q, rep.seed.dim, c.n // rep.seed.dim))


def is_subfield_coset(codes, ctx: ExtFieldCtx, q: int | None = None) -> bool:
    """Is the set (containing 0) of the form alpha * F_{q^d} with d | n?"""
    q = q or ctx.p
    s = np.unique(np.asarray(list(codes), dtype=np.int64))
    if 0 not in s:
        raise FieldError("set must contain 0")
    size = len(s)
    d, m = 0, 1
    while m < size:
        m *= q
        d += 1
    if m != size:
        return False
    _, h = _prime_power(q)
    if ctx.k % (h * d):
        return False
    nz = s[s != 0]
    if len(nz) == 0:
        return False
    a = int(nz.min())
    norm = np.unique(ctx.mul(int(ctx.inv_t[a]), s))
    members = set(norm.tolist())
    sums = ctx.add(norm[:, None], norm[None, :])
    prods = ctx.mul(norm[:, None], norm[None, :])
    return 1 in members and set(sums.ravel().tolist()) <= members and set(prods.ravel().tolist()) <= members


def _prime_power(q):
    from .gf import prime_power

    return prime_power(q)


def preimage_set(c: SingerCycle, sub: Subspace) -> np.ndarray:
    """Codes of F_{q^n} whose tower image lies in the subspace (0 included)."""
    vecs = sub.vectors()
    return np.sort(c.tower.inverse(vecs)[:, 0])


def factor_group_check(c: SingerCycle, d: int) -> dict:
    """Induced action of <g> on the spread orbit versus the Singer cycle F0(m_omega) of PG(n/d-1, q^d)."""
    if c.n % d:
        raise FieldError(f"{d} does not divide {c.n}")
    if c.d != d:
        c = build_singer(c.q, c.n, d)
    d_spread = build_desarguesian(c.outer)
    elem_of = d_spread.element_of_point()
    elems = d_spread.elements
    induced = np.array([elem_of[c.perm[e.point_indices()[0]]] for e in elems])
    consistent = all(len(set(elem_of[c.perm[e.point_indices()]].tolist())) == 1 for e in elems)
    n_el = len(elems)
    lengths = cycle_lengths(induced)
    transitive = lengths == [n_el]
    kernel_exp = (c.q**c.n - 1) // (c.q**d - 1)
    kernel_fixes = bool(np.all(elem_of[c.power_perm(kernel_exp)] == elem_of))
    # compare with F0(m_omega) acting on PG(n/d - 1, q^d)
    mid = c.outer.big
    inner_map = blowup(c.inner, scalar_map(c.omega, 1, c.inner.big))
    mps = PointSpace(mid, c.n // d)
    mperm = mps.images(inner_map.matrix[None])[0]
    # element index of F-bar(P) for each point P of PG(n/d - 1, q^d)
    corr = np.array([elem_of[PointSpace(c.ctx, c.n).index(c.outer.apply(v))] for v in mps.vectors])
    matches = bool(np.array_equal(induced[corr], corr[mperm]))
    ok = consistent and transitive and kernel_fixes and matches and n_el == mps.count
    return {
        "ok": bool(ok),
        "elements": n_el,
        "orbit_length": lengths[0] if transitive else None,
        "kernel_exponent": kernel_exp,
        "kernel_order": (c.q**d - 1) // (c.q - 1),
        "matches_quotient_singer": matches,
    }


def singer_normalize(g, q: int, n: int):
    """Find (xi, omega') with g = xi sigma_{omega'} xi^{-1} projectively, or None if g is not a Singer cycle.

    Exhaustive over GL(n, q); the identity conjugator is tried first for every omega'.
    """
    ctx = field_of_order(q)
    g = np.asarray(g, dtype=np.int64)
    if gl_order(n, q) > NORMALIZE_LIMIT:
        raise UnsupportedSize(f"GL({n},{q}) too large for exhaustive conjugacy search")
    ps = PointSpace(ctx, n)
    perm = ps.images(g[None])[0]
    if cycle_lengths(perm) != [ps.count]:
        return None
    base = build_singer(q, n)
    big = base.tower.big
    gens = [j for j in range(1, big.order) if np.gcd(j, big.order) == 1]
    scalars = [int(x) for x in range(1, ctx.size)]
    sigmas = []
    for j in gens:
        w = int(big.pow(base.omega, j))
        sigmas.append((w, blowup(base.tower, scalar_map(w, 1, big)).matrix))

    def conj_ok(xis, sigma):
        lhs = linalg.matmul(ctx, xis, sigma)
        rhs = linalg.matmul(ctx, g, xis)
        hit = np.zeros(len(xis), dtype=bool)
        for lam in scalars:
            hit |= np.all(lhs == ctx.mul(lam, rhs), axis=(1, 2))
        return hit

    eye = np.eye(n, dtype=np.int64)[None]
    for w, sigma in sigmas:
        if conj_ok(eye, sigma)[0]:
            return eye[0], w
    mats = gl_matrices(ctx, n)
    for w, sigma in sigmas:
        hit = np.flatnonzero(conj_ok(mats, sigma))
        if len(hit):
            return mats[hit[0]], w
    return None
