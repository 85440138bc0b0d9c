"""Spreads of PG(rt-1, q): the Desarguesian spread, spread predicates, stabilisers, equivalence search."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import linalg
from .errors import InvariantViolation
from .gf import ExtFieldCtx, FieldError, field_of_order
from .projgeo import PointSpace, Subspace, act, n_points, span
from .reduction import VfrMap, blowup, blowup_batch, desarguesian_partition, standard_vfr
from .semilinear import (
    ProjSemilinear,
    SemilinearMap,
    compose,
    gl_matrices,
    gl_order,
    normalize_batch,
    scalar_map,
)

UNKNOWN = "unknown"
DEFAULT_NODE_BUDGET = 10**7


class Spread:
    """A list of equidimensional subspaces of F_q^n, kept sorted; not validated until asked."""

    def __init__(self, ctx: ExtFieldCtx, n: int, elements, params=None):
        self.ctx = ctx
        self.n = n
        self.elements = sorted(elements)
        self.params = params
        self._elem_of = None

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __eq__(self, other):
        return isinstance(other, Spread) and (self.ctx, self.n, self.elements) == (other.ctx, other.n, other.elements)

    def __hash__(self):
        return hash((self.ctx, self.n, tuple(self.elements)))

    @property
    def t(self) -> int:
        return self.elements[0].dim if self.elements else 0

    @property
    def points(self) -> PointSpace:
        return PointSpace(self.ctx, self.n)

    def element_of_point(self) -> np.ndarray:
        """Index of the element through each point (-1 if uncovered, -2 if covered twice)."""
        if self._elem_of is None:
            out = np.full(self.points.count, -1, dtype=np.int64)
            for i, e in enumerate(self.elements):
                pts = e.point_indices()
                out[pts] = np.where(out[pts] == -1, i, -2)
            out.setflags(write=False)
            self._elem_of = out
        return self._elem_of

    def key(self) -> tuple:
        return tuple(sorted(tuple(e.point_indices().tolist()) for e in self.elements))

    def serialize(self) -> str:
        q = self.ctx.size
        t = self.t
        r = self.n // t if t else 0
        lines = [f"{q} {t} {r}"]
        lines += [e.serialize() for e in self.elements]
        return "\n".join(lines) + "\n"


def parse_spread(text: str) -> Spread:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    q, t, r = (int(x) for x in lines[0].split())
    ctx = field_of_order(q)
    from .projgeo import subspace_from_text

    elems = [subspace_from_text(ctx, ln, r * t) for ln in lines[1:]]
    return Spread(ctx, r * t, elems, (q, t, r))


def build_desarguesian(f: VfrMap) -> Spread:
    blocks = [b for _, b in desarguesian_partition(f)]
    return Spread(f.small, f.n, blocks, (f.q, f.t, f.r))


def standard_spread(q: int, t: int, r: int) -> Spread:
    return build_desarguesian(standard_vfr(q, t, r))


def is_spread(candidate, ctx: ExtFieldCtx | None = None, n: int | None = None) -> bool:
    elems = list(candidate.elements if isinstance(candidate, Spread) else candidate)
    if not elems:
        return False
    ctx = ctx or elems[0].ctx
    n = n or elems[0].n
    d = elems[0].dim
    if d == 0 or any(e.dim != d or e.ctx != ctx or e.n != n for e in elems):
        return False
    q = ctx.size
    total = n_points(n, q)
    if len(elems) * n_points(d, q) != total:
        return False
    seen = np.zeros(total, dtype=np.int64)
    for e in elems:
        seen[e.point_indices()] += 1
    return bool(np.all(seen == 1))


def is_normal(s: Spread) -> bool:
    elem_of = s.element_of_point()
    for a, b in combinations(s.elements, 2):
        sp = span(a, b)
        inside = np.zeros(len(s), dtype=np.int64)
        np.add.at(inside, elem_of[sp.point_indices()], 1)
        per = n_points(s.t, s.ctx.size)
        if np.any((inside != 0) & (inside != per)):
            return False
    return True


# -- equivalence search ------------------------------------------------------------

@dataclass
class SearchResult:
    verdict: object  # True / False / UNKNOWN
    matrix: np.ndarray | None = None
    nodes: int = 0
    notes: list = field(default_factory=list)


def _adapted_basis(s: Spread):
    """Vectors from elements whose spans form a direct sum of the whole space, grouped per element."""
    ctx, n = s.ctx, s.n
    cur = Subspace.empty(ctx, n)
    groups = []
    for e in s.elements:
        nxt = span(cur, e)
        if nxt.dim == cur.dim + e.dim:
            groups.append(e.matrix)
            cur = nxt
        if cur.dim == n:
            return np.vstack(groups), [len(g) for g in groups]
    return None, None


def _search_map(src: Spread, dst: Spread, basis, groups, pin_first: bool, budget: int) -> SearchResult:
    """Backtracking for an invertible F_q-linear L with L(src) = dst.

    ``basis`` rows are assigned images in order; ``groups`` gives consecutive
    runs of rows lying in one element of src (their images must share an
    element of dst).  With ``pin_first`` the first vector of every group is
    sent to the first vector outside the current image span, which is sound
    when src is the standard Desarguesian spread (see is_desarguesian).
    """
    ctx, n = src.ctx, src.n
    q = ctx.size
    ps = PointSpace(ctx, n)
    src_of = src.element_of_point()
    dst_of = dst.element_of_point()
    every = (np.arange(1, q**n)[:, None] // (q ** np.arange(n - 1, -1, -1))) % q
    group_start = np.zeros(n, dtype=bool)
    pos = 0
    for g in groups:
        group_start[pos] = True
        pos += g
    basis = np.asarray(basis, dtype=np.int64)
    nodes = 0
    coeffs = np.arange(1, q, dtype=np.int64)

    def extend(src_vecs, img_vecs, dmap, smap, level, images):
        nonlocal nodes
        if level == n:
            return np.array(images).T.copy()
        if group_start[level]:
            if img_vecs.shape[0] > 1:
                inspan = set(ps.index(img_vecs[1:]).tolist())
            else:
                inspan = set()
            cand = every[~np.isin(ps.index(every), list(inspan))] if inspan else every
            if pin_first:
                cand = cand[:1]
        else:
            # stay inside the dst element already chosen for this group
            first = images[level - 1]
            elem = dst.elements[dst_of[ps.index(first)]]
            vecs = elem.vectors()[1:]
            cand = vecs[linalg_rank_ok(ctx, img_vecs, vecs)]
        for y in cand:
            nodes += 1
            if nodes > budget:
                raise _Budget
            new_src = [src_vecs]
            new_img = [img_vecs]
            ok = True
            d2, s2 = dict(dmap), dict(smap)
            b = basis[level]
            for c in coeffs:
                ns = ctx.add(src_vecs, ctx.mul(int(c), b)[None, :])
                ni = ctx.add(img_vecs, ctx.mul(int(c), y)[None, :])
                if not ni.any(axis=1).all():
                    ok = False
                    break
                de = src_of[ps.index(ns)]
                se = dst_of[ps.index(ni)]
                for a, z in zip(de.tolist(), se.tolist()):
                    if d2.setdefault(a, z) != z or s2.setdefault(z, a) != a:
                        ok = False
                        break
                if not ok:
                    break
                new_src.append(ns)
                new_img.append(ni)
            if not ok:
                continue
            res = extend(np.vstack(new_src), np.vstack(new_img), d2, s2, level + 1, images + [y])
            if res is not None:
                return res
        return None

    zero = np.zeros((1, n), dtype=np.int64)
    try:
        mat = extend(zero, zero, {}, {}, 0, [])
    except _Budget:
        return SearchResult(UNKNOWN, None, nodes, ["node budget exhausted"])
    if mat is None:
        return SearchResult(False, None, nodes)
    # express L in standard coordinates: L = images * basis^{-1}
    full = linalg.matmul(ctx, mat, linalg.inverse(ctx, basis.T))
    return SearchResult(True, full, nodes)


class _Budget(Exception):
    pass


def linalg_rank_ok(ctx, img_vecs, cands) -> np.ndarray:
    """Mask of candidate vectors outside the span of img_vecs (which is a full subspace listing)."""
    if img_vecs.shape[0] <= 1:
        return cands.any(axis=1)
    ps = PointSpace(ctx, img_vecs.shape[1])
    inspan = ps.index(img_vecs[1:])
    return ~np.isin(ps.index(cands), inspan)


def _check_params(s: Spread):
    if not is_spread(s):
        raise FieldError("not a spread")
    q, t = s.ctx.size, s.t
    if s.n % t:
        raise FieldError("element dimension does not divide the ambient dimension")
    return q, t, s.n // t


def desarguesian_map(s: Spread, budget: int = DEFAULT_NODE_BUDGET) -> SearchResult:
    """Search for L in GL(rt, q) with L(D) = s, D the standard Desarguesian spread.

    The standard basis is D-adapted (block j = F(F_{q^t} e_j)).  Given a
    partial solution on blocks 1..j, the pointwise stabiliser of those blocks
    inside F(GL(r, q^t)) is transitive on vectors outside their span, so the
    first vector of each new block can be pinned without losing solutions.
    """
    q, t, r = _check_params(s)
    d = standard_spread(q, t, r)
    if d.ctx != s.ctx:
        raise FieldError("spread is over an unexpected field model")
    basis = np.eye(s.n, dtype=np.int64)
    return _search_map(d, s, basis, [t] * r, True, budget)


def is_desarguesian(s: Spread, budget: int = DEFAULT_NODE_BUDGET):
    res = desarguesian_map(s, budget)
    if res.verdict is True:
        m = SemilinearMap(s.ctx, res.matrix, 0)
        d = standard_spread(*_check_params(s))
        if _image_spread(m, d) != s:
            raise InvariantViolation("search returned a map that does not carry D onto the spread")
    return res.verdict


def _image_spread(m: SemilinearMap, s: Spread) -> Spread:
    return Spread(s.ctx, s.n, [act(m, e) for e in s.elements], s.params)


def spread_equivalence_map(s1: Spread, s2: Spread, budget: int = DEFAULT_NODE_BUDGET):
    """A linear collineation g with g(s1) = s2, None if there is none, UNKNOWN on budget exhaustion."""
    if (s1.ctx, s1.n) != (s2.ctx, s2.n) or s1.t != s2.t:
        return None
    r1 = desarguesian_map(s1, budget)
    r2 = desarguesian_map(s2, budget)
    if UNKNOWN in (r1.verdict, r2.verdict):
        return UNKNOWN
    if r1.verdict and r2.verdict:
        g = linalg.matmul(s1.ctx, r2.matrix, linalg.inverse(s1.ctx, r1.matrix))
        return ProjSemilinear(SemilinearMap(s1.ctx, g, 0), s1.ctx.k)
    if r1.verdict != r2.verdict:
        return None
    basis, groups = _adapted_basis(s1)
    if basis is None:
        basis, groups = np.eye(s1.n, dtype=np.int64), [1] * s1.n
    res = _search_map(s1, s2, basis, groups, False, budget)
    if res.verdict is UNKNOWN:
        return UNKNOWN
    if res.verdict is False:
        return None
    return ProjSemilinear(SemilinearMap(s1.ctx, res.matrix, 0), s1.ctx.k)


# -- stabilisers ---------------------------------------------------------------------

@dataclass
class StabiliserReport:
    group_order: int
    closed_form_order: int | None
    elementwise_order: int | None = None
    generators: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)


def stabilises(s: Spread, mats, exps=None) -> np.ndarray:
    """For each map in the batch: does it send every element of s onto an element of s?"""
    ps = s.points
    imgs = ps.images(mats, exps)
    elem_of = s.element_of_point()
    out = np.ones(len(imgs), dtype=bool)
    for e in s.elements:
        pts = e.point_indices()
        img_el = elem_of[imgs[:, pts]]
        out &= np.all(img_el == img_el[:, :1], axis=1)
    return out


def fixes_elementwise(s: Spread, mats, exps=None) -> np.ndarray:
    ps = s.points
    imgs = ps.images(mats, exps)
    elem_of = s.element_of_point()
    return np.all(elem_of[imgs] == elem_of[None, :], axis=1)


def count_classes(ctx: ExtFieldCtx, mats, exps) -> int:
    return len(class_keys(ctx, mats, exps))


def class_keys(ctx: ExtFieldCtx, mats, exps) -> set:
    """Distinct projective classes (modulo F_q^* scalars, q = |ctx|)."""
    mats = np.asarray(mats, dtype=np.int64)
    norm = normalize_batch(ctx, mats, ctx.k).reshape(len(mats), -1)
    exps = np.asarray(exps, dtype=np.int64)
    rows = np.concatenate([norm, exps[:, None]], axis=1)
    return set(map(bytes, np.ascontiguousarray(rows).view(np.uint8).reshape(len(rows), -1)))


def elementwise_stabiliser(f: VfrMap) -> StabiliserReport:
    big = f.big
    beta = big.generator
    gen = blowup(f, scalar_map(beta, f.r, big))
    powers = [np.eye(f.n, dtype=np.int64)]
    for _ in range(big.order - 1):
        powers.append(linalg.matmul(f.small, gen.matrix, powers[-1]))
    mats = np.array(powers)
    exps = np.zeros(len(mats), dtype=np.int64)
    d = build_desarguesian(f)
    if not fixes_elementwise(d, mats).all():
        raise InvariantViolation("a scalar blow-up moved a spread element")
    order = count_classes(f.small, mats, exps)
    closed = (big.size - 1) // (f.q - 1)
    # regular action on the points of the first element
    ps = d.points
    imgs = ps.images(mats)
    pts = d.elements[0].point_indices()
    norm = normalize_batch(f.small, mats, f.small.k).reshape(len(mats), -1)
    _, first_idx = np.unique(norm, axis=0, return_index=True)
    reps = imgs[np.sort(first_idx)][:, pts]
    orbit = set(reps[:, 0].tolist())
    regular = len(orbit) == len(pts) and order == len(pts) and set(orbit) == set(pts.tolist())
    return StabiliserReport(
        group_order=order,
        closed_form_order=closed,
        elementwise_order=order,
        generators=[ProjSemilinear(gen, f.small.k)],
        extra={"sharply_transitive": regular, "element_points": len(pts)},
    )


def gammal_arrays(ctx: ExtFieldCtx, r: int, exps_allowed=None):
    mats = gl_matrices(ctx, r)
    exps_allowed = list(range(ctx.k)) if exps_allowed is None else list(exps_allowed)
    allm = np.repeat(mats, len(exps_allowed), axis=0)
    alle = np.tile(np.array(exps_allowed, dtype=np.int64), len(mats))
    return allm, alle


def setwise_stabiliser(f: VfrMap, group: str = "PGammaL", check: bool = True) -> StabiliserReport:
    """Stabiliser of D realised as blow-ups of GammaL(r, q^t) (or of the F_q-fixing part for PGL)."""
    big, h = f.big, f.small.k
    if group == "PGL":
        allowed = list(range(0, big.k, h))
    elif group == "PGammaL":
        allowed = list(range(big.k))
    else:
        raise FieldError(f"unknown group {group!r}")
    mats, exps = gammal_arrays(big, f.r, allowed)
    bm, be = blowup_batch(f, mats, exps)
    if check:
        d = build_desarguesian(f)
        ok = np.concatenate([stabilises(d, bm[s:s + 8192], be[s:s + 8192]) for s in range(0, len(bm), 8192)])
        if not ok.all():
            raise InvariantViolation("a blown-up map does not stabilise D")
    keys = class_keys(f.small, bm, be)
    closed = gl_order(f.r, big.size) // (f.q - 1) * len(allowed)
    return StabiliserReport(
        group_order=len(keys),
        closed_form_order=closed,
        elementwise_order=(big.size - 1) // (f.q - 1),
        generators=[],
        extra={"keys": keys, "enumerated": len(bm)},
    )


def ambient_stabiliser(s: Spread) -> set:
    """Brute force over GL(n, q) (desk scale only): class keys of every linear map stabilising s."""
    ctx = s.ctx
    if ctx.size ** (s.n * s.n) > (1 << 24):
        raise FieldError("ambient group too large for brute force")
    mats = gl_matrices(ctx, s.n)
    keep = np.concatenate([stabilises(s, mats[i:i + 8192]) for i in range(0, len(mats), 8192)])
    return class_keys(ctx, mats[keep], np.zeros(int(keep.sum()), dtype=np.int64))


def spread_orbit_keys(s: Spread) -> set:
    """Distinct images of s under all of GL(n, q) (brute force, desk scale)."""
    ctx = s.ctx
    mats = gl_matrices(ctx, s.n)
    elem_pts = np.array([e.point_indices() for e in s.elements])
    out = set()
    for i in range(0, len(mats), 8192):
        imgs = s.points.images(mats[i:i + 8192])
        sets = np.sort(imgs[:, elem_pts], axis=2)
        for row in sets:
            out.add(tuple(sorted(map(tuple, row.tolist()))))
    return out


def degamma(f: VfrMap, phi: SemilinearMap, s: Spread) -> SemilinearMap:
    """Turn phi with phi(s) = D into a linear map with the same property."""
    d = build_desarguesian(f)
    if _image_spread(phi, s) != d:
        raise FieldError("map does not carry the spread onto D")
    e = phi.e
    if e == 0:
        return phi
    undo = SemilinearMap(f.big, np.eye(f.r, dtype=np.int64), (-e) % f.big.k)
    out = compose(blowup(f, undo), phi)
    if out.e != 0 or _image_spread(out, s) != d:
        raise InvariantViolation("degamma produced a bad map")
    return out


# -- a non-Desarguesian fixture --------------------------------------------------------

def _transversal(p_vec, l2: Subspace, l3: Subspace) -> Subspace:
    from .projgeo import meet

    ctx, n = l2.ctx, l2.n
    pt = Subspace.from_rows(ctx, [p_vec], n)
    q_pt = meet(span(pt, l2), l3)
    return span(pt, q_pt)


def regulus(l1: Subspace, l2: Subspace, l3: Subspace) -> tuple[list, list]:
    """(regulus through three skew lines of PG(3,q), its opposite regulus)."""
    from .projgeo import points_of

    opp = [_transversal(p, l2, l3) for p in points_of(l1)]
    t0 = opp[0]
    reg = [_transversal(x, opp[1], opp[2]) for x in points_of(t0)]
    return reg, opp


def hall_spread(q: int = 3) -> Spread:
    """Switch a regulus of the Desarguesian line spread of PG(3, q)."""
    d = standard_spread(q, 2, 2)
    reg, opp = regulus(*d.elements[:3])
    if not set(reg) <= set(d.elements):
        raise InvariantViolation("regulus of D not contained in D")
    elems = [e for e in d.elements if e not in set(reg)] + opp
    return Spread(d.ctx, d.n, elems, (q, 2, 2))
