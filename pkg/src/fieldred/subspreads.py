"""The standard Desarguesian subspread D2 inside D, lifting of partitioned subspaces, and preservation checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import InvariantViolation
from .gf import FieldError
from .projgeo import Subspace, enumerate_subspaces, n_points
from .reduction import VfrMap, blowup_batch, compose_vfr
from .semilinear import random_gl
from .spreads import UNKNOWN, Spread, build_desarguesian, gammal_arrays, is_desarguesian, is_spread, stabilises


@dataclass
class SubspreadPair:
    outer: Spread
    inner: Spread
    tprime: int
    f1: VfrMap
    f2: VfrMap
    f: VfrMap


def build_standard_subspread(f1: VfrMap, f2: VfrMap) -> SubspreadPair:
    """D from F = F2 F1 together with D2 = {F(beta v) : beta in F_{q^t'}}.

    Since F1 is F_{q^t'}-linear and onto, D2 is exactly the Desarguesian
    spread of F2.
    """
    if f1.t == 0 or f1.big.k % f1.small.k:
        raise FieldError("t' must divide t")
    f = compose_vfr(f2, f1)
    outer = build_desarguesian(f)
    inner = build_desarguesian(f2)
    pair = SubspreadPair(outer, inner, f2.t, f1, f2, f)
    if not (is_spread(inner) and is_subspread(outer, inner)):
        raise InvariantViolation("standard subspread does not refine D")
    return pair


def standard_pair(q: int, t: int, tprime: int, r: int) -> SubspreadPair:
    from .gf import field_of_order

    if t % tprime:
        raise FieldError(f"{tprime} does not divide {t}")
    small, mid, big = field_of_order(q), field_of_order(q**tprime), field_of_order(q**t)
    f1 = VfrMap(big, mid, r)
    f2 = VfrMap(mid, small, r * t // tprime)
    return build_standard_subspread(f1, f2)


def is_subspread(outer: Spread, inner: Spread) -> bool:
    if (outer.ctx, outer.n) != (inner.ctx, inner.n) or not inner.elements:
        return False
    q = outer.ctx.size
    if outer.t % inner.t:
        return False
    per = n_points(outer.t, q) // n_points(inner.t, q)
    if n_points(outer.t, q) % n_points(inner.t, q):
        return False
    elem_of = outer.element_of_point()
    counts = np.zeros(len(outer), dtype=np.int64)
    for e in inner.elements:
        owners = np.unique(elem_of[e.point_indices()])
        if len(owners) != 1 or owners[0] < 0:
            return False
        counts[owners[0]] += 1
    return bool(np.all(counts == per))


def lift_partitioned_subspace(f1: VfrMap, f2: VfrMap, T: Subspace) -> Subspace:
    """The F_{q^t'}-subspace U with <F2(U)>_q = T, for T a union of D2-elements."""
    inner = build_desarguesian(f2)
    tpts = set(T.point_indices().tolist())
    for e in inner.elements:
        pts = set(e.point_indices().tolist())
        if pts & tpts and not pts <= tpts:
            raise FieldError("subspace is not partitioned by subspread elements")
    if T.dim != f1.t * f2.t:
        raise FieldError("subspace has the wrong dimension")
    pre = f2.inverse(T.vectors())
    U = Subspace.from_rows(f2.big, pre, f2.r)
    back = f2.apply(U.vectors())
    if U.dim != f1.t or Subspace.from_rows(f2.small, back, f2.n) != T or len(back) != len(pre):
        raise InvariantViolation("lift does not round-trip")
    return U


def uniqueness_consequence_check(pair: SubspreadPair, samples: int | None = 1000, seed: int = 0) -> dict:
    """Do blown-up elements of Stab(D) map D2 onto itself?  Exhaustive when samples is None."""
    f = pair.f
    big = f.big
    if samples is None:
        mats, exps = gammal_arrays(big, f.r)
    else:
        rng = np.random.default_rng(seed)
        mats = np.array([random_gl(big, f.r, rng) for _ in range(samples)])
        exps = rng.integers(0, big.k, size=samples)
    bm, be = blowup_batch(f, mats, exps)
    okd = np.concatenate([stabilises(pair.outer, bm[i:i + 4096], be[i:i + 4096]) for i in range(0, len(bm), 4096)])
    ok2 = np.concatenate([stabilises(pair.inner, bm[i:i + 4096], be[i:i + 4096]) for i in range(0, len(bm), 4096)])
    return {
        "checked": len(bm),
        "stabilise_D": int(okd.sum()),
        "violations": int((~ok2).sum()),
        "ok": bool(okd.all() and ok2.all()),
    }


def _block_subspaces(block: Subspace, d: int) -> list[Subspace]:
    basis = block.matrix
    return [
        Subspace.from_rows(block.ctx, linalg.matmul(block.ctx, s.matrix, basis), block.n)
        for s in enumerate_subspaces(block.dim, d, block.ctx)
    ]


def block_spreads(block: Subspace, d: int, budget: int = 10**6):
    """All (d-1)-spreads of one block (exact cover of its points); yields lists of subspaces."""
    subs = _block_subspaces(block, d)
    pts = [set(s.point_indices().tolist()) for s in subs]
    allp = set(block.point_indices().tolist())
    nodes = 0

    def rec(covered, chosen):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise RuntimeError("budget")
        if covered == allp:
            yield [subs[i] for i in chosen]
            return
        p = min(allp - covered)
        for i, s in enumerate(pts):
            if p in s and not (s & covered):
                yield from rec(covered | s, chosen + [i])

    # covering the least uncovered point first yields each spread exactly once
    yield from rec(set(), [])


def subspread_search(pair: SubspreadPair, budget: int = 10**6):
    """Count Desarguesian (t'-1)-subspreads of D by brute force over per-element refinements.

    Returns (count, exhausted).  Only feasible for tiny cases; no completeness
    claim is made when the budget runs out.
    """
    options = []
    try:
        for e in pair.outer.elements:
            options.append(list(block_spreads(e, pair.tprime, budget)))
    except RuntimeError:
        return UNKNOWN, False
    total = 1
    for o in options:
        total *= len(o)
    if total > budget:
        return UNKNOWN, False
    count = 0
    idx = [0] * len(options)
    while True:
        elems = [s for o, i in zip(options, idx) for s in o[i]]
        if is_desarguesian(Spread(pair.outer.ctx, pair.outer.n, elems)) is True:
            count += 1
        j = len(idx) - 1
        while j >= 0:
            idx[j] += 1
            if idx[j] < len(options[j]):
                break
            idx[j] = 0
            j -= 1
        if j < 0:
            return count, True
