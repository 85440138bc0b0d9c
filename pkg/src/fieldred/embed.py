"""SL(r, q^t) -> PGL(rt, q) through field reduction, and a bounded search for spread-stabilising sections."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

import numpy as np

from . import kernels, linalg
from .errors import UnsupportedSize
from .gf import field_of_order
from .reduction import VfrMap, blowup_batch
from .semilinear import gl_matrices, gl_order, normalize_batch
from .spreads import UNKNOWN, build_desarguesian, stabilises

EXHAUSTIVE_LIMIT = 10**6


@dataclass
class EmbeddingReport:
    q: int
    t: int
    r: int
    gcd_value: int
    applicable: bool
    domain_order: int
    image_order: int
    injective: bool
    homomorphic: bool
    image_stabilises_D: bool
    pairs_checked: int
    kernel_scalars: list = field(default_factory=list)


def kernel_scalars(q: int, t: int, r: int) -> list[int]:
    """Codes of the scalars lam != 1 in F_{q^t} with det(lam I) = lam^r = 1."""
    big = field_of_order(q**t)
    lams = np.arange(1, big.size)
    return [int(x) for x in lams[big.pow(lams, r) == 1] if x != 1]


def psl_equals_sl_check(q: int, t: int, r: int) -> bool:
    return not kernel_scalars(q, t, r)


def sl_matrices(ctx, r: int) -> np.ndarray:
    mats = gl_matrices(ctx, r)
    return mats[kernels.batch_det(ctx, mats) == 1]


def _keys(ctx, mats) -> np.ndarray:
    return normalize_batch(ctx, mats, ctx.k).reshape(len(mats), -1)


def check_embedding(q: int, t: int, r: int, mode: str = "exhaustive", samples: int = 1000, seed: int = 0) -> EmbeddingReport:
    big = field_of_order(q**t)
    small = field_of_order(q)
    g = gcd(q**t - 1, r)
    f = VfrMap(big, small, r)
    sl_order = gl_order(r, big.size) // (big.size - 1)
    if sl_order > EXHAUSTIVE_LIMIT:
        raise UnsupportedSize(f"|SL({r},{big.size})| = {sl_order} too large to enumerate")
    sl = sl_matrices(big, r)
    bm, _ = blowup_batch(f, sl, np.zeros(len(sl), dtype=np.int64))
    keys = _keys(small, bm)
    uniq = np.unique(keys, axis=0)
    injective = len(uniq) == len(sl)
    # homomorphism: iota(a b) = iota(a) iota(b), with a b located in the SL list
    index = {m.tobytes(): i for i, m in enumerate(sl)}
    n = len(sl)
    if mode == "exhaustive":
        ii, jj = np.divmod(np.arange(n * n), n)
    else:
        rng = np.random.default_rng(seed)
        ii = rng.integers(0, n, samples)
        jj = rng.integers(0, n, samples)
    homomorphic = True
    for s in range(0, len(ii), 1 << 16):
        a, b = ii[s:s + (1 << 16)], jj[s:s + (1 << 16)]
        prod = linalg.matmul(big, sl[a], sl[b])
        idx = np.array([index[m.tobytes()] for m in prod])
        lhs = _keys(small, bm[idx])
        rhs = _keys(small, linalg.matmul(small, bm[a], bm[b]))
        if not np.array_equal(lhs, rhs):
            homomorphic = False
            break
    d = build_desarguesian(f)
    stab = bool(np.concatenate([stabilises(d, bm[s:s + 8192]) for s in range(0, len(bm), 8192)]).all())
    return EmbeddingReport(
        q, t, r, g, g == 1, len(sl), len(uniq), injective, homomorphic, stab, len(ii), kernel_scalars(q, t, r)
    )


def _generators(ctx, r: int) -> list[np.ndarray]:
    """diag(omega, 1, ...), a transvection and a cyclic permutation: they generate GL(r, ctx)."""
    d = np.eye(r, dtype=np.int64)
    d[0, 0] = ctx.generator
    tr = np.eye(r, dtype=np.int64)
    if r > 1:
        tr[0, 1] = 1
    perm = np.roll(np.eye(r, dtype=np.int64), 1, axis=0)
    return [d, tr, perm]


def section_search(q: int, t: int, r: int, budget: int = 10**6):
    """Look for a splitting of GL(r, q^t)/F_q^* -> PGL(r, q^t).

    A splitting gives an embedding of PGL(r, q^t) into the linear part of the
    stabiliser of D.  Every lift choice for a fixed generating set is tried;
    the generated subgroup must have exactly |PGL(r, q^t)| elements.  This
    only covers sections of that projection.  Returns (found lifts | None | UNKNOWN, nodes).
    """
    big = field_of_order(q**t)
    small_codes = [int(x) for x in big.subfield_elements(field_of_order(q).k) if x]
    gens = _generators(big, r)
    pgl_order = 1
    for i in range(r):
        pgl_order *= big.size**r - big.size**i
    pgl_order //= big.size - 1
    # scalar representatives modulo F_q^*
    cosets, seen = [], set()
    for lam in range(1, big.size):
        key = min(int(big.mul(lam, s)) for s in small_codes)
        if key not in seen:
            seen.add(key)
            cosets.append(lam)
    nodes = 0

    def key_of(m):
        return normalize_batch(big, m[None], field_of_order(q).k)[0].tobytes()

    from itertools import product

    for lifts in product(cosets, repeat=len(gens)):
        mats = [big.mul(l, g) for l, g in zip(lifts, gens)]
        start = np.eye(r, dtype=np.int64)
        group = {key_of(start): start}
        frontier = [start]
        too_big = False
        while frontier and not too_big:
            nxt = []
            for x in frontier:
                for m in mats:
                    y = linalg.matmul(big, m, x)
                    k = key_of(y)
                    nodes += 1
                    if nodes > budget:
                        return UNKNOWN, nodes
                    if k not in group:
                        group[k] = y
                        nxt.append(y)
                        if len(group) > pgl_order:
                            too_big = True
                            break
                if too_big:
                    break
            frontier = nxt
        if len(group) == pgl_order:
            return list(zip(lifts, gens)), nodes
    return None, nodes
