"""Hot loops.

Each public function dispatches to a numba kernel when :data:`USE_NUMBA` is set
and to a vectorised numpy implementation otherwise.  Field arithmetic inside the
kernels works on raw code arrays: ``exp``/``log`` or full ``mul``/``add`` tables,
base-p digit arithmetic for sums, and xor whenever p = 2.
"""

from __future__ import annotations

import numpy as np

from ._jit import HAVE_NUMBA, njit
from .gf import ExtFieldCtx

USE_NUMBA = HAVE_NUMBA


def use_numba(flag: bool) -> None:
    """Switch backends at runtime (benchmarks and tests); a no-op request for numba without numba is ignored."""
    global USE_NUMBA
    USE_NUMBA = bool(flag) and HAVE_NUMBA


# -- scalar field ops usable from kernels -----------------------------------

@njit
def _fmul(a, b, exp, log, order):
    if a == 0 or b == 0:
        return 0
    return exp[(log[a] + log[b]) % order]


@njit
def _fadd(a, b, p):
    if p == 2:
        return a ^ b
    res = 0
    pw = 1
    while a > 0 or b > 0:
        res += ((a % p + b % p) % p) * pw
        a //= p
        b //= p
        pw *= p
    return res


@njit
def _fneg(a, p):
    if p == 2:
        return a
    res = 0
    pw = 1
    while a > 0:
        res += ((p - a % p) % p) * pw
        a //= p
        pw *= p
    return res


@njit
def _finv(a, exp, log, order):
    return exp[(order - log[a]) % order]


# -- batched determinants ---------------------------------------------------

@njit
def _batch_det_nb(mats, p, exp, log, order):
    nb = mats.shape[0]
    n = mats.shape[1]
    out = np.empty(nb, dtype=np.int64)
    m = np.empty((n, n), dtype=np.int64)
    for b in range(nb):
        for i in range(n):
            for j in range(n):
                m[i, j] = mats[b, i, j]
        d = 1
        for c in range(n):
            piv = -1
            for i in range(c, n):
                if m[i, c] != 0:
                    piv = i
                    break
            if piv < 0:
                d = 0
                break
            if piv != c:
                for j in range(n):
                    tmp = m[c, j]
                    m[c, j] = m[piv, j]
                    m[piv, j] = tmp
                d = _fneg(d, p)
            d = _fmul(d, m[c, c], exp, log, order)
            inv = _finv(m[c, c], exp, log, order)
            for i in range(c + 1, n):
                if m[i, c] != 0:
                    f = _fneg(_fmul(m[i, c], inv, exp, log, order), p)
                    for j in range(c, n):
                        m[i, j] = _fadd(m[i, j], _fmul(f, m[c, j], exp, log, order), p)
        out[b] = d
    return out


def _batch_det_np(ctx: ExtFieldCtx, mats: np.ndarray) -> np.ndarray:
    m = mats.copy()
    nb, n, _ = m.shape
    d = np.ones(nb, dtype=np.int64)
    alive = np.ones(nb, dtype=bool)
    rows = np.arange(nb)
    for c in range(n):
        col = m[:, c:, c]
        has = (col != 0).any(axis=1)
        alive &= has
        piv = c + np.argmax(col != 0, axis=1)
        swap = alive & (piv != c)
        if swap.any():
            r = rows[swap]
            top = m[r, c].copy()
            m[r, c] = m[r, piv[swap]]
            m[r, piv[swap]] = top
            d[swap] = ctx.neg_t[d[swap]]
        pv = np.where(alive, m[:, c, c], 1)
        d = ctx.mul(d, pv)
        inv = ctx.inv_t[pv]
        for i in range(c + 1, n):
            f = ctx.neg_t[ctx.mul(m[:, i, c], inv)]
            m[:, i, :] = ctx.add(m[:, i, :], ctx.mul(f[:, None], m[:, c, :]))
    return np.where(alive, d, 0)


def batch_det(ctx: ExtFieldCtx, mats) -> np.ndarray:
    mats = np.ascontiguousarray(mats, dtype=np.int64)
    if mats.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    if mats.shape[1] == 2:
        return ctx.sub(ctx.mul(mats[:, 0, 0], mats[:, 1, 1]), ctx.mul(mats[:, 0, 1], mats[:, 1, 0]))
    if USE_NUMBA:
        return _batch_det_nb(mats, ctx.p, ctx.exp, ctx.log, max(ctx.order, 1))
    return _batch_det_np(ctx, mats)


# -- images of all points under a batch of matrices --------------------------

@njit
def _point_images_nb(mats, pts, weights, point_of, p, k, mul_t, add_t):
    nb = mats.shape[0]
    n = mats.shape[1]
    npts = pts.shape[0]
    q = mul_t.shape[0]
    out = np.empty((nb, npts), dtype=np.int64)
    # cols[l, c] = code of c * (column l)
    cols = np.empty((n, q), dtype=np.int64)
    for b in range(nb):
        for l in range(n):
            for c in range(q):
                code = 0
                for i in range(n):
                    code += mul_t[c, mats[b, i, l]] * weights[i]
                cols[l, c] = code
        if p == 2:
            # digits are bit fields, so adding vectors is xor of their codes
            for j in range(npts):
                code = 0
                for l in range(n):
                    code ^= cols[l, pts[j, l]]
                out[b, j] = point_of[code]
        elif k == 1:
            for j in range(npts):
                code = 0
                for i in range(n):
                    acc = 0
                    for l in range(n):
                        acc += mats[b, i, l] * pts[j, l]
                    code += (acc % p) * weights[i]
                out[b, j] = point_of[code]
        else:
            for j in range(npts):
                code = 0
                for i in range(n):
                    acc = 0
                    for l in range(n):
                        acc = add_t[acc, mul_t[mats[b, i, l], pts[j, l]]]
                    code += acc * weights[i]
                out[b, j] = point_of[code]
    return out


def _point_images_np(ctx, mats, pts, weights, point_of):
    if ctx.k == 1:
        img = np.einsum("bil,jl->bji", mats, pts) % ctx.p
    else:
        prod = ctx.mul(mats[:, None, :, :], pts[None, :, None, :])
        img = ctx.sum(prod, axis=-1)
    return point_of[img @ weights]


def point_images(ctx: ExtFieldCtx, mats, pts, weights, point_of, chunk: int = 4096) -> np.ndarray:
    """``out[b, j]`` = index of the point ``<mats[b] @ pts[j]>``; ``weights`` turn vectors into codes."""
    mats = np.ascontiguousarray(mats, dtype=np.int64)
    pts = np.ascontiguousarray(pts, dtype=np.int64)
    outs = []
    for s in range(0, mats.shape[0], chunk):
        part = mats[s:s + chunk]
        if USE_NUMBA and ctx.mul_t is not None:
            outs.append(_point_images_nb(part, pts, weights, point_of, ctx.p, ctx.k, ctx.mul_t, ctx.add_t))
        else:
            outs.append(_point_images_np(ctx, part, pts, weights, point_of))
    if not outs:
        return np.zeros((0, pts.shape[0]), dtype=np.int64)
    return np.concatenate(outs)


# -- witness search over F_q^N (prime q) --------------------------------------
#
# Vectors are ints in [0, q^N); a subspace is grown by RREF rows chosen with
# strictly decreasing pivot positions.  ``allowed[v]`` says the fibre of v lies
# over a point of the target set; ``fiber[v]`` names that point.  The span must
# stay inside allowed vectors, and the partial span plus the best case for the
# remaining rows must still be able to hit every target point.

@njit
def _vadd(a, b, q, qpow, nd):
    if q == 2:
        return a ^ b
    res = 0
    for i in range(nd):
        res += ((a // qpow[i] + b // qpow[i]) % q) * qpow[i]
    return res


@njit
def _vscale(c, a, q, qpow, nd):
    res = 0
    for i in range(nd):
        res += ((a // qpow[i]) % q * c % q) * qpow[i]
    return res


@njit(nogil=True)
def _witness_dfs_nb(allowed, fiber, npoints, q, nd, dim, first_choices, count_only, max_out, node_budget):
    """Count (and optionally record) all dim-subspaces inside ``allowed`` covering all target points.

    Returns (count, nodes, records, exhausted) where records holds RREF rows of
    found subspaces (up to max_out) as ints.
    """
    qpow = np.empty(nd, dtype=np.int64)
    qpow[0] = 1
    for i in range(1, nd):
        qpow[i] = qpow[i - 1] * q
    span_cap = 1
    for _ in range(dim):
        span_cap *= q
    # per level: span elements
    span = np.zeros((dim + 1, span_cap), dtype=np.int64)
    span_len = np.zeros(dim + 1, dtype=np.int64)
    span_len[0] = 1
    hits = np.zeros(npoints, dtype=np.int64)
    covered = np.zeros(dim + 1, dtype=np.int64)
    rows = np.zeros(dim, dtype=np.int64)
    pivots = np.zeros(dim, dtype=np.int64)
    # candidate iteration state per level
    cand = np.zeros(dim, dtype=np.int64)
    records = np.zeros((max_out if not count_only else 1, dim), dtype=np.int64)
    count = 0
    nodes = 0
    level = 0
    cand[0] = -1
    fc_pos = -1
    while level >= 0:
        # advance candidate at this level
        found = False
        if level == 0:
            fc_pos += 1
            while fc_pos < first_choices.shape[0]:
                v = first_choices[fc_pos]
                found = True
                cand[0] = v
                break
        else:
            v = cand[level] + 1
            prev_piv = pivots[level - 1]
            # vectors with pivot < prev_piv, pivot = highest set digit, leading digit 1,
            # zeros at earlier pivots
            limit = qpow[prev_piv]  # v < q^prev_piv
            while v < limit:
                # leading digit must be 1
                hp = nd - 1
                while hp >= 0 and (v // qpow[hp]) % q == 0:
                    hp -= 1
                if hp < 0:
                    v += 1
                    continue
                if (v // qpow[hp]) % q != 1:
                    v = (v // qpow[hp] + 1) * qpow[hp]
                    continue
                # earlier rows must vanish in the new pivot column
                ok = True
                for j in range(level):
                    if (rows[j] // qpow[hp]) % q != 0:
                        ok = False
                        break
                if ok and allowed[v]:
                    found = True
                    cand[level] = v
                    break
                v += 1
        if not found:
            # backtrack
            if level > 0:
                base = span_len[level - 1]
                for i in range(base, span_len[level]):
                    pt = fiber[span[level, i]]
                    hits[pt] -= 1
            level -= 1
            continue
        nodes += 1
        if node_budget > 0 and nodes > node_budget:
            return count, nodes, records, False
        v = cand[level]
        # compute new span = old span + c*v + old span, check allowed
        base = span_len[level]
        ok = True
        new_len = base
        for c in range(1, q):
            cv = _vscale(c, v, q, qpow, nd)
            for i in range(base):
                w = _vadd(span[level, i], cv, q, qpow, nd)
                if not allowed[w]:
                    ok = False
                    break
                span[level + 1, new_len] = w
                new_len += 1
            if not ok:
                break
        if not ok:
            continue
        for i in range(base):
            span[level + 1, i] = span[level, i]
        # hit bookkeeping for new vectors
        newly = 0
        for i in range(base, new_len):
            pt = fiber[span[level + 1, i]]
            if hits[pt] == 0:
                newly += 1
            hits[pt] += 1
        covered[level + 1] = covered[level] + newly
        span_len[level + 1] = new_len
        rows[level] = v
        hp = nd - 1
        while (v // qpow[hp]) % q == 0:
            hp -= 1
        pivots[level] = hp
        # best case: each remaining doubling of the span adds new points
        remaining = dim - level - 1
        full = 1
        for _ in range(dim):
            full *= q
        extra = (full - new_len) // (q - 1)
        prune = covered[level + 1] + extra < npoints
        if remaining == 0:
            if covered[level + 1] == npoints:
                if not count_only and count < max_out:
                    for j in range(dim):
                        records[count, j] = rows[j]
                count += 1
            prune = True
        if prune:
            for i in range(base, new_len):
                pt = fiber[span[level + 1, i]]
                hits[pt] -= 1
            continue
        level += 1
        cand[level] = 0
    return count, nodes, records, True


def _witness_dfs_py(allowed, fiber, npoints, q, nd, dim, first_choices, count_only, max_out, node_budget):
    # the numba kernel body is plain python; run it uncompiled
    fn = getattr(_witness_dfs_nb, "py_func", _witness_dfs_nb)
    return fn(allowed, fiber, npoints, q, nd, dim, first_choices, count_only, max_out, node_budget)


def witness_dfs(allowed, fiber, npoints, q, nd, dim, first_choices, count_only=False, max_out=100000, node_budget=0):
    args = (
        np.ascontiguousarray(allowed, dtype=np.bool_),
        np.ascontiguousarray(fiber, dtype=np.int64),
        int(npoints), int(q), int(nd), int(dim),
        np.ascontiguousarray(first_choices, dtype=np.int64),
        bool(count_only), int(max(max_out, 1)), int(node_budget),
    )
    if USE_NUMBA:
        return _witness_dfs_nb(*args)
    return _witness_dfs_py(*args)
