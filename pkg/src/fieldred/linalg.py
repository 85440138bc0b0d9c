"""Dense linear algebra over an ExtFieldCtx; matrices are int64 arrays of element codes."""

from __future__ import annotations

import numpy as np

from .gf import ExtFieldCtx, FieldError


def as_codes(a) -> np.ndarray:
    return np.asarray(a, dtype=np.int64)


def matmul(ctx: ExtFieldCtx, a, b) -> np.ndarray:
    """Matrix product; broadcasts over leading batch axes like ``np.matmul``."""
    a = as_codes(a)
    b = as_codes(b)
    if ctx.k == 1:
        return np.matmul(a, b) % ctx.p
    vec = b.ndim == 1
    if vec:
        b = b[:, None]
    prod = ctx.mul(a[..., :, :, None], b[..., None, :, :])
    out = ctx.sum(prod, axis=-2)
    return out[..., 0] if vec else out


def matvec(ctx: ExtFieldCtx, a, v) -> np.ndarray:
    """``a @ v`` for a single vector or a batch of row vectors ``v`` (shape N x n)."""
    a = as_codes(a)
    v = as_codes(v)
    if v.ndim == 1:
        return matmul(ctx, a, v)
    return matmul(ctx, v, a.T)


def scale(ctx: ExtFieldCtx, c, a) -> np.ndarray:
    return ctx.mul(np.broadcast_to(as_codes(c), np.shape(a)), as_codes(a))


def rref(ctx: ExtFieldCtx, m) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form with zero rows dropped, plus pivot columns."""
    m = as_codes(m).copy()
    if m.ndim != 2:
        raise FieldError("rref expects a 2-d array")
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(m[r:, c])
        if len(nz) == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        m[r] = ctx.mul(int(ctx.inv_t[m[r, c]]), m[r])
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] = ctx.sub(m[i], ctx.mul(int(m[i, c]), m[r]))
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(ctx: ExtFieldCtx, m) -> int:
    m = as_codes(m)
    if m.size == 0:
        return 0
    return len(rref(ctx, m)[1])


def inverse(ctx: ExtFieldCtx, a) -> np.ndarray:
    """Gauss-Jordan inverse; raises FieldError when singular."""
    a = as_codes(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise FieldError("inverse of a non-square matrix")
    aug = np.concatenate([a, np.eye(n, dtype=np.int64)], axis=1)
    red, piv = rref(ctx, aug)
    if piv[:n] != list(range(n)) or len(red) < n:
        raise FieldError("singular matrix")
    return red[:, n:]


def det(ctx: ExtFieldCtx, a) -> int:
    m = as_codes(a).copy()
    n = m.shape[0]
    d = 1
    for c in range(n):
        nz = np.flatnonzero(m[c:, c])
        if len(nz) == 0:
            return 0
        piv = c + int(nz[0])
        if piv != c:
            m[[c, piv]] = m[[piv, c]]
            d = int(ctx.neg_t[d])
        d = int(ctx.mul(d, int(m[c, c])))
        inv = int(ctx.inv_t[m[c, c]])
        for i in range(c + 1, n):
            if m[i, c]:
                f = int(ctx.mul(int(m[i, c]), inv))
                m[i] = ctx.sub(m[i], ctx.mul(f, m[c]))
    return d


def nullspace(ctx: ExtFieldCtx, m, ncols: int | None = None) -> np.ndarray:
    """Basis (as rows) of {x : m x = 0}."""
    m = as_codes(m)
    if m.size == 0:
        n = ncols if ncols is not None else m.shape[1]
        return np.eye(n, dtype=np.int64)
    n = m.shape[1]
    red, piv = rref(ctx, m)
    free = [c for c in range(n) if c not in piv]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, pc in enumerate(piv):
            basis[i, pc] = ctx.neg_t[red[row, f]]
    return basis


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def format_matrix(ctx: ExtFieldCtx, m) -> str:
    m = as_codes(m)
    if m.ndim == 1:
        m = m[None, :]
    return ";".join(",".join(ctx.format(int(x)) for x in row) for row in m)


def parse_matrix(ctx: ExtFieldCtx, text: str) -> np.ndarray:
    """Inverse of :func:`format_matrix`; each entry spans ``k`` comma-separated residues."""
    rows = []
    for row in text.strip().split(";"):
        vals = [int(x) for x in row.split(",")]
        if len(vals) % ctx.k:
            raise FieldError(f"row {row!r} does not split into {ctx.k}-residue entries")
        rows.append([ctx.element(vals[i:i + ctx.k]) for i in range(0, len(vals), ctx.k)])
    if len({len(r) for r in rows}) != 1:
        raise FieldError("ragged matrix")
    return np.array(rows, dtype=np.int64)
