"""Invertible semilinear maps v -> A psi(v) over an extension field, and their projective classes.

A map is stored as ``(matrix, e)`` with ``psi(x) = x^(p^e)`` applied
coordinate-wise relative to the standard basis.  Vectors are 1-d code arrays;
batches of vectors are 2-d arrays with one vector per row.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import kernels, linalg
from .gf import ExtFieldCtx, Fe, FieldError

ENUM_FILTER_LIMIT = 1 << 24


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.int64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SemilinearMap:
    ctx: ExtFieldCtx
    matrix: np.ndarray
    e: int = 0
    basis_tag: str = "std"

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise FieldError("semilinear map needs a square matrix")
        if linalg.rank(self.ctx, m) != m.shape[0]:
            raise FieldError("semilinear map needs an invertible matrix")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "e", int(self.e) % self.ctx.k)

    @property
    def r(self) -> int:
        return self.matrix.shape[0]

    def key(self):
        return (self.ctx, self.e, self.matrix.tobytes())

    def __eq__(self, other):
        return isinstance(other, SemilinearMap) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"SemilinearMap({self.serialize()})"

    def serialize(self) -> str:
        return f"{linalg.format_matrix(self.ctx, self.matrix)}|{self.e}"

    def is_linear(self) -> bool:
        return self.e == 0


def _check_vec(m: SemilinearMap, v):
    v = np.asarray(v, dtype=np.int64)
    if v.shape[-1] != m.r:
        raise FieldError(f"vector length {v.shape[-1]} does not match dimension {m.r}")
    if v.size and (v.min() < 0 or v.max() >= m.ctx.size):
        raise FieldError("vector entries outside the field")
    return v


def apply(m: SemilinearMap, v) -> np.ndarray:
    v = _check_vec(m, v)
    return linalg.matvec(m.ctx, m.matrix, m.ctx.frob_array(v, m.e))


def _check_pair(a: SemilinearMap, b: SemilinearMap):
    if a.ctx != b.ctx or a.r != b.r or a.basis_tag != b.basis_tag:
        raise FieldError("incompatible semilinear maps")


def compose(a: SemilinearMap, b: SemilinearMap) -> SemilinearMap:
    """a after b."""
    _check_pair(a, b)
    ctx = a.ctx
    mat = linalg.matmul(ctx, a.matrix, ctx.frob_array(b.matrix, a.e))
    return SemilinearMap(ctx, mat, (a.e + b.e) % ctx.k, a.basis_tag)


def inverse(m: SemilinearMap) -> SemilinearMap:
    ctx = m.ctx
    inv = linalg.inverse(ctx, m.matrix)
    back = (-m.e) % ctx.k
    return SemilinearMap(ctx, ctx.frob_array(inv, back), back, m.basis_tag)


def identity_map(ctx: ExtFieldCtx, r: int) -> SemilinearMap:
    return SemilinearMap(ctx, linalg.identity(r), 0)


def scalar_map(beta: Fe | int, r: int, ctx: ExtFieldCtx | None = None) -> SemilinearMap:
    if isinstance(beta, Fe):
        ctx, code = beta.ctx, beta.code
    else:
        code = int(beta)
    if ctx is None:
        raise FieldError("scalar_map needs a field")
    if code == 0:
        raise FieldError("scalar map by zero is not invertible")
    return SemilinearMap(ctx, code * linalg.identity(r), 0)


def is_invertible(m: SemilinearMap) -> bool:
    return linalg.rank(m.ctx, m.matrix) == m.r


def parse_semilinear(ctx: ExtFieldCtx, text: str) -> SemilinearMap:
    mat, e = text.strip().rsplit("|", 1)
    return SemilinearMap(ctx, linalg.parse_matrix(ctx, mat), int(e))


# -- projective classes --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ProjSemilinear:
    """A semilinear map modulo scalars from the subfield of degree ``scalar_deg`` over F_p."""

    rep: SemilinearMap
    scalar_deg: int

    def __post_init__(self):
        if self.rep.ctx.k % self.scalar_deg:
            raise FieldError("scalar group must be a subfield")

    def canonical(self) -> tuple[int, bytes]:
        return canonical_key(self.rep.ctx, self.rep.matrix[None], np.array([self.rep.e]), self.scalar_deg)[0]

    def __eq__(self, other):
        return isinstance(other, ProjSemilinear) and proj_eq(self, other)

    def __hash__(self):
        return hash(self.canonical())


def proj_eq(a: ProjSemilinear, b: ProjSemilinear) -> bool:
    if a.scalar_deg != b.scalar_deg:
        raise FieldError("projective classes over different scalar groups")
    _check_pair(a.rep, b.rep)
    if a.rep.e != b.rep.e:
        return False
    ctx = a.rep.ctx
    quot = linalg.matmul(ctx, a.rep.matrix, linalg.inverse(ctx, b.rep.matrix))
    lam = int(quot[0, 0])
    if lam == 0 or not np.array_equal(quot, lam * linalg.identity(a.rep.r)):
        return False
    return int(ctx.frob_array(lam, a.scalar_deg)) == lam


def canonical_key(ctx: ExtFieldCtx, mats, exps, scalar_deg: int) -> list[tuple[int, bytes]]:
    """Hashable class keys for a batch of maps modulo F_{p^scalar_deg}^* scalars."""
    mats = np.asarray(mats, dtype=np.int64)
    norm = normalize_batch(ctx, mats, scalar_deg)
    return [(int(e), m.tobytes()) for m, e in zip(norm, np.asarray(exps))]


def normalize_batch(ctx: ExtFieldCtx, mats, scalar_deg: int) -> np.ndarray:
    """Representative of each matrix modulo the scalar subgroup F_{p^d}^*.

    For the full field the first nonzero entry is scaled to 1; for a proper
    subfield the lexicographically least of the scaled copies is kept.
    """
    mats = np.asarray(mats, dtype=np.int64)
    nb = mats.shape[0]
    flat = mats.reshape(nb, -1)
    if scalar_deg == ctx.k:
        first = flat[np.arange(nb), np.argmax(flat != 0, axis=1)]
        return ctx.mul(ctx.inv_t[first][:, None], flat).reshape(mats.shape)
    scalars = [int(s) for s in ctx.subfield_elements(scalar_deg) if s]
    cands = np.stack([ctx.mul(s, flat) for s in scalars], axis=1)  # nb x S x n
    best = cands[:, 0]
    for j in range(1, len(scalars)):
        c = cands[:, j]
        diff = c != best
        idx = np.argmax(diff, axis=1)
        rows = np.arange(nb)
        smaller = diff.any(axis=1) & (c[rows, idx] < best[rows, idx])
        best = np.where(smaller[:, None], c, best)
    return best.reshape(mats.shape)


# -- group enumeration ------------------------------------------------------------

def gl_order(r: int, q: int) -> int:
    out = 1
    for i in range(r):
        out *= q**r - q**i
    return out


def _all_matrices(ctx: ExtFieldCtx, r: int, start: int, stop: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    ent = np.empty((len(codes), r * r), dtype=np.int64)
    for i in range(r * r - 1, -1, -1):
        ent[:, i] = codes % ctx.size
        codes //= ctx.size
    return ent.reshape(-1, r, r)


def enumerate_gl(ctx: ExtFieldCtx, r: int, chunk: int = 1 << 18):
    """Yield batches of GL(r, ctx) in lexicographic order of row-major entries."""
    total = ctx.size ** (r * r)
    if total <= ENUM_FILTER_LIMIT:
        for s in range(0, total, chunk):
            mats = _all_matrices(ctx, r, s, min(total, s + chunk))
            keep = kernels.batch_det(ctx, mats) != 0
            if keep.any():
                yield mats[keep]
        return
    # rank-by-rank: rows taken in lexicographic order, skipping the span so far
    rows = np.array(list(product(range(ctx.size), repeat=r)), dtype=np.int64)
    batch = []

    def rec(prefix):
        if len(prefix) == r:
            batch.append(np.array(prefix))
            return
        for row in rows:
            cand = np.array(prefix + [row])
            if linalg.rank(ctx, cand) == len(cand):
                rec(prefix + [row])

    for first in rows[1:]:
        rec([first])
        if len(batch) >= chunk:
            yield np.array(batch)
            batch = []
    if batch:
        yield np.array(batch)


def gl_matrices(ctx: ExtFieldCtx, r: int) -> np.ndarray:
    parts = list(enumerate_gl(ctx, r))
    return np.concatenate(parts) if parts else np.zeros((0, r, r), dtype=np.int64)


def enumerate_gammal(ctx: ExtFieldCtx, r: int):
    """All of GammaL(r, ctx) as SemilinearMap objects, by matrix then automorphism exponent."""
    for batch in enumerate_gl(ctx, r):
        for m in batch:
            for e in range(ctx.k):
                yield SemilinearMap(ctx, m, e)


def pgl_reps(ctx: ExtFieldCtx, r: int) -> np.ndarray:
    """GL matrices whose first nonzero entry is 1: one per class of PGL(r, ctx)."""
    mats = gl_matrices(ctx, r)
    flat = mats.reshape(len(mats), -1)
    first = flat[np.arange(len(flat)), np.argmax(flat != 0, axis=1)]
    return mats[first == 1]


def random_gl(ctx: ExtFieldCtx, r: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        m = rng.integers(0, ctx.size, size=(r, r))
        if linalg.rank(ctx, m) == r:
            return m.astype(np.int64)


def random_gammal(ctx: ExtFieldCtx, r: int, rng: np.random.Generator) -> SemilinearMap:
    return SemilinearMap(ctx, random_gl(ctx, r, rng), int(rng.integers(0, ctx.k)))
