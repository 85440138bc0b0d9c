"""PG(n-1, F): canonical points, subspaces in RREF, span/meet, enumeration and collineation action."""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, product

import numpy as np

from . import linalg
from .gf import ExtFieldCtx, FieldError
from .semilinear import ProjSemilinear, SemilinearMap, apply

MAX_TABLE = 1 << 22


def gaussian_binomial(n: int, d: int, q: int) -> int:
    if d < 0 or d > n:
        return 0
    num = den = 1
    for i in range(d):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def n_points(n: int, q: int) -> int:
    return (q**n - 1) // (q - 1)


class PointSpace:
    """All points of PG(n-1, ctx) with a code -> point-index lookup table.

    A vector's code reads its coordinates as base-|F| digits, first coordinate
    most significant; points are listed in increasing order of canonical code.
    """

    def __new__(cls, ctx: ExtFieldCtx, n: int):
        return _point_space(ctx, n)

    @classmethod
    def _build(cls, ctx: ExtFieldCtx, n: int):
        self = object.__new__(cls)
        size = ctx.size
        if size**n > MAX_TABLE:
            raise FieldError(f"PG({n - 1},{size}) too large for a point table")
        self.ctx, self.n = ctx, n
        self.weights = size ** np.arange(n - 1, -1, -1, dtype=np.int64)
        codes = np.arange(1, size**n, dtype=np.int64)
        vecs = (codes[:, None] // self.weights) % size
        first = vecs[np.arange(len(vecs)), np.argmax(vecs != 0, axis=1)]
        canon = ctx.mul(ctx.inv_t[first][:, None], vecs) @ self.weights
        self.codes = np.unique(canon)
        self.count = len(self.codes)
        self.vectors = (self.codes[:, None] // self.weights) % size
        self.vectors.setflags(write=False)
        self.point_of = np.full(size**n, -1, dtype=np.int64)
        self.point_of[codes] = np.searchsorted(self.codes, canon)
        self.point_of.setflags(write=False)
        return self

    def index(self, v) -> np.ndarray:
        return self.point_of[np.asarray(v, dtype=np.int64) @ self.weights]

    def images(self, mats, exps=None) -> np.ndarray:
        """Point permutations induced by a batch of semilinear maps (rows: maps)."""
        from . import kernels

        mats = np.asarray(mats, dtype=np.int64)
        if exps is None or not np.any(exps):
            return kernels.point_images(self.ctx, mats, self.vectors, self.weights, self.point_of)
        exps = np.asarray(exps)
        out = np.empty((len(mats), self.count), dtype=np.int64)
        for e in np.unique(exps):
            sel = np.flatnonzero(exps == e)
            pts = self.ctx.frob_array(self.vectors, int(e))
            perm_e = self.index(pts)  # psi permutes points
            img = kernels.point_images(self.ctx, mats[sel], self.vectors, self.weights, self.point_of)
            out[sel] = img[:, perm_e]
        return out


@lru_cache(maxsize=None)
def _point_space(ctx, n):
    return PointSpace._build(ctx, n)


class Subspace:
    """A subspace of ctx^n stored by its RREF rows; equality is RREF equality."""

    __slots__ = ("ctx", "n", "rows", "_hash", "_points")

    def __init__(self, ctx: ExtFieldCtx, n: int, rows: tuple[tuple[int, ...], ...]):
        self.ctx = ctx
        self.n = n
        self.rows = rows
        self._hash = hash((ctx, n, rows))
        self._points = None

    @classmethod
    def from_rows(cls, ctx: ExtFieldCtx, rows, n: int | None = None) -> "Subspace":
        m = np.asarray(rows, dtype=np.int64)
        if n is None:
            n = m.shape[-1]
        if m.size == 0:
            return cls(ctx, n, ())
        m = m.reshape(-1, n)
        red, _ = linalg.rref(ctx, m)
        return cls(ctx, n, tuple(tuple(int(x) for x in row) for row in red))

    @classmethod
    def empty(cls, ctx: ExtFieldCtx, n: int) -> "Subspace":
        return cls(ctx, n, ())

    @classmethod
    def whole(cls, ctx: ExtFieldCtx, n: int) -> "Subspace":
        return cls.from_rows(ctx, np.eye(n, dtype=np.int64))

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64).reshape(self.dim, self.n)

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self._hash == other._hash
            and (self.ctx, self.n, self.rows) == (other.ctx, other.n, other.rows)
        )

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return (self.dim, self.rows) < (other.dim, other.rows)

    def __repr__(self):
        return f"Subspace({self.serialize() or 'empty'} in {self.n})"

    def serialize(self) -> str:
        return linalg.format_matrix(self.ctx, self.matrix) if self.dim else ""

    def vectors(self) -> np.ndarray:
        """Every vector of the subspace (|F|^dim rows)."""
        if self.dim == 0:
            return np.zeros((1, self.n), dtype=np.int64)
        ctx = self.ctx
        coeffs = np.array(list(product(range(ctx.size), repeat=self.dim)), dtype=np.int64)
        return linalg.matmul(ctx, coeffs, self.matrix)

    def point_indices(self) -> np.ndarray:
        """Sorted indices (in PointSpace(ctx, n)) of the projective points."""
        if self._points is None:
            if self.dim == 0:
                pts = np.zeros(0, dtype=np.int64)
            else:
                ps = PointSpace(self.ctx, self.n)
                pts = np.unique(ps.index(self.vectors()[1:]))
            pts.setflags(write=False)
            self._points = pts
        return self._points

    def contains(self, v) -> bool:
        v = np.asarray(v, dtype=np.int64)
        if not v.any():
            return True
        if self.dim == 0:
            return False
        return linalg.rank(self.ctx, np.vstack([self.matrix, v])) == self.dim

    def contains_subspace(self, other: "Subspace") -> bool:
        return span(self, other).dim == self.dim


def _check(a: Subspace, b: Subspace):
    if a.ctx != b.ctx or a.n != b.n:
        raise FieldError("subspaces live in different ambient spaces")


def span(a: Subspace, b: Subspace) -> Subspace:
    _check(a, b)
    if a.dim == 0:
        return b
    if b.dim == 0:
        return a
    return Subspace.from_rows(a.ctx, np.vstack([a.matrix, b.matrix]), a.n)


def meet(a: Subspace, b: Subspace) -> Subspace:
    _check(a, b)
    ctx, n = a.ctx, a.n
    if a.dim == 0 or b.dim == 0:
        return Subspace.empty(ctx, n)
    ann = [m for m in (linalg.nullspace(ctx, a.matrix), linalg.nullspace(ctx, b.matrix)) if len(m)]
    if not ann:
        return Subspace.whole(ctx, n)
    return Subspace.from_rows(ctx, linalg.nullspace(ctx, np.vstack(ann)), n)


def points_of(s: Subspace) -> np.ndarray:
    """Canonical vectors of the points of s."""
    ps = PointSpace(s.ctx, s.n)
    return ps.vectors[s.point_indices()]


def act(g: ProjSemilinear | SemilinearMap, s: Subspace) -> Subspace:
    m = g.rep if isinstance(g, ProjSemilinear) else g
    if m.ctx != s.ctx or m.r != s.n:
        raise FieldError("collineation and subspace do not match")
    if s.dim == 0:
        return s
    return Subspace.from_rows(s.ctx, apply(m, s.matrix), s.n)


def rref_patterns(n: int, d: int):
    return combinations(range(n), d)


def enumerate_subspaces(n: int, d: int, field: ExtFieldCtx | int):
    """Stream every d-dimensional subspace of F^n once: pivot patterns, then free entries."""
    if isinstance(field, int):
        from .gf import field_of_order

        field = field_of_order(field)
    ctx = field
    if not 0 <= d <= n:
        raise FieldError("bad subspace dimension")
    if d == 0:
        yield Subspace.empty(ctx, n)
        return
    for piv in rref_patterns(n, d):
        pivset = set(piv)
        free = [(i, c) for i, p in enumerate(piv) for c in range(p + 1, n) if c not in pivset]
        base = np.zeros((d, n), dtype=np.int64)
        for i, p in enumerate(piv):
            base[i, p] = 1
        for vals in product(range(ctx.size), repeat=len(free)):
            m = base.copy()
            for (i, c), v in zip(free, vals):
                m[i, c] = v
            yield Subspace(ctx, n, tuple(tuple(int(x) for x in row) for row in m))


def subspace_from_text(ctx: ExtFieldCtx, text: str, n: int) -> Subspace:
    text = text.strip()
    if not text:
        return Subspace.empty(ctx, n)
    return Subspace.from_rows(ctx, linalg.parse_matrix(ctx, text), n)
