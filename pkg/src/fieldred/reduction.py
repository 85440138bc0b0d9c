"""Vector field reduction F: F_{q^t}^r -> F_q^{rt} and its action on semilinear maps.

Vectors over F_q are code arrays of small-field codes; a whole vector also has
an integer code with the FIRST coordinate most significant (so it lines up with
row-echelon pivot order).
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from . import linalg
from .gf import ExtFieldCtx, Fe, FieldError, subfield_embedding
from .semilinear import SemilinearMap


def relative_degree(big: ExtFieldCtx, small: ExtFieldCtx) -> int:
    if big.p != small.p or big.k % small.k:
        raise FieldError(f"{small!r} is not a subfield of {big!r}")
    return big.k // small.k


def default_basis(big: ExtFieldCtx, small: ExtFieldCtx) -> list[int]:
    """{1, g, ..., g^(t-1)} with g the least element of degree t over the subfield."""
    t = relative_degree(big, small)
    h = small.k
    # degree of x over F_q = least m with x^(q^m) = x
    for g in range(big.size):
        deg = next(m for m in range(1, t + 1) if int(big.frob_array(g, h * m)) == g)
        if deg == t:
            break
    basis = [1]
    for _ in range(1, t):
        basis.append(int(big.mul(basis[-1], g)))
    return basis


class VfrMap:
    def __init__(self, big: ExtFieldCtx, small: ExtFieldCtx, r: int, basis=None, embedding=None):
        self.big = big
        self.small = small
        self.r = int(r)
        self.t = relative_degree(big, small)
        if self.r < 1:
            raise FieldError("dimension must be positive")
        if basis is None:
            basis = default_basis(big, small)
        self.basis = tuple(int(b.code) if isinstance(b, Fe) else int(b) for b in basis)
        if len(self.basis) != self.t:
            raise FieldError(f"basis needs {self.t} elements")
        emb = subfield_embedding(small, big) if embedding is None else np.asarray(embedding, dtype=np.int64)
        self.embedding = emb
        q, t = small.size, self.t
        # every F_q-combination of the basis, indexed by its coordinate code (first coord most significant)
        combos = np.arange(q**t, dtype=np.int64)
        coords = np.empty((q**t, t), dtype=np.int64)
        c = combos.copy()
        for i in range(t - 1, -1, -1):
            coords[:, i] = c % q
            c //= q
        vals = np.zeros(q**t, dtype=np.int64)
        for i, b in enumerate(self.basis):
            vals = big.add(vals, big.mul(emb[coords[:, i]], b))
        if len(np.unique(vals)) != big.size:
            raise FieldError("basis is not linearly independent over the subfield")
        self.comb = vals  # coordinate code -> big code
        self.coord = np.empty((big.size, t), dtype=np.int64)
        self.coord[vals] = coords  # big code -> t small codes
        self.q = q
        self.n = self.r * t
        self.weights = q ** np.arange(self.n - 1, -1, -1, dtype=np.int64)

    def __repr__(self):
        return f"VfrMap({self.descriptor()})"

    def descriptor(self) -> str:
        basis = ";".join(self.big.format(b) for b in self.basis)
        return f"{self.big.size}/{self.q}:{self.r}:{basis}"

    def key(self):
        return (self.big, self.small, self.r, self.basis, self.embedding.tobytes())

    def __eq__(self, other):
        return isinstance(other, VfrMap) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    # vectors --------------------------------------------------------------
    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.int64)
        if v.shape[-1] != self.r:
            raise FieldError(f"expected vectors of length {self.r}")
        return self.coord[v].reshape(v.shape[:-1] + (self.n,))

    def inverse(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=np.int64)
        if w.shape[-1] != self.n:
            raise FieldError(f"expected vectors of length {self.n}")
        blocks = w.reshape(w.shape[:-1] + (self.r, self.t))
        tw = self.q ** np.arange(self.t - 1, -1, -1, dtype=np.int64)
        return self.comb[blocks @ tw]

    def small_code(self, w) -> np.ndarray:
        """Integer code of F_q-vectors (first coordinate most significant)."""
        return np.asarray(w, dtype=np.int64) @ self.weights

    def small_vectors(self, codes) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        return (codes[..., None] // self.weights) % self.q

    @cached_property
    def big_weights(self) -> np.ndarray:
        return self.big.size ** np.arange(self.r - 1, -1, -1, dtype=np.int64)

    @cached_property
    def unit_images(self) -> np.ndarray:
        """Row j = F^{-1}(e_j)."""
        return self.inverse(np.eye(self.n, dtype=np.int64))


def vfr_apply(f: VfrMap, v) -> np.ndarray:
    return f.apply(v)


def vfr_inverse(f: VfrMap, w) -> np.ndarray:
    return f.inverse(w)


def vfr_transition(f: VfrMap, g: VfrMap) -> np.ndarray:
    """The F_q-matrix xi with xi F(v) = G(v)."""
    if (f.big, f.small, f.r) != (g.big, g.small, g.r):
        raise FieldError("transition needs maps with the same field pair and dimension")
    return g.apply(f.unit_images).T.copy()


def blowup(f: VfrMap, xi: SemilinearMap) -> SemilinearMap:
    """The F_q-semilinear map phi with phi(F(v)) = F(xi v)."""
    if xi.ctx != f.big or xi.r != f.r:
        raise FieldError("map does not live on the domain of the reduction")
    if linalg.rank(f.big, xi.matrix) != f.r:
        raise FieldError("singular map")
    cols = f.apply(_apply_batch(xi, f.unit_images))
    return SemilinearMap(f.small, cols.T.copy(), xi.e % f.small.k)


def _apply_batch(xi: SemilinearMap, vs) -> np.ndarray:
    ctx = xi.ctx
    return linalg.matvec(ctx, xi.matrix, ctx.frob_array(vs, xi.e))


def blowup_batch(f: VfrMap, mats, exps) -> tuple[np.ndarray, np.ndarray]:
    """Blow up many (matrix, e) pairs at once; returns (F_q-matrices, F_q aut-exps)."""
    mats = np.asarray(mats, dtype=np.int64)
    exps = np.asarray(exps, dtype=np.int64)
    ctx = f.big
    units = f.unit_images  # n x r
    out = np.empty((len(mats), f.n, f.n), dtype=np.int64)
    for e in np.unique(exps):
        sel = np.flatnonzero(exps == e)
        fu = ctx.frob_array(units, int(e))  # n x r
        # images[b, j, :] = mats[b] @ fu[j]
        prod = ctx.mul(mats[sel][:, None, :, :], fu[None, :, None, :])
        imgs = ctx.sum(prod, axis=-1)  # b x n x r
        out[sel] = np.swapaxes(f.apply(imgs), 1, 2)
    return out, exps % f.small.k


def compose_vfr(f2: VfrMap, f1: VfrMap) -> VfrMap:
    """F2 after F1 as a single reduction F_{q^t}^r -> F_q^{rt}."""
    if f1.small != f2.big or f2.r != f1.r * f1.t:
        raise FieldError("reduction maps do not chain")
    emb_mid = f1.embedding  # F_{q^t'} -> F_{q^t}
    basis = [int(f1.big.mul(emb_mid[b_i], d_j)) for d_j in f1.basis for b_i in f2.basis]
    embedding = emb_mid[f2.embedding]  # F_q -> F_{q^t}
    return VfrMap(f1.big, f2.small, f1.r, basis, embedding)


def desarguesian_partition(f: VfrMap):
    """Blocks {F(alpha v)} for canonical directions v; returns list of (direction, Subspace)."""
    from .projgeo import PointSpace

    ps = PointSpace(f.big, f.r)
    return [(ps.vectors[i].copy(), field_reduce_vector(f, ps.vectors[i])) for i in range(ps.count)]


def block_vectors(f: VfrMap, v) -> np.ndarray:
    """F(alpha v) for every alpha in F_{q^t} (including 0), as F_q-vectors."""
    v = np.asarray(v, dtype=np.int64)
    alphas = np.arange(f.big.size, dtype=np.int64)
    return f.apply(f.big.mul(alphas[:, None], v[None, :]))


def field_reduce_vector(f: VfrMap, v):
    from .projgeo import Subspace

    v = np.asarray(v, dtype=np.int64)
    if not v.any():
        raise FieldError("zero vector has no field reduction")
    gens = f.apply(f.big.mul(np.array(f.basis)[:, None], v[None, :]))
    return Subspace.from_rows(f.small, gens)


def field_reduce_subspace(f: VfrMap, rows):
    """F(W) for the F_{q^t}-span W of rows: an F_q-subspace of dimension t dim(W)."""
    from .projgeo import Subspace

    rows = np.atleast_2d(np.asarray(rows, dtype=np.int64))
    basis = np.array(f.basis, dtype=np.int64)
    gens = f.apply(f.big.mul(basis[None, :, None], rows[:, None, :]).reshape(-1, f.r))
    return Subspace.from_rows(f.small, gens, f.n)


def field_reduce_point(f: VfrMap, point) -> "object":
    return field_reduce_vector(f, point)


def parse_vfr(text: str, r_override: int | None = None) -> VfrMap:
    from .gf import field_of_order, parse_fe

    head, r, basis = text.strip().split(":", 2)
    Q, q = (int(x) for x in head.split("/"))
    big, small = field_of_order(Q), field_of_order(q)
    elems = [parse_fe(big, b).code for b in basis.split(";")]
    return VfrMap(big, small, r_override or int(r), elems)


def standard_vfr(q: int, t: int, r: int) -> VfrMap:
    from .gf import field_of_order

    small = field_of_order(q)
    big = field_of_order(q**t)
    return VfrMap(big, small, r)
