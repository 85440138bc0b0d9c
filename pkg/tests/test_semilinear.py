import numpy as np
import pytest

from fieldred.gf import Fe, FieldError, field_of_order
from fieldred.semilinear import (
    ProjSemilinear,
    SemilinearMap,
    apply,
    canonical_key,
    compose,
    enumerate_gammal,
    gl_matrices,
    gl_order,
    identity_map,
    inverse,
    parse_semilinear,
    pgl_reps,
    proj_eq,
    random_gammal,
    scalar_map,
)


@pytest.mark.parametrize("r,q,order", [(1, 4, 3), (2, 2, 6), (2, 3, 48), (2, 4, 180), (3, 2, 168), (4, 2, 20160)])
def test_gl_enumeration_counts(r, q, order):
    ctx = field_of_order(q)
    mats = gl_matrices(ctx, r)
    assert gl_order(r, q) == order == len(mats)
    assert len({m.tobytes() for m in mats}) == order
    assert len(pgl_reps(ctx, r)) == order // (q - 1)


@pytest.mark.parametrize("q,r", [(4, 1), (4, 2), (8, 2), (9, 2)])
def test_semilinearity_and_group_laws(q, r, rng):
    ctx = field_of_order(q)
    for _ in range(100):
        a, b, c = (random_gammal(ctx, r, rng) for _ in range(3))
        v = rng.integers(0, q, size=r)
        w = rng.integers(0, q, size=r)
        lam = int(rng.integers(1, q))
        # tau(v + w) = tau(v) + tau(w), tau(lam v) = psi(lam) tau(v)
        assert np.array_equal(apply(a, ctx.add(v, w)), ctx.add(apply(a, v), apply(a, w)))
        assert np.array_equal(apply(a, ctx.mul(lam, v)), ctx.mul(ctx.frob_array(lam, a.e), apply(a, v)))
        assert np.array_equal(apply(compose(a, b), v), apply(a, apply(b, v)))
        assert compose(compose(a, b), c) == compose(a, compose(b, c))
        assert compose(a, inverse(a)) == identity_map(ctx, r)
        assert compose(inverse(a), a) == identity_map(ctx, r)


def test_inverse_examples():
    ctx = field_of_order(8)
    ident = identity_map(ctx, 3)
    assert inverse(ident) == ident
    beta = Fe(ctx, 5)
    assert inverse(scalar_map(beta, 3)) == scalar_map(beta.inverse(), 3)


def test_serialize_roundtrip(rng):
    ctx = field_of_order(9)
    for _ in range(20):
        m = random_gammal(ctx, 3, rng)
        assert parse_semilinear(ctx, m.serialize()) == m


@pytest.mark.parametrize("r", [1, 2])
def test_projective_classes_have_full_scalar_size(r):
    ctx = field_of_order(4)
    maps = list(enumerate_gammal(ctx, r))
    keys = canonical_key(ctx, [m.matrix for m in maps], [m.e for m in maps], ctx.k)
    counts = {}
    for k in keys:
        counts[k] = counts.get(k, 0) + 1
    assert set(counts.values()) == {ctx.size - 1}


def test_proj_eq_subfield_scalars():
    ctx = field_of_order(4)
    m = SemilinearMap(ctx, [[1, 2], [0, 1]], 1)
    # over F_4 scalars every nonzero multiple is equal; over F_2 only 1 * m
    alpha_m = SemilinearMap(ctx, ctx.mul(2, m.matrix), 1)
    assert proj_eq(ProjSemilinear(m, 2), ProjSemilinear(alpha_m, 2))
    assert not proj_eq(ProjSemilinear(m, 1), ProjSemilinear(alpha_m, 1))
    assert ProjSemilinear(m, 2) == ProjSemilinear(alpha_m, 2)
    assert hash(ProjSemilinear(m, 2)) == hash(ProjSemilinear(alpha_m, 2))


def test_errors():
    ctx = field_of_order(4)
    with pytest.raises(FieldError):
        SemilinearMap(ctx, [[1, 1], [1, 1]], 0)
    assert SemilinearMap(ctx, [[1]], 3).e == 1
    with pytest.raises(FieldError):
        compose(identity_map(ctx, 1), identity_map(ctx, 2))
    with pytest.raises(FieldError):
        apply(identity_map(ctx, 2), [1, 2, 3])
    with pytest.raises(FieldError):
        scalar_map(0, 2, ctx)
