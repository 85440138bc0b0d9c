import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fieldred.gf import FieldError, field_of_order
from fieldred.projgeo import PointSpace, Subspace
from fieldred.reduction import (
    VfrMap,
    blowup,
    blowup_batch,
    compose_vfr,
    desarguesian_partition,
    field_reduce_vector,
    parse_vfr,
    standard_vfr,
    vfr_apply,
    vfr_inverse,
    vfr_transition,
)
from fieldred.semilinear import (
    SemilinearMap,
    apply,
    compose,
    enumerate_gammal,
    gl_matrices,
    identity_map,
    random_gammal,
    scalar_map,
)

ALPHA = 2  # code of x in F_4 = F_2[x]/(x^2 + x + 1)


def test_basic_examples():
    f1 = standard_vfr(2, 2, 1)
    assert f1.basis == (1, ALPHA)
    assert vfr_apply(f1, [ALPHA]).tolist() == [0, 1]
    assert vfr_inverse(f1, [1, 1]).tolist() == [3]
    assert vfr_inverse(f1, [0, 0]).tolist() == [0]
    f2 = standard_vfr(2, 2, 2)
    assert vfr_apply(f2, [3, 1]).tolist() == [1, 1, 1, 0]


def test_transition_example():
    f4, f2 = field_of_order(4), field_of_order(2)
    f = VfrMap(f4, f2, 1, [1, ALPHA])
    g = VfrMap(f4, f2, 1, [1, 3])
    assert vfr_transition(f, g).tolist() == [[1, 1], [0, 1]]


def test_blowup_examples():
    f = standard_vfr(2, 2, 1)
    assert blowup(f, scalar_map(ALPHA, 1, f.big)).matrix.tolist() == [[0, 1], [1, 1]]
    assert blowup(f, identity_map(f.big, 1)) == identity_map(f.small, 2)


def test_field_reduction_of_a_point():
    f = standard_vfr(2, 2, 2)
    line = field_reduce_vector(f, [1, 0])
    pts = {tuple(v) for v in line.vectors()[1:].tolist()}
    assert pts == {(1, 0, 0, 0), (0, 1, 0, 0), (1, 1, 0, 0)}
    whole = field_reduce_vector(standard_vfr(2, 3, 1), [1])
    assert whole == Subspace.whole(field_of_order(2), 3)


@pytest.mark.parametrize("q,t,r", [(2, 2, 2), (2, 3, 2), (3, 2, 2), (4, 2, 2), (2, 4, 1), (2, 2, 3)])
def test_bijective_and_linear(q, t, r, rng):
    f = standard_vfr(q, t, r)
    big, small = f.big, f.small
    allv = np.array(np.meshgrid(*[np.arange(big.size)] * r, indexing="ij")).reshape(r, -1).T
    imgs = f.apply(allv)
    codes = imgs @ (small.size ** np.arange(f.n - 1, -1, -1))
    assert len(np.unique(codes)) == big.size**r
    assert np.array_equal(f.inverse(imgs), allv)
    # basis independence over F_q: the t x t coordinate matrix has full rank
    assert len(set(f.basis)) == t
    for _ in range(100):
        v, w = rng.integers(0, big.size, size=(2, r))
        lam = int(rng.integers(0, small.size))
        assert np.array_equal(f.apply(big.add(v, w)), small.add(f.apply(v), f.apply(w)))
        lam_big = int(f.embedding[lam])
        assert np.array_equal(f.apply(big.mul(lam_big, v)), small.mul(lam, f.apply(v)))


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([(2, 3, 2), (4, 2, 2), (3, 2, 2)]), st.data())
def test_blowup_commutes(params, data):
    f = standard_vfr(*params)
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    xi = random_gammal(f.big, f.r, rng)
    v = rng.integers(0, f.big.size, size=f.r)
    phi = blowup(f, xi)
    assert np.array_equal(apply(phi, f.apply(v)), f.apply(apply(xi, v)))


def test_embedding_exhaustive_gammal_1_4():
    f = standard_vfr(2, 2, 1)
    maps = list(enumerate_gammal(f.big, 1))
    assert len(maps) == 6
    ups = [blowup(f, m) for m in maps]
    assert len(set(ups)) == 6
    for a, ba in zip(maps, ups):
        for b, bb in zip(maps, ups):
            assert blowup(f, compose(a, b)) == compose(ba, bb)


def test_embedding_random_gammal_2_4(rng):
    f = standard_vfr(2, 2, 2)
    for _ in range(200):
        a, b = random_gammal(f.big, 2, rng), random_gammal(f.big, 2, rng)
        assert blowup(f, compose(a, b)) == compose(blowup(f, a), blowup(f, b))
        if a != b:
            assert blowup(f, a) != blowup(f, b)


def test_linear_maps_blow_up_linear(rng):
    f = standard_vfr(2, 2, 1)
    for m in gl_matrices(f.big, 1):
        assert blowup(f, SemilinearMap(f.big, m, 0)).e == 0
    f = standard_vfr(2, 3, 2)
    for _ in range(50):
        xi = random_gammal(f.big, 2, rng)
        assert blowup(f, SemilinearMap(f.big, xi.matrix, 0)).e == 0


def test_semilinear_blowup_over_nonprime_base(rng):
    # F_16 over F_4: the Frobenius x -> x^2 of F_16 restricts to the nontrivial automorphism of F_4
    f = standard_vfr(4, 2, 2)
    for e in range(4):
        xi = SemilinearMap(f.big, np.eye(2, dtype=np.int64), e)
        phi = blowup(f, xi)
        assert phi.e == e % 2
        v = rng.integers(0, 16, size=2)
        assert np.array_equal(apply(phi, f.apply(v)), f.apply(apply(xi, v)))


def test_blowup_batch_matches_single(rng):
    f = standard_vfr(2, 3, 2)
    maps = [random_gammal(f.big, 2, rng) for _ in range(30)]
    bm, be = blowup_batch(f, np.array([m.matrix for m in maps]), np.array([m.e for m in maps]))
    for m, mat, e in zip(maps, bm, be):
        assert blowup(f, m) == SemilinearMap(f.small, mat, e)


@pytest.mark.parametrize("q,t,r", [(2, 2, 2), (3, 2, 2), (2, 3, 2)])
def test_partition_blocks(q, t, r):
    f = standard_vfr(q, t, r)
    blocks = desarguesian_partition(f)
    assert len(blocks) == (q ** (r * t) - 1) // (q**t - 1)
    ps = PointSpace(f.small, f.n)
    seen = np.zeros(ps.count, dtype=int)
    for v, b in blocks:
        assert b.dim == t
        assert b.contains(f.apply(v))
        # representative independence: every nonzero multiple gives the same block
        for a in range(1, f.big.size):
            assert field_reduce_vector(f, f.big.mul(a, v)) == b
        seen[b.point_indices()] += 1
    assert np.all(seen == 1)


def test_transition_conjugates_partitions():
    f4, f2 = field_of_order(4), field_of_order(2)
    f = VfrMap(f4, f2, 2, [1, ALPHA])
    g = VfrMap(f4, f2, 2, [1, 3])
    xi = SemilinearMap(f2, vfr_transition(f, g), 0)
    bf = {b for _, b in desarguesian_partition(f)}
    bg = {b for _, b in desarguesian_partition(g)}
    from fieldred.projgeo import act

    assert {act(xi, b) for b in bf} == bg
    for v in PointSpace(f4, 2).vectors:
        assert np.array_equal(apply(xi, f.apply(v)), g.apply(v))


def test_composite_reduction(rng):
    small, mid, big = field_of_order(2), field_of_order(4), field_of_order(16)
    f1 = VfrMap(big, mid, 1)
    f2 = VfrMap(mid, small, 2)
    f = compose_vfr(f2, f1)
    assert (f.t, f.r, f.n) == (4, 1, 4)
    codes = np.arange(16)[:, None]
    assert np.array_equal(f.apply(codes), f2.apply(f1.apply(codes)))
    assert len({tuple(x) for x in f.apply(codes).tolist()}) == 16
    for _ in range(100):
        v, w = rng.integers(0, 16, size=(2, 1))
        assert np.array_equal(f.apply(big.add(v, w)), small.add(f.apply(v), f.apply(w)))


def test_descriptor_roundtrip():
    f = standard_vfr(4, 3, 2)
    g = parse_vfr(f.descriptor())
    assert g == f
    assert f.descriptor().startswith("64/4:2:")


def test_errors():
    with pytest.raises(FieldError):
        VfrMap(field_of_order(8), field_of_order(4), 2)
    with pytest.raises(FieldError):
        VfrMap(field_of_order(4), field_of_order(2), 1, [1, 1, 2])
    with pytest.raises(FieldError):
        field_reduce_vector(standard_vfr(2, 2, 2), [0, 0])
    with pytest.raises(FieldError):
        compose_vfr(standard_vfr(2, 2, 2), standard_vfr(2, 2, 2))


def test_dependent_basis_rejected():
    with pytest.raises(FieldError):
        VfrMap(field_of_order(4), field_of_order(2), 1, [1, 1])
