import numpy as np
import pytest

from fieldred import kernels, linalg
from fieldred.gf import field_of_order
from fieldred.linsets import enumerate_witnesses, linset_from_subspace, pseudoregulus_witness
from fieldred.projgeo import PointSpace
from fieldred.reduction import standard_vfr
from fieldred.semilinear import gl_matrices


@pytest.mark.parametrize("q,n", [(2, 4), (3, 3), (4, 3), (9, 2), (8, 2)])
def test_point_images_parity(q, n, rng, backend):
    ctx = field_of_order(q)
    ps = PointSpace(ctx, n)
    mats = rng.integers(0, q, size=(300, n, n))
    got = kernels.point_images(ctx, mats, ps.vectors, ps.weights, ps.point_of)
    # oracle: explicit matrix-vector products
    for b in range(0, 300, 37):
        for j in range(ps.count):
            v = linalg.matvec(ctx, mats[b], ps.vectors[j])
            want = ps.point_of[v @ ps.weights] if v.any() else -1
            if want >= 0:
                assert got[b, j] == want


@pytest.mark.parametrize("q,n", [(2, 3), (3, 3), (4, 3), (5, 4), (8, 4)])
def test_batch_det_parity(q, n, rng, backend):
    ctx = field_of_order(q)
    mats = rng.integers(0, q, size=(200, n, n))
    got = kernels.batch_det(ctx, mats)
    assert got.tolist() == [linalg.det(ctx, m) for m in mats]


def test_gl_enumeration_same_on_both_paths():
    ctx = field_of_order(2)
    old = kernels.USE_NUMBA
    try:
        kernels.use_numba(True)
        a = gl_matrices(ctx, 3)
        kernels.use_numba(False)
        b = gl_matrices(ctx, 3)
    finally:
        kernels.use_numba(old)
    assert np.array_equal(a, b)


def test_witness_dfs_parity(backend):
    f = standard_vfr(2, 3, 2)
    U = pseudoregulus_witness(f)
    L = linset_from_subspace(f, U)
    res = enumerate_witnesses(f, L, 3)
    assert res.count == 14 and res.exhausted
    assert U in res.witnesses


def test_witness_dfs_budget(backend):
    f = standard_vfr(2, 3, 2)
    L = linset_from_subspace(f, pseudoregulus_witness(f))
    res = enumerate_witnesses(f, L, 3, count_only=True, node_budget=10)
    assert not res.exhausted and res.nodes <= 11
