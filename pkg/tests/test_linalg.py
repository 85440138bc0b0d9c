import itertools

import numpy as np
import pytest

from fieldred import linalg
from fieldred.gf import FieldError, field_of_order


def naive_det(ctx, m):
    """Leibniz expansion; an oracle independent of elimination."""
    n = len(m)
    total = 0
    for perm in itertools.permutations(range(n)):
        term = 1
        for i, j in enumerate(perm):
            term = ctx.mul(term, int(m[i][j]))
        inv = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        if inv % 2:
            term = ctx.neg(term)
        total = ctx.add(total, term)
    return int(total)


@pytest.mark.parametrize("q", [2, 3, 4, 8, 9])
def test_det_and_inverse(q, rng):
    ctx = field_of_order(q)
    for _ in range(60):
        n = int(rng.integers(1, 5))
        m = rng.integers(0, ctx.size, size=(n, n))
        d = linalg.det(ctx, m)
        assert d == naive_det(ctx, m)
        assert (linalg.rank(ctx, m) == n) == (d != 0)
        if d:
            inv = linalg.inverse(ctx, m)
            assert np.array_equal(linalg.matmul(ctx, m, inv), np.eye(n, dtype=np.int64))


@pytest.mark.parametrize("q", [2, 3, 4])
def test_rref_nullspace(q, rng):
    ctx = field_of_order(q)
    for _ in range(40):
        m = rng.integers(0, ctx.size, size=(3, 5))
        rows, piv = linalg.rref(ctx, m)
        assert len(rows) == linalg.rank(ctx, m) == len(piv)
        for i, p in enumerate(piv):
            assert rows[i, p] == 1 and np.count_nonzero(rows[:, p]) == 1
        ns = linalg.nullspace(ctx, m)
        assert len(ns) == 5 - len(piv)
        if len(ns):
            assert not linalg.matmul(ctx, m, ns.T).any()


def test_matrix_text_roundtrip():
    ctx = field_of_order(4)
    m = np.array([[0, 1, 2], [3, 2, 1]])
    text = linalg.format_matrix(ctx, m)
    assert text == "0,0,1,0,0,1;1,1,0,1,1,0"
    assert np.array_equal(linalg.parse_matrix(ctx, text), m)
    with pytest.raises(FieldError):
        linalg.parse_matrix(ctx, "1,0,1")
    with pytest.raises(FieldError):
        linalg.parse_matrix(ctx, "1,0;1,0,1,1")


def test_singular_inverse_raises():
    ctx = field_of_order(3)
    with pytest.raises(FieldError):
        linalg.inverse(ctx, [[1, 2], [2, 1]])
