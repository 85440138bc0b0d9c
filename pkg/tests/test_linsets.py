from fractions import Fraction

import numpy as np
import pytest

from fieldred.linsets import (
    analyse,
    block_witness,
    brute_force_witnesses,
    enumerate_witnesses,
    linset_from_subspace,
    per_point_identity,
    pseudoregulus_witness,
    rep_theorem_check,
    stab_D_pi,
    subgeometry_witness,
)
from fieldred.projgeo import PointSpace, Subspace, enumerate_subspaces
from fieldred.reduction import blowup_batch, field_reduce_subspace, standard_vfr
from fieldred.semilinear import random_gammal
from fieldred.spreads import build_desarguesian, gammal_arrays, stabilises


def random_subspace(ctx, n, d, rng):
    while True:
        U = Subspace.from_rows(ctx, rng.integers(0, ctx.size, (d, n)), n)
        if U.dim == d:
            return U


@pytest.fixture(scope="module")
def t3_report():
    f = standard_vfr(2, 3, 2)
    U = pseudoregulus_witness(f)
    return f, U, analyse(f, U)


def test_weight_identity(rng):
    for q, t, r in [(2, 2, 2), (2, 3, 2), (3, 2, 2), (2, 2, 3)]:
        f = standard_vfr(q, t, r)
        for d in range(1, f.n + 1):
            U = random_subspace(f.small, f.n, d, rng)
            L = linset_from_subspace(f, U)
            assert sum(q**w - 1 for w in L.weights.values()) == q**d - 1
            assert all(1 <= w <= t for w in L.weights.values())


def test_block_and_subspace_examples():
    f = standard_vfr(2, 2, 3)
    L = linset_from_subspace(f, block_witness(f, [0, 1, 0]))
    assert L.size == 1 and list(L.weights.values()) == [2]
    W = field_reduce_subspace(f, [[1, 0, 0], [0, 1, 0]])
    L = linset_from_subspace(f, W)
    assert L.size == 5 and set(L.weights.values()) == {2}
    assert linset_from_subspace(f, Subspace.from_rows(f.small, np.zeros((0, 6), dtype=np.int64), 6)).size == 0


@pytest.mark.parametrize("q,t,size", [(2, 3, 7), (2, 5, 31), (3, 3, 13)])
def test_pseudoregulus_is_scattered(q, t, size):
    f = standard_vfr(q, t, 2)
    U = pseudoregulus_witness(f)
    L = linset_from_subspace(f, U)
    assert U.dim == t and L.size == size and set(L.weights.values()) == {1}


def test_transport_lemma(rng):
    f = standard_vfr(2, 3, 2)
    bps = PointSpace(f.big, 2)
    for _ in range(1000):
        xi = random_gammal(f.big, 2, rng)
        U = random_subspace(f.small, f.n, int(rng.integers(1, 7)), rng)
        bm, be = blowup_batch(f, xi.matrix[None], np.array([xi.e]))
        # over F_2 the blown-up map is linear
        assert be[0] == 0
        img = Subspace.from_rows(f.small, (bm[0] @ U.matrix.T % 2).T, 6)
        lhs = set(linset_from_subspace(f, img).points.tolist())
        perm = bps.images(xi.matrix[None], np.array([xi.e]))[0]
        rhs = set(perm[linset_from_subspace(f, U).points].tolist())
        assert lhs == rhs


def test_collineation_from_spread_stabiliser():
    # maps of PG(5, 2) fixing D permute its elements; that permutation must preserve lines of PG(2, 4)
    f = standard_vfr(2, 2, 3)
    d = build_desarguesian(f)
    bps = PointSpace(f.big, 3)
    elem_to_point = np.array([bps.index(f.inverse(e.vectors()[1:2]))[0] for e in d.elements])
    lines = {tuple(sorted(bps.index(l.vectors()[1:]).tolist())) for l in enumerate_subspaces(3, 2, f.big)}
    lines = {tuple(sorted(set(l))) for l in lines}
    mats, exps = gammal_arrays(f.big, 3)
    bm, _ = blowup_batch(f, mats, exps)
    elem_of = d.element_of_point()
    first_pt = np.array([e.point_indices()[0] for e in d.elements])
    line_arr = np.array(sorted(lines))
    checked = 0
    for s in range(0, len(bm), 8192):
        chunk = bm[s:s + 8192]
        assert stabilises(d, chunk).all()
        imgs = d.points.images(chunk)
        perm_elems = elem_of[imgs[:, first_pt]]  # batch x elements
        perm_pts = np.empty_like(perm_elems)
        perm_pts[:, elem_to_point] = elem_to_point[perm_elems]
        img_lines = np.sort(perm_pts[:, line_arr], axis=2)
        for row in img_lines:
            assert set(map(tuple, row.tolist())) == lines
        checked += len(chunk)
    assert checked == len(mats)


def test_t3_pseudoregulus(t3_report):
    f, U, rep = t3_report
    assert rep.X == 14
    assert rep.stab_linset_order == 42 and rep.stab_D_pi_order == 21
    assert rep.formula_X == Fraction(14)
    assert rep.verdict_A and rep.verdict_A_orbit
    assert rep.verdict_B is False and rep.verdict_B_orbit is False
    assert rep.extra["enumerated_linset_group"] == 1512 and rep.extra["enumerated_D_group"] == 10584


def test_t3_two_planes_through_each_point(t3_report):
    f, U, rep = t3_report
    assert set(rep.per_point_counts.values()) == {2}
    ident = per_point_identity(f, U, rep)
    assert ident["agree"] and ident["direct"] == 14


def test_t3_rep_theorem_vacuous(t3_report):
    f, U, rep = t3_report
    res = rep_theorem_check(f, U, rep)
    assert res["vacuous"] and res["holds"] and res["witnesses_through"] == 2


def test_reduced_stabiliser_matches_full(t3_report):
    f, U, rep = t3_report
    assert stab_D_pi(f, U, "reduced")["order"] == stab_D_pi(f, U, "full")["order"] == 21


def test_blocking_set_example():
    f = standard_vfr(2, 2, 3)
    U = subgeometry_witness(f)
    rep = analyse(f, U)
    assert linset_from_subspace(f, U).size == 7
    assert rep.X == 3 and rep.verdict_B and rep.verdict_B_orbit and rep.verdict_A
    assert rep_theorem_check(f, U, rep)["holds"]
    assert per_point_identity(f, U, rep)["agree"]


def test_q3_pseudoregulus():
    f = standard_vfr(3, 3, 2)
    U = pseudoregulus_witness(f)
    rep = analyse(f, U)
    assert len(brute_force_witnesses(f, linset_from_subspace(f, U), 3)) == rep.X == 26
    assert rep.stab_linset_order == 78 and rep.stab_D_pi_order == 39 and rep.formula_X == 26
    assert rep.verdict_A and not rep.verdict_B
    assert set(rep.per_point_counts.values()) == {2}


def test_projective_subspace_satisfies_a():
    f = standard_vfr(2, 2, 3)
    U = field_reduce_subspace(f, [[1, 0, 0], [0, 1, 0]])
    rep = analyse(f, U)
    assert rep.verdict_A and rep.verdict_A_orbit


def test_random_witness_self_membership(rng):
    f = standard_vfr(2, 2, 2)
    for _ in range(10):
        U = random_subspace(f.small, 4, 2, rng)
        wit = enumerate_witnesses(f, linset_from_subspace(f, U), 2)
        assert U in wit.witnesses


def test_single_point_verdicts_diverge():
    f = standard_vfr(2, 2, 2)
    U = block_witness(f, [1, 0])
    rep = analyse(f, U)
    assert rep.X == 1 and rep.theta == 3
    assert rep.verdict_B is False and rep.verdict_B_orbit is True
    assert rep.verdict_A and rep_theorem_check(f, U, rep)["holds"]


@pytest.mark.parametrize("q,t,r,d", [(2, 2, 2, 2), (2, 2, 2, 3), (2, 3, 2, 2), (2, 3, 2, 3), (3, 2, 2, 2)])
def test_dfs_matches_brute_force(q, t, r, d, rng):
    f = standard_vfr(q, t, r)
    for _ in range(3):
        U = random_subspace(f.small, f.n, d, rng)
        L = linset_from_subspace(f, U)
        assert enumerate_witnesses(f, L, d).witnesses == sorted(brute_force_witnesses(f, L, d))


def test_budgeted_condition_is_partial():
    f = standard_vfr(2, 3, 2)
    rep = analyse(f, pseudoregulus_witness(f), node_budget=50)
    assert rep.X is None and rep.verdict_A is None and not rep.extra["exhausted"]
    assert rep.extra["lower_bound_X"] < rep.formula_X


def test_t4_pseudoregulus_satisfies_a():
    f = standard_vfr(2, 4, 2)
    rep = analyse(f, pseudoregulus_witness(f), count_only=True)
    assert rep.X == rep.formula_X == 30 and rep.verdict_A and not rep.verdict_B


def test_partial_count_refutes_condition_a_at_t5():
    # the default CLI node budget stops the t=5 search early, but its partial count already exceeds the formula
    f = standard_vfr(2, 5, 2)
    rep = analyse(f, pseudoregulus_witness(f), count_only=True, node_budget=10**7)
    assert rep.X is None and not rep.extra["exhausted"]
    assert rep.extra["lower_bound_X"] > rep.formula_X == 62
    assert rep.verdict_A is False and rep.verdict_B is False and rep.verdict_A_orbit is None


def test_b_implies_a_on_instances(t3_report, rng):
    reports = [t3_report[2]]
    for q, t, r, d in [(2, 2, 2, 2), (2, 2, 2, 3), (2, 3, 2, 2), (3, 2, 2, 2)]:
        f = standard_vfr(q, t, r)
        for _ in range(3):
            reports.append(analyse(f, random_subspace(f.small, f.n, d, rng)))
    for rep in reports:
        for b in (rep.verdict_B, rep.verdict_B_orbit):
            assert not (b and not rep.verdict_A)
        if rep.stab_linset_order == rep.stab_D_pi_order:
            assert rep.verdict_A == rep.verdict_B_orbit
