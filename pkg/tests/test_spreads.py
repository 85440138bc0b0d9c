import numpy as np
import pytest

from fieldred.gf import FieldError, field_of_order
from fieldred.projgeo import Subspace, act, enumerate_subspaces
from fieldred.reduction import blowup, blowup_batch, standard_vfr
from fieldred.semilinear import SemilinearMap, compose, gl_order, inverse, random_gammal, random_gl
from fieldred.spreads import (
    UNKNOWN,
    Spread,
    ambient_stabiliser,
    build_desarguesian,
    degamma,
    elementwise_stabiliser,
    gammal_arrays,
    hall_spread,
    is_desarguesian,
    is_normal,
    is_spread,
    parse_spread,
    setwise_stabiliser,
    spread_equivalence_map,
    stabilises,
    standard_spread,
)

PARAMS = [(2, 2, 2), (3, 2, 2), (2, 3, 2), (2, 2, 3)]


def image(m, s):
    return Spread(s.ctx, s.n, [act(m, e) for e in s.elements], s.params)


@pytest.mark.parametrize("q,t,r", PARAMS)
def test_desarguesian_spread(q, t, r):
    s = standard_spread(q, t, r)
    assert len(s) == (q ** (r * t) - 1) // (q**t - 1)
    assert all(e.dim == t for e in s)
    assert is_spread(s) and is_normal(s)
    assert is_desarguesian(s) is True


def test_spread_file_roundtrip(tmp_path):
    s = standard_spread(2, 2, 2)
    text = s.serialize()
    assert text.splitlines()[0] == "2 2 2"
    assert len(text.splitlines()) == 6
    assert parse_spread(text) == s


def test_replacing_a_line_breaks_the_spread():
    s = standard_spread(2, 2, 2)
    a, b = s.elements[0], s.elements[1]
    # a line through one point of a and one point of b meets both
    pa, pb = a.vectors()[1], b.vectors()[1]
    bad = Subspace.from_rows(s.ctx, [pa, pb])
    assert not is_spread(s.elements[1:] + [bad])


def test_hall_spread():
    h = hall_spread(3)
    d = standard_spread(3, 2, 2)
    assert is_spread(h) and h != d
    # a regulus has q + 1 lines
    assert len(set(h.elements) & set(d.elements)) == 10 - 4
    # normality is vacuous for line spreads of PG(3, q)
    assert is_normal(h)
    assert is_desarguesian(h) is False
    assert spread_equivalence_map(d, h) is None


@pytest.mark.parametrize("q,t,r", PARAMS)
def test_random_pgl_image_is_desarguesian(q, t, r, rng):
    d = standard_spread(q, t, r)
    for _ in range(3):
        g = SemilinearMap(d.ctx, random_gl(d.ctx, d.n, rng), 0)
        s = image(g, d)
        assert is_desarguesian(s) is True
        m = spread_equivalence_map(d, s)
        assert m not in (None, UNKNOWN)
        assert image(m.rep, d) == s


def test_equivalence_identity():
    d = standard_spread(2, 3, 2)
    m = spread_equivalence_map(d, d)
    assert image(m.rep, d) == d


def test_search_budget_reports_unknown(rng):
    d = standard_spread(2, 2, 3)
    g = SemilinearMap(d.ctx, random_gl(d.ctx, d.n, rng), 0)
    assert is_desarguesian(image(g, d), budget=3) == UNKNOWN


def test_every_blowup_stabilises_exhaustive():
    f = standard_vfr(2, 2, 2)
    mats, exps = gammal_arrays(f.big, 2)
    bm, be = blowup_batch(f, mats, exps)
    assert stabilises(build_desarguesian(f), bm, be).all()


def test_every_blowup_stabilises_sampled(rng):
    f = standard_vfr(2, 3, 2)
    maps = [random_gammal(f.big, 2, rng) for _ in range(1000)]
    bm, be = blowup_batch(f, np.array([m.matrix for m in maps]), np.array([m.e for m in maps]))
    assert stabilises(build_desarguesian(f), bm, be).all()


def test_gl42_stabiliser_is_blown_up_group():
    f = standard_vfr(2, 2, 2)
    st = setwise_stabiliser(f, "PGL")
    assert st.group_order == st.closed_form_order == 360
    assert ambient_stabiliser(build_desarguesian(f)) == st.extra["keys"]


@pytest.mark.parametrize(
    "q,t,r,group,order",
    [(2, 2, 2, "PGammaL", 360), (2, 3, 2, "PGammaL", 10584), (2, 3, 2, "PGL", 3528 * 3), (3, 2, 2, "PGL", 5760 // 2 * 2)],
)
def test_setwise_closed_forms(q, t, r, group, order):
    # over a prime field the blown-up Frobenius is linear, so PGL already contains it
    st = setwise_stabiliser(standard_vfr(q, t, r), group)
    assert st.group_order == st.closed_form_order == order


def test_setwise_closed_form_nonprime_base():
    f = standard_vfr(4, 2, 2)
    st = setwise_stabiliser(f, "PGammaL")
    assert st.group_order == st.closed_form_order == gl_order(2, 16) // 3 * 4
    st = setwise_stabiliser(f, "PGL")
    assert st.group_order == gl_order(2, 16) // 3 * 2


@pytest.mark.parametrize("q,t,r", [(2, 2, 2), (2, 3, 2), (3, 2, 2), (4, 2, 2)])
def test_elementwise_stabiliser(q, t, r):
    st = elementwise_stabiliser(standard_vfr(q, t, r))
    assert st.group_order == st.closed_form_order == (q**t - 1) // (q - 1)
    assert st.extra["sharply_transitive"]
    assert st.extra["element_points"] == st.group_order


def test_degamma_over_f4(rng):
    f = standard_vfr(4, 2, 2)
    d = build_desarguesian(f)
    for _ in range(3):
        g = SemilinearMap(f.small, random_gl(f.small, 4, rng), 1)
        s = image(inverse(g), d)
        assert image(g, s) == d
        lin = degamma(f, g, s)
        assert lin.e == 0 and image(lin, s) == d
    # already linear maps come back unchanged
    g = SemilinearMap(f.small, random_gl(f.small, 4, rng), 0)
    s = image(inverse(g), d)
    assert degamma(f, g, s) == g


def test_degamma_rejects_wrong_map(rng):
    f = standard_vfr(3, 2, 2)
    d = build_desarguesian(f)
    with pytest.raises(FieldError):
        degamma(f, SemilinearMap(f.small, np.eye(4, dtype=np.int64), 0), hall_spread(3))
    assert degamma(f, SemilinearMap(f.small, np.eye(4, dtype=np.int64), 0), d).e == 0


def test_blowup_of_frobenius_is_linear_over_prime_field():
    f = standard_vfr(2, 3, 2)
    phi = blowup(f, SemilinearMap(f.big, np.eye(2, dtype=np.int64), 1))
    assert phi.e == 0
    assert compose(phi, phi).e == 0


def test_non_spread_inputs():
    ctx = field_of_order(2)
    lines = list(enumerate_subspaces(4, 2, ctx))[:5]
    assert not is_spread(lines)
    assert not is_spread([])
    with pytest.raises(FieldError):
        is_desarguesian(Spread(ctx, 4, lines))
