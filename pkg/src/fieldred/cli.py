"""Command-line experiment runner: ``fieldred <group> <action> --q ...``.

Exit status: 0 success, 2 precondition failure, 3 budget exhausted or unknown verdict,
4 internal invariant violated.
"""

from __future__ import annotations

import argparse
import logging
import signal
import sys
from contextlib import contextmanager

import numpy as np

from . import __version__, linalg
from .cache import ReportCache, cache_key
from .errors import BudgetExceeded, FieldError, InvariantViolation, UnsupportedSize
from .report import Report

log = logging.getLogger("fieldred")

EXIT_OK, EXIT_PRECONDITION, EXIT_UNKNOWN, EXIT_INVARIANT = 0, 2, 3, 4
DEFAULT_NODES = 10**7
DEFAULT_SECS = 600

COMMANDS = {
    "field": [None],
    "spread": ["build", "check", "stabilizer", "equiv"],
    "singer": ["build", "orbits", "normalize"],
    "subspread": ["build", "check"],
    "linset": ["build", "witnesses", "condition"],
    "embed": ["check"],
}
LINSET_FAMILIES = ("pseudoregulus", "subgeometry", "block", "subspace")
SPREAD_FAMILIES = ("desarguesian", "hall", "pgl-image")
# output plumbing: neither echoed in the report nor part of the cache key
NON_SEMANTIC = ("out", "cache_dir", "verbose", "spread_file_out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fieldred", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fieldred {__version__}")
    sub = parser.add_subparsers(dest="group", required=True)

    def common(p):
        p.add_argument("--q", type=int, help="order of the base field F_q")
        p.add_argument("--t", type=int, help="extension degree of F_{q^t} over F_q")
        p.add_argument("--tprime", type=int, help="degree of the intermediate field (subspreads)")
        p.add_argument("--r", type=int, help="dimension over F_{q^t}")
        p.add_argument("--n", type=int, help="ambient dimension (Singer cycles)")
        p.add_argument("--d", type=int, help="subspace dimension (Singer orbits)")
        p.add_argument("--family", help="object family; see the README for the choices per command")
        p.add_argument("--s", type=int, default=1, help="Frobenius exponent of the pseudoregulus witness")
        p.add_argument("--rows", help="witness basis over F_q for --family subspace, rows separated by ';'")
        p.add_argument("--group-type", choices=("PGL", "PGammaL"), default="PGammaL", dest="group_type")
        p.add_argument("--power", type=int, default=1, help="exponent k for singer normalize (g = sigma^k)")
        p.add_argument("--spread-file", help="read the spread to check from this file")
        p.add_argument("--spread-file-out", help="also write the built spread to this file")
        p.add_argument("--brute-force", action="store_true", help="cross-check against exhaustive filtering")
        p.add_argument("--section", action="store_true", help="also search for a section (embed check)")
        p.add_argument("--budget-nodes", type=int, default=DEFAULT_NODES)
        p.add_argument("--budget-secs", type=int, default=DEFAULT_SECS)
        p.add_argument("--samples", type=int, default=None, help="sample size; omit or 0 for exhaustive")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--count-only", action="store_true")
        p.add_argument("--cache-dir")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("-v", "--verbose", action="store_true")

    for group, actions in COMMANDS.items():
        gp = sub.add_parser(group)
        if actions == [None]:
            common(gp)
            continue
        asub = gp.add_subparsers(dest="action", required=True)
        for a in actions:
            common(asub.add_parser(a))
    return parser


# -- helpers -------------------------------------------------------------------------------

def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise FieldError("missing required flag(s): " + ", ".join("--" + m for m in missing))


def _sampled(args) -> bool:
    return bool(args.samples)


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in NON_SEMANTIC}


@contextmanager
def _time_limit(secs: int):
    if not secs or secs <= 0 or not hasattr(signal, "SIGALRM"):
        yield
        return

    def handler(signum, frame):
        raise BudgetExceeded(f"time limit of {secs} s exceeded")

    old = signal.signal(signal.SIGALRM, handler)
    signal.alarm(secs)
    try:
        yield
    finally:
        signal.alarm(0)
        signal.signal(signal.SIGALRM, old)


def _verdict(v) -> str:
    if v is None:
        return "unknown"
    if isinstance(v, str):
        return v
    return "true" if v else "false"


# -- commands ------------------------------------------------------------------------------

def cmd_field(args, rep: Report) -> int:
    from .gf import field_of_order, prime_power

    _need(args, "q")
    p, h = prime_power(args.q)
    ctx = field_of_order(args.q)
    rep.section("field", {
        "order": ctx.size,
        "characteristic": p,
        "degree": h,
        "modulus": list(ctx.modulus),
        "generator": ctx.format(ctx.generator),
        "descriptor": ctx.descriptor(),
    })
    if args.t:
        from .reduction import standard_vfr

        f = standard_vfr(args.q, args.t, args.r or 1)
        rep.section("extension", {
            "order": f.big.size,
            "modulus": list(f.big.modulus),
            "generator": f.big.format(f.big.generator),
            "basis": [f.big.format(b) for b in f.basis],
            "embedding_of_base_generator": f.big.format(int(f.embedding[ctx.generator])),
            "vfr": f.descriptor(),
        })
    return EXIT_OK


def _spread_by_family(args):
    from .gf import field_of_order
    from .semilinear import random_gl
    from .spreads import Spread, hall_spread, parse_spread, standard_spread

    if args.spread_file:
        with open(args.spread_file, encoding="utf-8") as fh:
            return parse_spread(fh.read())
    fam = args.family or "desarguesian"
    if fam not in SPREAD_FAMILIES:
        raise FieldError(f"unknown spread family {fam!r}; choose from {', '.join(SPREAD_FAMILIES)}")
    if fam == "hall":
        if (args.t or 2, args.r or 2) != (2, 2):
            raise FieldError("the Hall spread is a line spread of PG(3, q)")
        return hall_spread(args.q)
    _need(args, "q", "t", "r")
    d = standard_spread(args.q, args.t, args.r)
    if fam == "desarguesian":
        return d
    ctx = field_of_order(args.q)
    g = random_gl(ctx, d.n, np.random.default_rng(args.seed))
    from .projgeo import act
    from .semilinear import SemilinearMap

    m = SemilinearMap(ctx, g, 0)
    return Spread(ctx, d.n, [act(m, e) for e in d.elements], d.params)


def cmd_spread_build(args, rep: Report) -> int:
    from .spreads import is_normal, is_spread, standard_spread

    _need(args, "q", "t", "r")
    s = standard_spread(args.q, args.t, args.r)
    expected = (args.q ** (args.r * args.t) - 1) // (args.q**args.t - 1)
    rep.section("summary", {
        "elements": len(s),
        "expected_elements": expected,
        "element_dimension": s.t,
        "ambient_dimension": s.n,
        "is_spread": is_spread(s),
        "is_normal": is_normal(s),
    })
    text = s.serialize()
    rep.section("spread", lines=text.splitlines())
    if args.spread_file_out:
        with open(args.spread_file_out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_OK if len(s) == expected else EXIT_INVARIANT


def cmd_spread_check(args, rep: Report) -> int:
    from .spreads import desarguesian_map, is_normal, is_spread

    s = _spread_by_family(args)
    ok = is_spread(s)
    res = desarguesian_map(s, args.budget_nodes) if ok else None
    verdict = res.verdict if res else False
    rep.section("check", {
        "family": args.family or ("file" if args.spread_file else "desarguesian"),
        "elements": len(s),
        "is_spread": ok,
        "is_normal": is_normal(s) if ok else False,
        "is_desarguesian": _verdict(verdict),
        "search_nodes": res.nodes if res else 0,
    })
    if res is not None and res.matrix is not None:
        rep.section("map_from_standard", {"matrix": linalg.format_matrix(s.ctx, res.matrix)})
    return EXIT_UNKNOWN if verdict == "unknown" else EXIT_OK


def cmd_spread_stabilizer(args, rep: Report) -> int:
    from .reduction import standard_vfr
    from .spreads import ambient_stabiliser, elementwise_stabiliser, setwise_stabiliser, spread_orbit_keys

    _need(args, "q", "t", "r")
    f = standard_vfr(args.q, args.t, args.r)
    st = setwise_stabiliser(f, args.group_type)
    el = elementwise_stabiliser(f)
    rep.section("setwise", {
        "group": args.group_type,
        "order": st.group_order,
        "closed_form_order": st.closed_form_order,
        "agree": st.group_order == st.closed_form_order,
        "enumerated": st.extra["enumerated"],
    })
    rep.section("elementwise", {
        "order": el.group_order,
        "closed_form_order": el.closed_form_order,
        "sharply_transitive": el.extra["sharply_transitive"],
        "generator": el.generators[0].rep.serialize(),
    })
    ok = st.group_order == st.closed_form_order and el.group_order == el.closed_form_order
    if args.brute_force:
        if args.group_type != "PGL" or f.small.k != 1:
            raise FieldError("brute-force cross-check needs --group-type PGL over a prime field")
        from .spreads import build_desarguesian

        d = build_desarguesian(f)
        amb = ambient_stabiliser(d)
        orbit = spread_orbit_keys(d)
        from .semilinear import gl_order

        total = gl_order(f.n, f.q) // (f.q - 1)
        rep.section("brute_force", {
            "ambient_group_order": total,
            "stabiliser_order": len(amb),
            "same_group": amb == st.extra["keys"],
            "orbit_size": len(orbit),
            "orbit_stabiliser": total == len(orbit) * len(amb),
        })
        ok = ok and amb == st.extra["keys"] and total == len(orbit) * len(amb)
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_spread_equiv(args, rep: Report) -> int:
    from .spreads import UNKNOWN, spread_equivalence_map, standard_spread

    _need(args, "q")
    t, r = args.t or 2, args.r or 2
    d = standard_spread(args.q, t, r)
    args_t = argparse.Namespace(**{**vars(args), "t": t, "r": r})
    other = _spread_by_family(args_t)
    m = spread_equivalence_map(d, other, args.budget_nodes)
    rep.section("equivalence", {
        "first": "desarguesian",
        "second": args.family or ("file" if args.spread_file else "desarguesian"),
        "equivalent": _verdict(None if m is UNKNOWN else m is not None),
        "map": m.rep.serialize() if m not in (None, UNKNOWN) else "none",
    })
    return EXIT_UNKNOWN if m is UNKNOWN else EXIT_OK


def cmd_singer_build(args, rep: Report) -> int:
    from .singer import build_singer, cycle_lengths

    _need(args, "q", "n")
    c = build_singer(args.q, args.n, args.d)
    rep.section("singer", {
        "q": c.q,
        "n": c.n,
        "tower_degree": c.d,
        "omega": c.tower.big.format(c.omega),
        "points": c.order,
        "point_cycle_lengths": cycle_lengths(c.perm),
        "matrix": linalg.format_matrix(c.ctx, c.matrix),
    })
    return EXIT_OK


def cmd_singer_orbits(args, rep: Report) -> int:
    from .singer import build_singer, factor_group_check, orbit_spread, spread_orbits
    from .spreads import is_desarguesian

    _need(args, "q", "n", "d")
    c = build_singer(args.q, args.n)
    if args.n % args.d:
        rep.section("orbits", {"dimension": args.d, "divides_n": False, "spread_orbits": 0, "orbit_list": []})
        return EXIT_OK
    found = spread_orbits(c, args.d)
    rep.section("orbits", {"dimension": args.d, "divides_n": True, "spread_orbits": len(found)})
    status = EXIT_OK
    for i, o in enumerate(found):
        dz = is_desarguesian(orbit_spread(o, c), args.budget_nodes)
        if dz == "unknown":
            status = EXIT_UNKNOWN
        rep.section(f"orbit {i}", {
            "seed": o.seed.serialize(),
            "orbit_length": len(o.orbit),
            "is_spread": o.is_spread,
            "stabiliser_exponent": o.stabiliser_exponent,
            "stabiliser_order": c.order // o.stabiliser_exponent,
            "is_desarguesian": _verdict(dz),
        })
    if found:
        fg = factor_group_check(c, args.d)
        rep.section("factor_group", fg)
        if not fg["ok"]:
            status = EXIT_INVARIANT
    return status


def cmd_singer_normalize(args, rep: Report) -> int:
    from .singer import build_singer, singer_normalize

    _need(args, "q", "n")
    c = build_singer(args.q, args.n)
    g = np.eye(c.n, dtype=np.int64)
    for _ in range(args.power % c.order):
        g = linalg.matmul(c.ctx, c.matrix, g)
    res = singer_normalize(g, args.q, args.n)
    rep.section("normalize", {
        "power": args.power,
        "is_singer": res is not None,
        "conjugator": linalg.format_matrix(c.ctx, res[0]) if res else "none",
        "omega": c.tower.big.format(res[1]) if res else "none",
    })
    return EXIT_OK


def cmd_subspread_build(args, rep: Report) -> int:
    from .subspreads import is_subspread, standard_pair

    _need(args, "q", "t", "tprime", "r")
    pair = standard_pair(args.q, args.t, args.tprime, args.r)
    rep.section("subspread", {
        "outer_elements": len(pair.outer),
        "inner_elements": len(pair.inner),
        "inner_per_outer": len(pair.inner) // len(pair.outer),
        "is_subspread": is_subspread(pair.outer, pair.inner),
        "vfr": pair.f.descriptor(),
    })
    return EXIT_OK


def cmd_subspread_check(args, rep: Report) -> int:
    from .subspreads import standard_pair, uniqueness_consequence_check

    _need(args, "q", "t", "tprime", "r")
    pair = standard_pair(args.q, args.t, args.tprime, args.r)
    res = uniqueness_consequence_check(pair, args.samples or None, args.seed)
    rep.section("preservation", {"mode": "sampled" if args.samples else "exhaustive", **res})
    return EXIT_OK if res["ok"] else EXIT_INVARIANT


def _witness(args):
    from .linsets import block_witness, pseudoregulus_witness, subgeometry_witness
    from .projgeo import subspace_from_text
    from .reduction import standard_vfr

    _need(args, "q", "t", "r")
    fam = args.family or "pseudoregulus"
    if fam not in LINSET_FAMILIES:
        raise FieldError(f"unknown linear-set family {fam!r}; choose from {', '.join(LINSET_FAMILIES)}")
    f = standard_vfr(args.q, args.t, args.r)
    if fam == "pseudoregulus":
        U = pseudoregulus_witness(f, args.s)
    elif fam == "subgeometry":
        U = subgeometry_witness(f)
    elif fam == "block":
        v = np.zeros(f.r, dtype=np.int64)
        v[0] = 1
        U = block_witness(f, v)
    else:
        _need(args, "rows")
        U = subspace_from_text(f.small, args.rows, f.n)
    return f, U


def cmd_linset_build(args, rep: Report) -> int:
    from .linsets import linset_from_subspace

    f, U = _witness(args)
    L = linset_from_subspace(f, U)
    rep.section("linear_set", {
        "family": args.family or "pseudoregulus",
        "witness": U.serialize(),
        "witness_dimension": U.dim,
        "points": L.size,
        "spectrum": L.spectrum(),
    })
    rep.section("points", lines=[f"{p}: weight {L.weights[p]}" for p in L.points.tolist()])
    return EXIT_OK


def cmd_linset_witnesses(args, rep: Report) -> int:
    from .linsets import enumerate_witnesses, linset_from_subspace

    f, U = _witness(args)
    L = linset_from_subspace(f, U)
    res = enumerate_witnesses(f, L, U.dim, count_only=args.count_only, workers=args.workers,
                              node_budget=args.budget_nodes)
    rep.section("witnesses", {
        "dimension": U.dim,
        "count": res.count if res.exhausted else "unknown",
        "lower_bound": res.count,
        "exhausted": res.exhausted,
    })
    if res.witnesses is not None and res.exhausted:
        rep.section("witness_list", lines=[w.serialize() for w in res.witnesses])
    return EXIT_OK if res.exhausted else EXIT_UNKNOWN


def cmd_linset_condition(args, rep: Report) -> int:
    from .linsets import analyse

    f, U = _witness(args)
    c = analyse(f, U, count_only=args.count_only, workers=args.workers, node_budget=args.budget_nodes)
    rep.section("condition", {
        "family": args.family or "pseudoregulus",
        "points": c.extra["points"],
        "spectrum": c.extra["spectrum"],
        "X": "unknown" if c.X is None else c.X,
        "stab_linset_order": c.stab_linset_order,
        "stab_D_pi_order": c.stab_D_pi_order,
        "formula_X": c.formula_X,
        "theta": c.theta,
        "verdict_A": _verdict(c.verdict_A),
        "verdict_A_orbit": _verdict(c.verdict_A_orbit),
        "verdict_B": _verdict(c.verdict_B),
        "verdict_B_orbit": _verdict(c.verdict_B_orbit),
        "stab_method": c.extra["stab_method"],
        "witness_search_exhausted": c.extra["exhausted"],
        "search_nodes": c.extra["nodes"],
        **({} if c.X is not None else {"X_lower_bound": c.extra["lower_bound_X"]}),
    })
    if c.per_point_counts:
        rep.section("per_point_counts", {str(k): v for k, v in c.per_point_counts.items()})
    decided = c.X is not None or (c.verdict_A is not None and c.verdict_B is not None)
    return EXIT_OK if decided else EXIT_UNKNOWN


def cmd_embed_check(args, rep: Report) -> int:
    from .embed import check_embedding, section_search
    from .spreads import UNKNOWN

    _need(args, "q", "t", "r")
    mode = "sampled" if args.samples else "exhaustive"
    e = check_embedding(args.q, args.t, args.r, mode, args.samples or 0, args.seed)
    rep.section("embedding", {
        "mode": mode,
        "gcd": e.gcd_value,
        "applicable": e.applicable,
        "kernel_scalars": e.kernel_scalars,
        "domain_order": e.domain_order,
        "image_order": e.image_order,
        "injective": e.injective,
        "homomorphic": e.homomorphic,
        "image_stabilises_D": e.image_stabilises_D,
        "pairs_checked": e.pairs_checked,
    })
    status = EXIT_OK
    if args.section:
        found, nodes = section_search(args.q, args.t, args.r, args.budget_nodes)
        rep.section("section_search", {
            "found": _verdict(None if found is UNKNOWN else found is not None),
            "nodes": nodes,
        })
        if found is UNKNOWN:
            status = EXIT_UNKNOWN
    if e.applicable and not (e.injective and e.homomorphic and e.image_stabilises_D):
        status = EXIT_INVARIANT
    return status


HANDLERS = {
    ("field", None): cmd_field,
    ("spread", "build"): cmd_spread_build,
    ("spread", "check"): cmd_spread_check,
    ("spread", "stabilizer"): cmd_spread_stabilizer,
    ("spread", "equiv"): cmd_spread_equiv,
    ("singer", "build"): cmd_singer_build,
    ("singer", "orbits"): cmd_singer_orbits,
    ("singer", "normalize"): cmd_singer_normalize,
    ("subspread", "build"): cmd_subspread_build,
    ("subspread", "check"): cmd_subspread_check,
    ("linset", "build"): cmd_linset_build,
    ("linset", "witnesses"): cmd_linset_witnesses,
    ("linset", "condition"): cmd_linset_condition,
    ("embed", "check"): cmd_embed_check,
}


def run(args) -> tuple[str, int]:
    """Execute one command; returns (report text, exit status)."""
    action = getattr(args, "action", None)
    command = args.group + (f" {action}" if action else "")
    rep = Report()
    rep.section("config", {"command": command, "version": __version__, **_config(args)})
    handler = HANDLERS[(args.group, action)]
    try:
        with _time_limit(args.budget_secs):
            status = handler(args, rep)
    except BudgetExceeded as exc:
        rep.section("error", {"kind": "budget", "message": str(exc)})
        status = EXIT_UNKNOWN
    except InvariantViolation as exc:
        rep.section("error", {"kind": "invariant", "message": str(exc)})
        status = EXIT_INVARIANT
    except (FieldError, UnsupportedSize, OSError) as exc:
        rep.section("error", {"kind": "precondition", "message": str(exc)})
        status = EXIT_PRECONDITION
    rep.section("status", {"exit_code": status})
    return rep.render(), status


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    action = getattr(args, "action", None)
    command = args.group + (f" {action}" if action else "")
    cache = ReportCache(args.cache_dir) if args.cache_dir and not _sampled(args) else None
    key = cache_key(command, _config(args), __version__) if cache else None
    hit = cache.get(key) if cache else None
    if hit is not None:
        log.info("cache hit %s", key[:12])
        text, status = hit["text"], hit["status"]
    else:
        text, status = run(args)
        # only complete, successful runs are worth replaying
        if cache and status == EXIT_OK:
            cache.put(key, command, _config(args), __version__, {"text": text, "status": status})
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
