import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modalwb.formula import TOP, And, Box, Dia, Not, Var, corpus, corpus_conjuncts, parse
from modalwb.omega.expr import (ExprError, and_, atom, eval_expr, not_, or_, region_to_expr,
                                to_region, validate)
from modalwb.omega.region import (FIRST_FAMILIES, OMEGA, ROOT, SECOND_FAMILIES, Family, Point,
                                  Region, preimage, region_combine, region_empty,
                                  successors_upto, witness_point)
from modalwb.omega.symbolic import (BUILTIN_FORMULA, BUILTIN_NAMES, SymbolicEvaluator,
                                    SymbolicModel, builtin_witness, eval_symbolic)
from modalwb.omega.truncation import crosscheck, truncation_eval, window_points

DESC = Family("omega1_desc", "onestep")
FAMILIES = [Family(a, b) for a in FIRST_FAMILIES for b in SECOND_FAMILIES]


def R(expr, fam=DESC):
    return to_region(expr, fam)


# -- random region expressions --------------------------------------------------------

leaf = st.one_of(
    st.sampled_from([atom("m_eq_omega"), atom("m_even"), atom("k_root"), atom("k_even")]),
    st.builds(lambda n, c: atom(n, c=c), st.sampled_from(["m_ge_c", "m_eq_c", "k_eq_c", "k_ge_c"]),
              st.integers(0, 4)),
    st.builds(lambda n, d: atom(n, d=d), st.sampled_from(["m_eq_k_plus", "m_gt_k_plus"]),
              st.integers(-3, 3)),
)
exprs = st.recursive(leaf, lambda ch: st.one_of(
    ch.map(not_), st.lists(ch, min_size=1, max_size=3).map(lambda a: and_(*a)),
    st.lists(ch, min_size=1, max_size=3).map(lambda a: or_(*a))), max_leaves=8)
families = st.sampled_from(FAMILIES)


def points(fam, N):
    return [p for p in window_points(fam, N) if fam.contains(p)]


# -- expressions and membership ------------------------------------------------------

def test_point_json():
    assert Point.from_json({"m": "omega", "k": 0}) == Point(OMEGA, 0)
    assert Point(3, ROOT).to_json() == {"m": 3, "k": "root"}


def test_validate_reports_path():
    with pytest.raises(ExprError) as e:
        validate(and_(atom("m_even"), atom("m_ge_c")))
    assert e.value.path == "$.args[1]"
    with pytest.raises(ExprError):
        validate({"op": "xor", "args": []})
    with pytest.raises(ExprError):
        validate(atom("m_ge_c", c=-1))


def test_atoms_at_omega_follow_ordinal_reading():
    w = Point(OMEGA, 3)
    assert eval_expr(atom("m_ge_c", c=10), w)
    assert eval_expr(atom("m_gt_k_plus", d=100), w)
    assert not eval_expr(atom("m_even"), w)
    assert not eval_expr(atom("m_eq_k_plus", d=0), w)
    assert not eval_expr(atom("m_eq_c", c=0), w)


@given(exprs, families)
@settings(max_examples=150, deadline=None)
def test_region_membership_matches_expression(expr, fam):
    reg = R(expr, fam)
    for p in points(fam, 14):
        assert reg.contains(p) == eval_expr(expr, p)


@given(exprs, families)
@settings(max_examples=60, deadline=None)
def test_dnf_export_round_trips(expr, fam):
    reg = R(expr, fam)
    back = R(region_to_expr(reg), fam)
    assert back.same_set(reg)


@given(exprs, exprs, families)
@settings(max_examples=100, deadline=None)
def test_boolean_homomorphism(e1, e2, fam):
    a, b = R(e1, fam), R(e2, fam)
    u, i, c = region_combine("union", a, b), region_combine("intersect", a, b), ~a
    for p in points(fam, 12):
        assert u.contains(p) == (a.contains(p) or b.contains(p))
        assert i.contains(p) == (a.contains(p) and b.contains(p))
        assert c.contains(p) == (not a.contains(p))


def test_boolean_homomorphism_random_points():
    rng = np.random.default_rng(0)
    a = R(or_(atom("m_eq_k_plus", d=2), and_(atom("m_even"), atom("k_ge_c", c=3))))
    b = R(or_(atom("m_gt_k_plus", d=-1), atom("k_root")))
    u, i, c = a | b, a & b, ~a
    ms = rng.integers(0, 200, 100_000)
    ks = rng.integers(-1, 200, 100_000)
    omega = rng.random(100_000) < 0.05
    for m, k, om in zip(ms.tolist(), ks.tolist(), omega.tolist()):
        p = Point(OMEGA if om else m, ROOT if k < 0 else k)
        x, y = a.contains(p), b.contains(p)
        assert u.contains(p) == (x or y)
        assert i.contains(p) == (x and y)
        assert c.contains(p) == (not x)


def test_combine_examples():
    assert (~Region.empty(DESC)).same_set(Region.universe(DESC))
    assert region_combine("intersect", R(atom("m_eq_k_plus", d=0)),
                          R(atom("m_eq_k_plus", d=1))).is_empty()
    two = R(and_(atom("m_ge_c", c=2), atom("m_even"))) | R(atom("m_eq_omega"))
    assert two.contains(Point(4, 0)) and not two.contains(Point(3, 0))
    with pytest.raises(ValueError):
        region_combine("xor", two, two)


def test_emptiness_examples():
    assert region_empty(R(and_(atom("m_eq_c", c=3), atom("m_ge_c", c=4)))) == (True, None)
    assert region_empty(R(and_(atom("m_eq_k_plus", d=1), atom("k_even")))) == (False, Point(1, 0))
    assert region_empty(R(and_(atom("m_eq_omega"), atom("m_even"))))[0]


def test_minimal_point_order():
    fam = Family("omega1_desc", "onestep")
    assert region_empty(R(atom("m_ge_c", c=5), fam))[1] == Point(5, ROOT)
    assert region_empty(R(and_(atom("m_ge_c", c=5), not_(atom("k_root"))), fam))[1] == Point(5, 0)
    assert region_empty(R(atom("m_eq_omega"), fam))[1] == Point(OMEGA, ROOT)
    assert region_empty(R(atom("m_gt_k_plus", d=7), fam))[1] == Point(8, 0)


@given(exprs, families)
@settings(max_examples=80, deadline=None)
def test_minimal_point_is_least(expr, fam):
    reg = R(expr, fam)
    empty, p = region_empty(reg)
    members = [q for q in points(fam, 25) if reg.contains(q)]
    if empty:
        assert not members
    elif members:
        key = lambda q: (q.m == OMEGA, q.m if q.m != OMEGA else 0, q.k != ROOT,  # noqa: E731
                         q.k if q.k != ROOT else 0)
        assert p == min(members, key=key)


# -- preimages -------------------------------------------------------------------------

def test_preimage_examples():
    pre = preimage(R(atom("m_eq_k_plus", d=0)), 0)
    assert pre.same_set(R(atom("m_gt_k_plus", d=0)))
    full = preimage(Region.universe(DESC), 0)
    assert full.same_set(R(or_(atom("m_ge_c", c=1), atom("m_eq_omega"))))
    uni = Family("omega1_desc", "universal")
    pre = preimage(R(and_(atom("k_eq_c", c=3), atom("m_even")), uni), 1)
    assert pre.same_set(R(atom("m_even"), uni))


def test_difference_preimage_excludes_forced_singleton():
    fam = Family("omega1_desc", "difference")
    pre = preimage(R(atom("k_eq_c", c=3), fam), 1)
    assert pre.same_set(R(not_(atom("k_eq_c", c=3)), fam))


def _complete(fam, p, index):
    if index == 0:
        return fam.descending and p.m != OMEGA
    return fam.second == "onestep" and p.k != ROOT


@given(exprs, families, st.integers(0, 1))
@settings(max_examples=120, deadline=None)
def test_preimage_pointwise_on_window(expr, fam, index):
    t = R(expr, fam)
    pre = preimage(t, index)
    N = 20
    for p in points(fam, N):
        if _complete(fam, p, index):
            succ = list(successors_upto(fam, p, index, N + 1))
            assert pre.contains(p) == any(t.contains(q) for q in succ)
        elif pre.contains(p):
            w = witness_point(t, p, index)
            assert w is not None and fam.related(p, index, w) and t.contains(w)
        else:
            assert not any(t.contains(q) for q in successors_upto(fam, p, index, N + 1))


def test_preimage_exhaustive_window_30():
    for fam in FAMILIES:
        for expr in (atom("m_eq_k_plus", d=0), atom("m_eq_k_plus", d=1),
                     and_(atom("m_even"), atom("m_ge_c", c=2)), atom("k_even"),
                     or_(atom("m_eq_c", c=4), atom("k_root"))):
            t = R(expr, fam)
            for index in (0, 1):
                pre = preimage(t, index)
                for p in points(fam, 30):
                    if _complete(fam, p, index):
                        succ = successors_upto(fam, p, index, 31)
                        assert pre.contains(p) == any(t.contains(q) for q in succ)


def test_reflexive_families_count_the_point_itself():
    fam = Family("omega1_desc_refl", "onestep")
    pre = preimage(R(atom("m_eq_c", c=3), fam), 0)
    assert pre.contains(Point(3, ROOT)) and not pre.contains(Point(2, ROOT))
    assert pre.contains(Point(OMEGA, 5))


def test_ascending_preimage():
    fam = Family("omega_asc", "onestep")
    pre = preimage(R(atom("m_eq_c", c=3), fam), 0)
    assert pre.contains(Point(2, ROOT)) and not pre.contains(Point(3, ROOT))
    assert preimage(Region.universe(fam), 0).same_set(Region.universe(fam))


def test_onestep_preimage_only_at_root():
    pre = preimage(R(atom("m_eq_k_plus", d=0)), 1)
    assert pre.same_set(R(and_(atom("k_root"), not_(atom("m_eq_omega")))))


def test_witness_point_is_least():
    t = R(atom("m_eq_k_plus", d=0))
    assert witness_point(t, Point(OMEGA, 4), 0) == Point(4, 4)
    assert witness_point(t, Point(7, ROOT), 1) == Point(7, 7)
    assert witness_point(t, Point(3, 4), 0) is None


# -- symbolic models -------------------------------------------------------------------

@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_satisfiability_lemmas(name):
    sm = builtin_witness(name)
    region, cert = eval_symbolic(sm, corpus(BUILTIN_FORMULA[name]))
    assert region.contains(sm.target)
    assert cert.verify() and cert.entries


def test_builtin_targets():
    assert builtin_witness("lemma_sattwo").target == Point(OMEGA, 0)
    assert builtin_witness("fasc_witness").target == Point(0, ROOT)
    for n in ("lemma_satone", "lemma_satoner", "lemma_satoner_refl", "fdesc_witness"):
        assert builtin_witness(n).target == Point(OMEGA, ROOT)
    with pytest.raises(KeyError):
        builtin_witness("nope")


def test_builtin_valuations():
    two = builtin_witness("lemma_sattwo")
    assert two.region("q").contains(Point(1, 0)) and not two.region("q").contains(Point(1, 1))
    r = builtin_witness("lemma_satoner")
    t = r.region("t")
    assert t.contains(Point(2, 5)) and t.contains(Point(2, ROOT)) and not t.contains(Point(3, 5))
    one = builtin_witness("lemma_satone")
    assert one.region("p").contains(Point(3, 3)) and not one.region("p").contains(Point(3, 2))


def test_tick_guard_at_satoner_root():
    sm = builtin_witness("lemma_satoner")
    assert SymbolicEvaluator(sm).holds(corpus("tick_guard"), Point(OMEGA, ROOT))


def test_first_conjunct_false_at_bottom():
    ev = SymbolicEvaluator(builtin_witness("lemma_satone"))
    first = corpus_conjuncts("phi_inf")[0]
    assert not ev.holds(first, Point(0, ROOT))
    assert ev.holds(first, Point(OMEGA, ROOT))


def test_phi_inf_not_satisfied_in_wrong_models():
    # over the reflexive family the plain φ∞ fails: □₀⊥ is never true
    sm = builtin_witness("lemma_satoner_refl")
    region, _ = eval_symbolic(sm, corpus("phi_inf"))
    assert region.is_empty()
    # ψ∞ needs the difference frame; over onestep its first conjunct forces
    # □₁¬q at a point of the root row only, and the fourth fails somewhere else
    region, _ = eval_symbolic(builtin_witness("lemma_satone"), corpus("psi_inf"))
    assert not region.contains(Point(OMEGA, ROOT))


def test_certificate_entries_reverify():
    sm = builtin_witness("lemma_sattwo")
    _, cert = eval_symbolic(sm, corpus("psi_inf"))
    for e in cert.entries:
        assert sm.family.related(e["point"], e["index"], e["successor"])
        inside = cert.regions[e["child"]].contains(e["successor"])
        assert inside == (e["kind"] == "diamond")


def test_symbolic_model_json():
    sm = builtin_witness("lemma_sattwo")
    back = SymbolicModel.from_json(sm.to_json())
    assert back.family == sm.family
    assert back.region("p").same_set(sm.region("p"))
    with pytest.raises(ValueError):
        SymbolicModel(Family("omega1_desc", "difference"), {"p": atom("k_root")})


def test_missing_variable_is_empty():
    ev = SymbolicEvaluator(builtin_witness("lemma_satone"))
    assert ev.region(Var("zz")).is_empty()


def test_markers_rejected():
    with pytest.raises(ValueError):
        eval_symbolic(builtin_witness("lemma_satone"), parse("<#>p"))


# -- truncation oracle ---------------------------------------------------------------

def test_truncation_top_is_true():
    sm = builtin_witness("lemma_satone")
    tv = truncation_eval(sm, TOP, 5)
    assert all(v is True for v in tv[TOP].values())


def test_truncation_sattwo_first_conjunct_unknown():
    sm = builtin_witness("lemma_sattwo")
    first = corpus_conjuncts("psi_inf")[0]
    tv = truncation_eval(sm, first, 10)
    assert tv[first][Point(OMEGA, 0)] is None
    inner = first.arg  # p ∧ ¬q ∧ □₀¬q ∧ □₁¬q
    assert tv[inner][Point(0, 0)] is None
    assert tv[inner.left][Point(0, 0)] is True


def test_truncation_atoms_definite():
    sm = builtin_witness("lemma_satone")
    tv = truncation_eval(sm, Var("p"), 6)[Var("p")]
    assert tv[Point(3, 3)] is True and tv[Point(3, 2)] is False


def test_truncation_box_definite_on_complete_rows():
    sm = builtin_witness("lemma_satone")
    f = Box(0, Not(Var("p")))
    tv = truncation_eval(sm, f, 8)[f]
    assert tv[Point(2, 2)] is True      # successors (0,2), (1,2)
    assert tv[Point(3, 2)] is False     # (2,2) has p
    assert tv[Point(OMEGA, 2)] is False  # refuted in window


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_crosscheck_builtins(name):
    rep = crosscheck(builtin_witness(name), corpus(BUILTIN_FORMULA[name]), 12)
    assert rep.passed and rep.definite > 0


def test_crosscheck_variable():
    for name in BUILTIN_NAMES:
        rep = crosscheck(builtin_witness(name), Var("p"), 9)
        assert rep.passed and rep.unknown == 0


@given(exprs, families)
@settings(max_examples=25, deadline=None)
def test_crosscheck_random(expr, fam):
    sm = SymbolicModel(fam, {"p": expr if fam.has_root else and_(expr, not_(atom("k_even")))}) \
        if not _mentions_root(expr) or fam.has_root else None
    if sm is None:
        return
    f = parse("<0>(p & [1]~p) | [0]<1>p -> <1>[0]p")
    assert crosscheck(sm, f, 8).passed


def _mentions_root(e):
    if "atom" in e:
        return e["atom"] == "k_root"
    return any(_mentions_root(a) for a in e["args"])
