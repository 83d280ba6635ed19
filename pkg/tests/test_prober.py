import json
import random

import numpy as np
import pytest

from modalwb.formula import BOT, TOP, Var, corpus, parse, random_formula
from modalwb.kripke import (FrameCondition, Frame2, Model, SizeBoundError, check_condition,
                            eval_model, truth_mask)
from modalwb.prober.batch import BatchEvaluator
from modalwb.prober.campaign import frame_satisfiable, unsat_campaign
from modalwb.prober.classes import (FrameClassSpec, all_relations, arrays_to_frame,
                                    canonical_codes, enumerate_frames, frame_codes,
                                    frame_to_arrays, in_class, iter_class_batches, sample_class)

FC = FrameCondition
THM1 = FrameClassSpec.of("wcon0", "lcom", "rcom", "conf")
THM2 = FrameClassSpec.of("trans0", "wcon0", "lcom", "rcom", "conf")
THM3 = FrameClassSpec.of("wcon0", "ptrans1", "lcom")


# -- class specs ---------------------------------------------------------------------

def test_spec_normalises_and_round_trips():
    spec = FrameClassSpec.of("wcon0", "lcom")
    assert spec.conditions == {FC.weakly_connected_0, FC.lcom}
    assert FrameClassSpec.from_json(spec.to_json()) == spec


def test_spec_rejects_model_relative_and_empty():
    with pytest.raises(ValueError):
        FrameClassSpec.of("lcom_M")
    with pytest.raises(ValueError):
        FrameClassSpec.of()
    assert FrameClassSpec.of(product_only=True).product_only


# -- enumeration ---------------------------------------------------------------------

def test_size_one_theorem_class_has_all_four_frames():
    frames = list(enumerate_frames(1, THM1))
    assert len(frames) == 4
    for fr in frames:  # direct 4-case check
        assert all(check_condition(fr, c) for c in THM1.conditions)


def test_raw_frame_count():
    assert len(all_relations(2)) ** 2 == 256
    assert unsat_campaign(BOT, THM1, 2).records[1].frames_enumerated == 256


@pytest.mark.parametrize("spec", [THM1, THM2, THM3], ids=["thm1", "thm2", "thm3"])
def test_enumeration_matches_brute_force_filter(spec):
    n = 2
    want = set()
    for a in all_relations(n):
        for b in all_relations(n):
            fr = arrays_to_frame(a, b)
            if all(check_condition(fr, c) for c in spec.conditions):
                want.add(fr)
    got = list(enumerate_frames(n, spec))
    assert len(got) == len(set(got)) == len(want)
    assert set(got) == want


def test_vectorised_check_agrees_with_scalar():
    rng = np.random.default_rng(0)
    r0 = rng.random((400, 3, 3)) < 0.5
    r1 = rng.random((400, 3, 3)) < 0.5
    for c in FC:
        if c.model_relative:
            continue
        got = in_class(r0, r1, {c})
        want = [check_condition(arrays_to_frame(a, b), c).ok for a, b in zip(r0, r1)]
        assert got.tolist() == want, c


@pytest.mark.parametrize("n", [1, 2, 3])
def test_isomorphism_orbits_cross_checked(n):
    full = [np.concatenate(x) for x in zip(*iter_class_batches(n, THM1))]
    orbit_reps = sum(len(a) for a, _ in iter_class_batches(n, THM1, iso=True))
    assert orbit_reps == len(set(canonical_codes(*full).tolist()))


def test_enumeration_order_deterministic():
    a = [fr.to_json() for fr in enumerate_frames(2, THM3)]
    b = [fr.to_json() for fr in enumerate_frames(2, THM3)]
    assert a == b


def test_exhaustive_bound():
    with pytest.raises(SizeBoundError):
        list(enumerate_frames(6, THM1))
    with pytest.raises(SizeBoundError):
        unsat_campaign(TOP, THM1, 4)


def test_product_enumeration_commutes():
    spec = FrameClassSpec.of(product_only=True)
    n = 0
    for fr in enumerate_frames(2, spec):
        n += 1
        for c in (FC.lcom, FC.rcom, FC.conf):
            assert check_condition(fr, c)
    assert n == (2 + 16) ** 2


def test_arrays_round_trip():
    fr = Frame2.from_pairs(3, [(0, 1), (2, 2)], [(1, 0)])
    assert arrays_to_frame(*frame_to_arrays(fr)) == fr


# -- sampling ------------------------------------------------------------------------

@pytest.mark.parametrize("names", [
    ("wcon0", "lcom", "rcom", "conf"), ("trans0", "wcon0", "lcom", "rcom", "conf"),
    ("wcon0", "ptrans1", "lcom"), ("trans0", "lcom"), ("trans0", "rcom"), ("trans0", "conf"),
    ("onestep1", "sym1"), ("wconminus0", "lcom"),
])
@pytest.mark.parametrize("n", [2, 4, 5])
def test_sampler_output_is_in_class(names, n):
    spec = FrameClassSpec.of(*names)
    r0, r1, ok = sample_class(n, spec, 300, np.random.default_rng(n))
    assert ok.mean() > 0.5
    for a, b in zip(r0[ok][:40], r1[ok][:40]):
        fr = arrays_to_frame(a, b)
        assert all(check_condition(fr, c) for c in spec.conditions)


def test_sampler_is_seeded():
    a = sample_class(4, THM1, 50, np.random.default_rng(3))
    b = sample_class(4, THM1, 50, np.random.default_rng(3))
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_sampler_reaches_nontrivial_frames():
    r0, r1, ok = sample_class(4, THM1, 2000, np.random.default_rng(1))
    assert len(set(frame_codes(r0[ok], r1[ok]).tolist())) > 1000
    assert r1[ok].sum(axis=(1, 2)).max() >= 4


# -- batch evaluation ----------------------------------------------------------------

def test_batch_evaluator_matches_scalar():
    rng = random.Random(2)
    nprng = np.random.default_rng(2)
    for n in (1, 2, 3, 4):
        for _ in range(15):
            f = random_formula(rng, 4, names=("p", "q"))
            names = ["p", "q"]
            r0 = nprng.random((6, n, n)) < 0.5
            r1 = nprng.random((6, n, n)) < 0.5
            t = BatchEvaluator(f, n, names).truth(r0, r1)
            for b in range(6):
                fr = arrays_to_frame(r0[b], r1[b])
                for v in range(1 << (2 * n)):
                    vals = {nm: (v >> (j * n)) & ((1 << n) - 1) for j, nm in enumerate(names)}
                    mask = truth_mask(Model(fr, vals), f)
                    for x in range(n):
                        bit = int(t[b, x, v // 64]) >> (v % 64) & 1
                        assert bit == (mask >> x & 1)


# -- satisfiability and campaigns -----------------------------------------------------

def test_frame_satisfiable_examples():
    fr = Frame2.from_pairs(1, [(0, 0)], [])
    assert frame_satisfiable(fr, BOT) is None
    m, w = frame_satisfiable(Frame2.from_pairs(1), Var("p"))
    assert w == 0 and m.val("p") == 1
    with pytest.raises(SizeBoundError):
        frame_satisfiable(Frame2.from_pairs(9), TOP)


def test_phi_inf_unsat_on_one_world_class_frames():
    for fr in enumerate_frames(1, THM1):
        assert frame_satisfiable(fr, corpus("phi_inf")) is None


def test_campaign_counterexample_reverifies():
    rep = unsat_campaign(parse("<0>p & [1]~p"), THM1, 2)
    assert not rep.passed
    rec = next(r for r in rep.records if r.satisfiable_count)
    ce = rec.counterexample
    assert ce["verified"]
    m = Model.from_json(ce)
    assert ce["world"] in eval_model(m, parse("<0>p & [1]~p"))


@pytest.mark.parametrize("name, spec", [("phi_inf", THM1), ("psi_inf", THM3)])
def test_small_exhaustive_campaigns(name, spec):
    rep = unsat_campaign(corpus(name), spec, 2)
    assert rep.passed and [r.satisfiable_count for r in rep.records] == [0, 0]


def test_campaign_jobs_do_not_change_result():
    a = unsat_campaign(corpus("psi_inf"), THM3, 3, jobs=1).to_json(timing=False)
    b = unsat_campaign(corpus("psi_inf"), THM3, 3, jobs=2).to_json(timing=False)
    assert a == b


def test_random_campaign_deterministic():
    kw = dict(mode="random", seed=5, samples=3000, min_n=4)
    a = unsat_campaign(corpus("phi_inf"), THM1, 4, **kw).to_json(timing=False)
    b = unsat_campaign(corpus("phi_inf"), THM1, 4, **kw).to_json(timing=False)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert a["records"][0]["frames_in_class"] == 3000


def test_random_mode_finds_satisfiable_formula():
    rep = unsat_campaign(parse("<1><0>p"), THM1, 5, mode="random", samples=500, min_n=5)
    assert rep.records[0].satisfiable_count > 0
    assert rep.records[0].counterexample["verified"]


def test_iso_pruned_campaign_agrees():
    a = unsat_campaign(parse("<0><1>p & [0]false"), THM3, 3)
    b = unsat_campaign(parse("<0><1>p & [0]false"), THM3, 3, iso=True)
    assert [r.satisfiable_count > 0 for r in a.records] == [r.satisfiable_count > 0 for r in b.records]


def test_product_campaign():
    spec = FrameClassSpec.of(product_only=True, first=("transitive",))
    rep = unsat_campaign(corpus("fasc"), spec, 2)
    assert rep.passed
    assert rep.records[1].frames_enumerated == 2 * 16 + 16 * 2 + 16 * 16


def test_random_products_rejected():
    with pytest.raises(ValueError):
        unsat_campaign(TOP, FrameClassSpec.of(product_only=True), 2, mode="random")


def test_markers_rejected_in_campaign():
    with pytest.raises(ValueError):
        unsat_campaign(parse("<#>p"), THM1, 1)
