"""The acceptance criteria as runnable checks.

Each check returns a :class:`Outcome`; ``verify-all`` on the command line and
the acceptance test module both run them from here.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .formula import corpus, parse, random_formula, render
from .kripke import (FrameCondition, Frame1, check_condition, f_sharp, frame_validates,
                     p_morphism_search, product_frame)
from .omega.region import OMEGA, ROOT, Point
from .omega.symbolic import BUILTIN_FORMULA, BUILTIN_NAMES, builtin_witness, eval_symbolic
from .omega.truncation import crosscheck
from .prober.campaign import unsat_campaign
from .prober.chain import extract_chain
from .prober.claims import CLAIMS, claim_test
from .prober.classes import FrameClassSpec, iter_products

SEED = 20240601
RANDOM_SAMPLES = 1_000_000


@dataclass
class Outcome:
    number: int
    title: str
    passed: bool
    detail: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def line(self) -> str:
        return (f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number:2d}: {self.title}"
                f" ({self.elapsed:.1f}s)")

    def to_json(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "detail": self.detail}


def _campaign_counts(report) -> dict:
    return {str(r.size): {"in_class": r.frames_in_class, "satisfiable": r.satisfiable_count}
            for r in report.records}


def _theorem_shadow(name, classes, random_sizes=None, samples=RANDOM_SAMPLES):
    spec = FrameClassSpec.of(*classes)
    t0 = time.perf_counter()
    ex = unsat_campaign(corpus(name), spec, 3, jobs=1, name=name)
    ex_time = time.perf_counter() - t0
    detail = {"exhaustive": _campaign_counts(ex), "exhaustive_seconds": round(ex_time, 1)}
    ok = ex.passed and ex_time < 300 and [r.size for r in ex.records] == [1, 2, 3]
    if random_sizes:
        rnd = unsat_campaign(corpus(name), spec, max(random_sizes), mode="random",
                             min_n=min(random_sizes), seed=SEED, samples=samples, name=name)
        detail["random"] = {str(r.size): {"in_class": r.frames_in_class,
                                          "distinct": r.distinct_in_class,
                                          "satisfiable": r.satisfiable_count}
                            for r in rnd.records}
        ok = ok and rnd.passed and all(r.frames_in_class >= samples for r in rnd.records)
    return ok, detail


def criterion_1(samples=RANDOM_SAMPLES):
    return _theorem_shadow("phi_inf", ["wcon0", "lcom", "rcom", "conf"], (4, 5), samples)


def criterion_2():
    return _theorem_shadow("phi_inf_bullet", ["trans0", "wcon0", "lcom", "rcom", "conf"])


def criterion_3():
    return _theorem_shadow("psi_inf", ["wcon0", "ptrans1", "lcom"])


def criterion_4():
    detail, ok = {}, True
    for name in BUILTIN_NAMES:
        sm = builtin_witness(name)
        region, cert = eval_symbolic(sm, corpus(BUILTIN_FORMULA[name]))
        member, verified = region.contains(sm.target), cert.verify()
        detail[name] = {"target": sm.target.to_json(), "member": member,
                        "certificate_verified": verified, "witnesses": len(cert.entries)}
        ok = ok and member and verified
    return ok, detail


def criterion_5(steps=25):
    detail, ok = {}, True
    for name, kind, root in (("lemma_satone", "phi", Point(OMEGA, ROOT)),
                             ("lemma_sattwo", "psi", Point(OMEGA, 0))):
        t0 = time.perf_counter()
        w = extract_chain(builtin_witness(name), root, kind, steps)
        dt = time.perf_counter() - t0
        good = w.passed and len(w.steps) == steps and dt < 60
        detail[name] = {"steps": len(w.steps), "passed": w.passed, "seconds": round(dt, 1)}
        ok = ok and good
    return ok, detail


def criterion_6(samples=10_000):
    detail, ok = {}, True
    for c in CLAIMS:
        r = claim_test(c, samples, SEED)
        detail[c] = {"checked": r.checked, "discarded": r.discarded, "violations": r.violations}
        ok = ok and r.passed
    return ok, detail


def criterion_7(window=30):
    detail, ok = {}, True
    for name in BUILTIN_NAMES:
        rep = crosscheck(builtin_witness(name), corpus(BUILTIN_FORMULA[name]), window)
        detail[name] = {"definite": rep.definite, "unknown": rep.unknown,
                        "disagreements": len(rep.disagreements)}
        ok = ok and rep.passed
    return ok, detail


def _random_frame1(rng, n) -> Frame1:
    r = rng.random((n, n)) < 0.5
    return Frame1.from_pairs(n, [(int(x), int(y)) for x, y in zip(*np.nonzero(r))])


def criterion_8(pairs=10_000, validated=100):
    rng = np.random.default_rng(SEED)
    structural_failures = 0
    for _ in range(pairs):
        f0 = _random_frame1(rng, int(rng.integers(1, 6)))
        f1 = _random_frame1(rng, int(rng.integers(1, 6)))
        fr = product_frame(f0, f1)
        for c in (FrameCondition.lcom, FrameCondition.rcom, FrameCondition.conf):
            if not check_condition(fr, c):
                structural_failures += 1
    invalid = 0
    axioms = [corpus(n) for n in ("commut0", "commut1", "commut2")]
    for _ in range(validated):
        fr = product_frame(_random_frame1(rng, int(rng.integers(1, 4))),
                           _random_frame1(rng, int(rng.integers(1, 4))))
        invalid += sum(frame_validates(fr, a) is not True for a in axioms)
    return structural_failures == 0 and invalid == 0, {
        "product_pairs": pairs, "structural_failures": structural_failures,
        "validated_products": validated, "invalid_axiom_instances": invalid}


def criterion_9():
    detail, ok = {}, True
    for name, first in (("fasc", ("transitive",)), ("fdesc", ("transitive", "weakly_connected"))):
        spec = FrameClassSpec.of(product_only=True, first=first)
        rep = unsat_campaign(corpus(name), spec, 3, jobs=1, name=name)
        detail[name] = _campaign_counts(rep)
        ok = ok and rep.passed and len(rep.records) == 3
    return ok, detail


def criterion_10():
    t0 = time.perf_counter()
    target, searched, found = f_sharp(), 0, 0
    for _, _, fr in iter_products(3, FrameClassSpec.of(product_only=True)):
        searched += 1
        if p_morphism_search(fr, target) is not None:
            found += 1
    dt = time.perf_counter() - t0
    return found == 0 and dt < 600, {"products": searched, "p_morphisms": found,
                                     "seconds": round(dt, 1)}


def criterion_11(count=10_000):
    rng = random.Random(SEED)
    failures = 0
    for _ in range(count):
        f = random_formula(rng, 6, markers=True)
        if parse(render(f)) != f:
            failures += 1
    return failures == 0, {"formulas": count, "failures": failures}


CRITERIA: list = [
    (1, "phi_inf unsatisfiable on wcon0+lcom+rcom+conf frames (exhaustive 1-3, random 4-5)",
     criterion_1),
    (2, "phi_inf_bullet unsatisfiable on trans0+wcon0+lcom+rcom+conf frames (sizes 1-3)",
     criterion_2),
    (3, "psi_inf unsatisfiable on wcon0+ptrans1+lcom frames (sizes 1-3)", criterion_3),
    (4, "satisfiability lemmas hold in the six infinite witness models", criterion_4),
    (5, "chain extraction yields 25 distinct points for phi and psi", criterion_5),
    (6, "tick-relation claims: zero violations at 10^4 samples each", criterion_6),
    (7, "region evaluator agrees with the truncation oracle at N=30", criterion_7),
    (8, "products satisfy lcom/rcom/conf and validate the commutator axioms", criterion_8),
    (9, "fasc / fdesc unsatisfiable on finite products (components <= 3)", criterion_9),
    (10, "no product with components <= 3 maps p-morphically onto F#", criterion_10),
    (11, "render/parse round-trip on 10^4 random formulas", criterion_11),
]


def run_criterion(number: int, fn: Callable = None, **kw) -> Outcome:
    entry = next(c for c in CRITERIA if c[0] == number)
    t0 = time.perf_counter()
    passed, detail = (fn or entry[2])(**kw)
    return Outcome(number, entry[1], bool(passed), detail, time.perf_counter() - t0)


def run_all(only=None):
    for number, _, _ in CRITERIA:
        if only is None or number in only:
            yield run_criterion(number)
