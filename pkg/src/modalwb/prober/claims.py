"""Randomised checks of the tick-relation claims on finite models."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..formula import TICK_VAR, TickDia, Var, corpus, tick_expand
from ..kripke import (FrameCondition, Model, _bits, check_condition, compose, diamond_mask,
                      tick_relation, truth_mask)
from .classes import FrameClassSpec, arrays_to_frame, sample_class

CLAIMS = ("trans", "wcon", "comm_l", "comm_r", "comm_c", "dia_semantics")

_HYPOTHESES = {
    "trans": ("trans0",),
    "wcon": ("trans0", "wcon0"),
    "comm_l": ("trans0", "lcom"),
    "comm_r": ("trans0", "rcom"),
    "comm_c": ("trans0", "conf"),
}
_CONCLUSION = {
    "wcon": FrameCondition.wcon_minus_M,
    "comm_l": FrameCondition.lcom_M,
    "comm_r": FrameCondition.rcom_M,
    "comm_c": FrameCondition.conf_M,
}
MAX_WORLDS = 5
BATCH = 2000


@dataclass
class ClaimReport:
    claim: str
    seed: int
    samples: int
    checked: int = 0
    discarded: int = 0
    violations: int = 0
    violation: Optional[dict] = None
    sizes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.checked >= self.samples

    def to_json(self) -> dict:
        return {"kind": "claim", "claim": self.claim, "seed": self.seed,
                "samples": self.samples, "checked": self.checked,
                "discarded": self.discarded, "violations": self.violations,
                "violation": self.violation,
                "sizes": {str(k): v for k, v in sorted(self.sizes.items())},
                "passed": self.passed}


def _subset(a, b) -> bool:
    return all(x & ~y == 0 for x, y in zip(a, b))


def _trans_violation(m: Model) -> Optional[str]:
    r0, tick = m.frame.r0, tick_relation(m)
    if not _subset(compose(tick, tick), tick):
        return "tick relation not transitive"
    if not _subset(tick, r0):
        return "tick relation not contained in R0"
    if not _subset(compose(r0, tick), tick):
        return "R0 o tick not contained in tick"
    if not _subset(compose(tick, r0), tick):
        return "tick o R0 not contained in tick"
    return None


def _dia_violation(m: Model) -> Optional[str]:
    p = Var("p")
    lhs = truth_mask(m, tick_expand(TickDia(p)))
    rhs = diamond_mask(tick_relation(m), m.val("p"))
    return None if lhs == rhs else f"<#>p true at {lhs:b}, tick-diamond at {rhs:b}"


def _guard_repair(fr, t: int, root: int) -> int:
    """Close ``t`` so that the tick guard holds at ``root``: every guarded point
    that sees or has ``t`` gets ``t`` on itself and all its R1-successors."""
    guarded = fr.r0[root] | (1 << root)
    while True:
        before = t
        for x in _bits(guarded):
            if t >> x & 1 or fr.r1[x] & t:
                t |= (1 << x) | fr.r1[x]
        if t == before:
            return t


def _random_t(rng, n) -> int:
    return int(rng.integers(0, 1 << n))


def claim_test(claim: str, samples: int = 10000, seed: int = 0) -> ClaimReport:
    """Sample models meeting the claim's hypotheses and check its conclusion.

    Frame sizes cycle through 1..5 worlds.  For the commutation claims the
    root is sampled and the tick guard is repaired at it half of the time;
    models where the guard still fails are discarded and counted.
    """
    if claim not in CLAIMS:
        raise ValueError(f"unknown claim {claim!r}; expected one of {', '.join(CLAIMS)}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, CLAIMS.index(claim)]))
    rep = ClaimReport(claim, seed, samples)
    guard = corpus("tick_guard")
    spec = FrameClassSpec.of(*_HYPOTHESES[claim]) if claim in _HYPOTHESES else None
    n = 0
    while rep.checked < samples:
        n = n % MAX_WORLDS + 1
        count = min(BATCH, -(-(samples - rep.checked) // MAX_WORLDS))
        if spec is None:
            r0 = rng.random((count, n, n)) < 0.5
            r1 = rng.random((count, n, n)) < 0.5
            ok = np.ones(count, dtype=bool)
        else:
            r0, r1, ok = sample_class(n, spec, count, rng)
        for b in np.nonzero(ok)[0]:
            fr = arrays_to_frame(r0[b], r1[b])
            t = _random_t(rng, n)
            root = int(rng.integers(0, n))
            if claim.startswith("comm"):
                if rng.random() < 0.5:
                    t = _guard_repair(fr, t, root)
            vals = {TICK_VAR: t}
            if claim == "dia_semantics":
                vals["p"] = _random_t(rng, n)
            m = Model(fr, vals)
            if claim.startswith("comm") and not truth_mask(m, guard) >> root & 1:
                rep.discarded += 1
                continue
            if claim == "trans":
                why = _trans_violation(m)
            elif claim == "dia_semantics":
                why = _dia_violation(m)
            else:
                v = check_condition(fr, _CONCLUSION[claim], ctx=(m, root))
                why = None if v.ok else f"{_CONCLUSION[claim].value} fails at {v.witness}"
            rep.checked += 1
            rep.sizes[n] = rep.sizes.get(n, 0) + 1
            if why is not None:
                rep.violations += 1
                if rep.violation is None:
                    d = m.to_json()
                    d.update(root=root, reason=why)
                    rep.violation = d
            if rep.checked >= samples:
                break
    return rep
