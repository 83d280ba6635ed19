"""Exact model checking over the infinite product families."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from ..formula import (And, Bot, Box, Dia, Formula, Imp, Not, Or, TickBox, TickDia, Top,
                       Var, render, subformulas)
from .expr import and_, atom, not_, to_region, validate
from .region import (OMEGA, ROOT, Family, Point, Region, preimage, witness_point)


@dataclass(frozen=True, eq=False)
class SymbolicModel:
    family: Family
    valuation: Mapping[str, dict]
    name: Optional[str] = None
    target: Optional[Point] = None

    def __post_init__(self):
        for var, expr in self.valuation.items():
            validate(expr, f"$.valuation.{var}")
            if not self.family.has_root and _mentions_root(expr):
                raise ValueError(f"valuation of {var!r} uses k_root on a family without a root")

    def region(self, var: str) -> Region:
        cache = self.__dict__.setdefault("_regions", {})
        if var not in cache:
            if var in self.valuation:
                cache[var] = to_region(self.valuation[var], self.family)
            else:
                cache[var] = Region.empty(self.family)
        return cache[var]

    def to_json(self) -> dict:
        return {"first": self.family.first, "second": self.family.second,
                "valuation": {k: v for k, v in sorted(self.valuation.items())}}

    @classmethod
    def from_json(cls, d) -> "SymbolicModel":
        return cls(Family(d["first"], d["second"]), dict(d.get("valuation", {})))


def _mentions_root(expr) -> bool:
    if "atom" in expr:
        return expr["atom"] == "k_root"
    return any(_mentions_root(a) for a in expr["args"])


@dataclass
class Certificate:
    """Witnesses behind the modal verdicts at a set of sampled points."""
    family: Family
    regions: dict = field(default_factory=dict)
    entries: list = field(default_factory=list)

    def verify(self) -> bool:
        for e in self.entries:
            child = self.regions[e["child"]]
            x, w = e["point"], e["successor"]
            if not self.family.related(x, e["index"], w):
                return False
            if e["kind"] == "diamond" and not child.contains(w):
                return False
            if e["kind"] == "box" and child.contains(w):
                return False
        return True

    def to_json(self, limit: int = 200) -> dict:
        return {"entries": [
            {"kind": e["kind"], "index": e["index"], "formula": render(e["formula"]),
             "point": e["point"].to_json(), "successor": e["successor"].to_json()}
            for e in self.entries[:limit]],
            "total_entries": len(self.entries), "verified": self.verify()}


def sample_points(family: Family, n: int = 3) -> list:
    ms = list(range(n + 1)) + ([OMEGA] if family.has_omega else [])
    ks = ([ROOT] if family.has_root else []) + list(range(n + 1))
    return [Point(m, k) for m in ms for k in ks]


class SymbolicEvaluator:
    """Memoised bottom-up evaluation of formulas to regions."""

    def __init__(self, sm: SymbolicModel):
        self.sm = sm
        self.family = sm.family
        self.memo = {}

    def region(self, f: Formula) -> Region:
        if f in self.memo:
            return self.memo[f]
        fam = self.family
        for g in subformulas(f):
            if g in self.memo:
                continue
            if isinstance(g, Var):
                r = self.sm.region(g.name)
            elif isinstance(g, Top):
                r = Region.universe(fam)
            elif isinstance(g, Bot):
                r = Region.empty(fam)
            elif isinstance(g, Not):
                r = ~self.memo[g.arg]
            elif isinstance(g, And):
                r = self.memo[g.left] & self.memo[g.right]
            elif isinstance(g, Or):
                r = self.memo[g.left] | self.memo[g.right]
            elif isinstance(g, Imp):
                r = ~self.memo[g.left] | self.memo[g.right]
            elif isinstance(g, Dia):
                r = preimage(self.memo[g.arg], g.index)
            elif isinstance(g, Box):
                r = ~preimage(~self.memo[g.arg], g.index)
            elif isinstance(g, (TickDia, TickBox)):
                raise ValueError("tick markers must be expanded before evaluation")
            else:
                raise TypeError(f"not a formula: {g!r}")
            self.memo[g] = r
        return self.memo[f]

    def holds(self, f: Formula, p: Point) -> bool:
        return self.region(f).contains(p)

    def certificate(self, f: Formula, points) -> Certificate:
        self.region(f)
        cert = Certificate(self.family)
        for g in subformulas(f):
            if not isinstance(g, (Dia, Box)):
                continue
            cert.regions[g.arg] = self.memo[g.arg]
            here = self.memo[g]
            for x in points:
                if isinstance(g, Dia) and here.contains(x):
                    w = witness_point(self.memo[g.arg], x, g.index)
                    kind = "diamond"
                elif isinstance(g, Box) and not here.contains(x):
                    w = witness_point(~self.memo[g.arg], x, g.index)
                    kind = "box"
                else:
                    continue
                if w is None:
                    raise AssertionError(f"no witness for {render(g)} at {x}")
                cert.entries.append({"kind": kind, "index": g.index, "formula": g,
                                     "child": g.arg, "point": x, "successor": w})
        return cert


def eval_symbolic(sm: SymbolicModel, f: Formula, points=None):
    """``(region, certificate)`` for ``f`` in ``sm``."""
    ev = SymbolicEvaluator(sm)
    region = ev.region(f)
    pts = sample_points(sm.family) if points is None else list(points)
    if sm.target is not None and sm.target not in pts:
        pts.append(sm.target)
    return region, ev.certificate(f, pts)


# -- built-in witness models ----------------------------------------------------------

def _finite():
    return not_(atom("m_eq_omega"))


def builtin_witness(name: str) -> SymbolicModel:
    desc_one = Family("omega1_desc", "onestep")
    if name == "lemma_satone":
        return SymbolicModel(desc_one, {"p": and_(_finite(), atom("m_eq_k_plus", d=0))},
                             name, Point(OMEGA, ROOT))
    if name in ("lemma_satoner", "lemma_satoner_refl"):
        fam = desc_one if name == "lemma_satoner" else Family("omega1_desc_refl", "onestep")
        return SymbolicModel(fam, {
            "t": and_(atom("m_even"), atom("m_ge_c", c=2)),
            "p": and_(_finite(), atom("m_eq_k_plus", d=1)),
        }, name, Point(OMEGA, ROOT))
    if name == "lemma_sattwo":
        return SymbolicModel(Family("omega1_desc", "difference"), {
            "p": and_(atom("m_eq_k_plus", d=0), _finite()),
            "q": atom("m_eq_k_plus", d=1),
        }, name, Point(OMEGA, 0))
    if name == "fasc_witness":
        return SymbolicModel(Family("omega_asc", "onestep"), {"p": atom("m_eq_k_plus", d=0)},
                             name, Point(0, ROOT))
    if name == "fdesc_witness":
        return SymbolicModel(desc_one, {"p": and_(atom("m_eq_k_plus", d=0), _finite())},
                             name, Point(OMEGA, ROOT))
    raise KeyError(f"unknown witness model {name!r}")


BUILTIN_NAMES = ("lemma_satone", "lemma_satoner", "lemma_satoner_refl", "lemma_sattwo",
                 "fasc_witness", "fdesc_witness")

# formula each witness model is built for
BUILTIN_FORMULA = {
    "lemma_satone": "phi_inf",
    "lemma_satoner": "phi_inf_bullet",
    "lemma_satoner_refl": "phi_inf_bullet",
    "lemma_sattwo": "psi_inf",
    "fasc_witness": "fasc",
    "fdesc_witness": "fdesc",
}
