"""Three-valued evaluation on a finite window, as an independent partial oracle.

Successors that fall outside the window are unknown, so a diamond is only
definitely false (a box only definitely true) when every successor of the
point lies inside the window.  Atoms are read straight from the RegionExpr
valuation, bypassing the region tables altogether.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..formula import (And, Bot, Box, Dia, Formula, Imp, Not, Or, TickBox, TickDia, Top,
                       Var, render, subformulas)
from .expr import eval_expr
from .region import OMEGA, ROOT, Family, Point
from .symbolic import SymbolicEvaluator, SymbolicModel


def window_points(family: Family, N: int) -> list:
    ms = list(range(N + 1)) + ([OMEGA] if family.has_omega else [])
    ks = ([ROOT] if family.has_root else []) + list(range(N + 1))
    return [Point(m, k) for m in ms for k in ks]


def _complete(family: Family, p: Point, index: int) -> bool:
    """Does the whole successor set of ``p`` lie inside any window containing ``p``?"""
    if index == 0:
        return family.descending and p.m != OMEGA
    return family.second == "onestep" and p.k != ROOT


def _k3_not(a):
    return None if a is None else not a


def _k3_and(a, b):
    if a is False or b is False:
        return False
    if a is None or b is None:
        return None
    return True


def _k3_or(a, b):
    return _k3_not(_k3_and(_k3_not(a), _k3_not(b)))


def truncation_eval(sm: SymbolicModel, f: Formula, N: int) -> dict:
    """``{subformula: {point: True | False | None}}`` over the window of size ``N``."""
    fam = sm.family
    pts = window_points(fam, N)
    succ = {}
    for i in (0, 1):
        for p in pts:
            succ[i, p] = [q for q in pts if fam.related(p, i, q)]
    out = {}
    for g in subformulas(f):
        if isinstance(g, Var):
            expr = sm.valuation.get(g.name)
            val = {p: (expr is not None and eval_expr(expr, p)) for p in pts}
        elif isinstance(g, Top):
            val = dict.fromkeys(pts, True)
        elif isinstance(g, Bot):
            val = dict.fromkeys(pts, False)
        elif isinstance(g, Not):
            a = out[g.arg]
            val = {p: _k3_not(a[p]) for p in pts}
        elif isinstance(g, And):
            a, b = out[g.left], out[g.right]
            val = {p: _k3_and(a[p], b[p]) for p in pts}
        elif isinstance(g, Or):
            a, b = out[g.left], out[g.right]
            val = {p: _k3_or(a[p], b[p]) for p in pts}
        elif isinstance(g, Imp):
            a, b = out[g.left], out[g.right]
            val = {p: _k3_or(_k3_not(a[p]), b[p]) for p in pts}
        elif isinstance(g, (Dia, Box)):
            a = out[g.arg]
            want = isinstance(g, Dia)  # the child value that decides the modality
            val = {}
            for p in pts:
                vals = [a[q] for q in succ[g.index, p]]
                if want in vals:
                    val[p] = want
                elif None in vals or not _complete(fam, p, g.index):
                    val[p] = None
                else:
                    val[p] = not want
        elif isinstance(g, (TickDia, TickBox)):
            raise ValueError("tick markers must be expanded before evaluation")
        else:
            raise TypeError(f"not a formula: {g!r}")
        out[g] = val
    return out


@dataclass
class CrosscheckReport:
    window: int
    points: int
    subformulas: int
    definite: int = 0
    unknown: int = 0
    disagreements: list = field(default_factory=list)
    top_level: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.disagreements

    def to_json(self) -> dict:
        return {"kind": "crosscheck", "window": self.window, "points": self.points,
                "subformulas": self.subformulas, "definite": self.definite,
                "unknown": self.unknown, "disagreements": self.disagreements[:100],
                "disagreement_count": len(self.disagreements),
                "top_level": self.top_level, "passed": self.passed}


def crosscheck(sm: SymbolicModel, f: Formula, N: int) -> CrosscheckReport:
    """Compare definite truncation verdicts with region membership, subformula by subformula."""
    tv = truncation_eval(sm, f, N)
    ev = SymbolicEvaluator(sm)
    ev.region(f)
    pts = window_points(sm.family, N)
    rep = CrosscheckReport(N, len(pts), len(tv))
    for g, vals in tv.items():
        region = ev.memo[g]
        for p in pts:
            v = vals[p]
            if v is None:
                rep.unknown += 1
                continue
            rep.definite += 1
            if region.contains(p) != v:
                rep.disagreements.append({"formula": render(g), "point": p.to_json(),
                                          "truncation": v, "region": not v})
    top = tv[f]
    rep.top_level = {"true": sum(v is True for v in top.values()),
                     "false": sum(v is False for v in top.values()),
                     "unknown": sum(v is None for v in top.values())}
    return rep
