"""Chain extraction: run the infinity proofs' inductive constructions on a concrete model.

Both constructions only ever ask four things of a model: the truth set of a
formula, the set of points seeing a given set, the least successor of a point
inside a set, and membership.  The adapters below answer these for finite
models (bitmasks) and for symbolic models (regions).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..formula import TOP, And, Box, Dia, Not, Var, chi_formula, conj, diamond_exactly, neg
from ..kripke import Model, diamond_mask, truth_mask


class ConstructionStuck(RuntimeError):
    def __init__(self, step: int, missing_witness: str):
        super().__init__(f"construction stuck at step {step}: no {missing_witness}")
        self.step = step
        self.missing_witness = missing_witness


class FiniteAdapter:
    def __init__(self, m: Model):
        self.m = m
        self._memo = {}

    def truth(self, f):
        if f not in self._memo:
            self._memo[f] = truth_mask(self.m, f)
        return self._memo[f]

    def single(self, p):
        return 1 << p

    def meet(self, a, b):
        return a & b

    def pre(self, s, index):
        return diamond_mask(self.m.frame.rel(index), s)

    def contains(self, s, p) -> bool:
        return bool(s >> p & 1)

    def witness(self, s, p, index):
        hits = self.m.frame.rel(index)[p] & s
        return (hits & -hits).bit_length() - 1 if hits else None

    def related(self, a, index, b) -> bool:
        return bool(self.m.frame.rel(index)[a] >> b & 1)

    @staticmethod
    def show(p):
        return p


class SymbolicAdapter:
    def __init__(self, sm):
        from ..omega.symbolic import SymbolicEvaluator
        self.ev = SymbolicEvaluator(sm)
        self.family = sm.family

    def truth(self, f):
        return self.ev.region(f)

    def single(self, p):
        from ..omega.region import Region
        return Region.point(self.family, p)

    def meet(self, a, b):
        return a & b

    def pre(self, s, index):
        from ..omega.region import preimage
        return preimage(s, index)

    def contains(self, s, p) -> bool:
        return s.contains(p)

    def witness(self, s, p, index):
        from ..omega.region import witness_point
        return witness_point(s, p, index)

    def related(self, a, index, b) -> bool:
        return self.family.related(a, index, b)

    @staticmethod
    def show(p):
        return p.to_json()


def adapter_for(m):
    return FiniteAdapter(m) if isinstance(m, Model) else SymbolicAdapter(m)


@dataclass
class ChainStep:
    n: int
    points: dict
    checks: dict
    distinct_formula: str
    distinct_holds: bool

    @property
    def ok(self) -> bool:
        return self.distinct_holds and all(self.checks.values())


@dataclass
class ChainWitness:
    kind: str
    root: object
    steps: list = field(default_factory=list)

    @property
    def u_points(self) -> list:
        return [s.points["u"] for s in self.steps]

    @property
    def pairwise_distinct(self) -> bool:
        us = [repr(u) for u in self.u_points]
        return len(set(us)) == len(us)

    @property
    def passed(self) -> bool:
        return self.pairwise_distinct and all(s.ok for s in self.steps)

    def to_json(self) -> dict:
        return {"kind": "chain", "chain_kind": self.kind, "root": self.root,
                "steps": [{"n": s.n, "points": s.points, "checks": s.checks,
                           "distinct_formula": s.distinct_formula,
                           "distinct_holds": s.distinct_holds} for s in self.steps],
                "pairwise_distinct": self.pairwise_distinct, "passed": self.passed}


P, Q = Var("p"), Var("q")


def _need(x, step, what):
    if x is None:
        raise ConstructionStuck(step, what)
    return x


# -- φ∞ ---------------------------------------------------------------------------

def _dhe(f):
    """◇₀f ∧ □₀□₀¬f — "f exactly one step below"."""
    return And(Dia(0, f), Box(0, Box(0, neg(f))))


END = And(P, Box(0, neg(TOP)))                                   # p ∧ □₀⊥
NODIAG = conj(P, Box(0, Not(P)), Box(0, Box(0, Not(P))))         # p ∧ □₀¬p ∧ □₀□₀¬p
DHEP = _dhe(P)


def _extract_phi(a, root, n_steps):
    show = a.show
    steps = []
    # step 0: y0 via ◇₁◇₀(p ∧ □₀⊥), then u0 below it
    y = _need(a.witness(a.truth(Dia(0, END)), root, 1), 0, "y0 with rR1 y0 and <0>(p & [0]false)")
    u = _need(a.witness(a.truth(END), y, 0), 0, "u0 with y0 R0 u0 and p & [0]false")
    prev_x = None
    for n in range(n_steps):
        if n > 0:
            u = _need(a.witness(a.truth(NODIAG), prev_x, 1), n, "u(n+1) from the third conjunct")
            y = _need(a.witness(a.pre(a.single(u), 0), root, 1), n, "y(n+1) from lcom")
        # second conjunct, with the wcon⁻ trichotomy resolved by search
        v = _need(a.witness(a.meet(a.truth(DHEP), a.pre(a.single(u), 0)), y, 0), n,
                  "v(n) exactly one step above p and seeing u(n)")
        x = _need(a.witness(a.pre(a.single(v), 1), root, 0), n, "x(n) from rcom")
        checks = {
            "a": a.related(v, 0, u),
            "b": a.related(root, 0, x) and a.related(x, 1, v)
                 and (prev_x is None or a.related(prev_x, 1, u)),
            "c": a.contains(a.truth(NODIAG), u),
            "d": a.contains(a.truth(DHEP), v),
        }
        dist = diamond_exactly(n, TOP)
        steps.append(ChainStep(n, {"y": show(y), "u": show(u), "v": show(v), "x": show(x)},
                               checks, f"<=({n})>true", a.contains(a.truth(dist), u)))
        prev_x = x
    return steps


# -- ψ∞ ---------------------------------------------------------------------------

INIT2 = conj(P, Not(Q), Box(0, Not(Q)), Box(1, Not(Q)))
VGOOD = And(Q, Box(1, Not(Q)))
UOK = conj(P, Not(Q), Box(0, Not(Q)), Dia(1, Q))


def _distinct_psi(n):
    return conj(chi_formula(n), *[Not(chi_formula(i)) for i in range(n)])


def _extract_psi(a, root, n_steps):
    show = a.show
    steps = []
    y, u, v = root, None, None
    for n in range(n_steps):
        if n == 0:
            u = _need(a.witness(a.truth(INIT2), y, 0), 0, "u0 from the first conjunct")
        else:
            prev_v, prev_y = v, y
            u = _need(a.witness(a.meet(a.truth(UOK), a.pre(a.single(prev_v), 1)), prev_v, 1), n,
                      "u(n+1) from the third conjunct")
            y = _need(a.witness(a.pre(a.single(u), 0), prev_y, 1), n, "y(n+1) from lcom")
        # weak connectedness resolved by search: the q-point seeing u
        v = _need(a.witness(a.meet(a.truth(VGOOD), a.pre(a.single(u), 0)), y, 0), n,
                  "v(n) with q & [1]~q seeing u(n)")
        checks = {
            "e": (y == root or a.related(root, 1, y)) and a.related(y, 0, v) and a.related(v, 0, u),
            "f": n == 0 or (a.related(prev_v, 1, u) and a.related(u, 1, prev_v)),
            "g": a.contains(a.truth(P), u),
            "h": a.contains(a.truth(VGOOD), v),
        }
        dist = _distinct_psi(n)
        steps.append(ChainStep(n, {"y": show(y), "u": show(u), "v": show(v)}, checks,
                               f"chi_{n} & ~chi_i (i<{n})", a.contains(a.truth(dist), u)))
    return steps


def extract_chain(m, root, kind: str, n_steps: int) -> ChainWitness:
    """Replay the proof's construction for ``n_steps`` steps from ``root``.

    ``m`` is a finite :class:`~modalwb.kripke.Model` (``root`` a world index)
    or a symbolic model (``root`` a :class:`~modalwb.omega.region.Point`).
    Raises :class:`ConstructionStuck` when a required witness does not exist.
    """
    a = adapter_for(m)
    if kind == "phi":
        steps = _extract_phi(a, root, n_steps)
    elif kind == "psi":
        steps = _extract_psi(a, root, n_steps)
    else:
        raise ValueError(f"unknown chain kind {kind!r}")
    return ChainWitness(kind, a.show(root), steps)
