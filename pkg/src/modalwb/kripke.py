"""Finite 2-frames and models.

Relations are stored as tuples of row bit-sets: ``r0[x]`` is an int whose
bit ``y`` is set iff ``x R0 y``.  Worlds are ``0..n-1``.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .formula import (And, Bot, Box, Dia, Formula, Imp, Not, Or, TickBox,
                      TickDia, Top, Var, subformulas, variables, TICK_VAR)


class SizeBoundError(ValueError):
    pass


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def pairs_to_rows(n: int, pairs) -> tuple:
    rows = [0] * n
    for i, j in pairs:
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"pair ({i}, {j}) out of range for {n} worlds")
        rows[i] |= 1 << j
    return tuple(rows)


def rows_to_pairs(rows) -> list:
    return [[i, j] for i, row in enumerate(rows) for j in _bits(row)]


def compose(a, b) -> tuple:
    """Relational composition a;b (first a, then b)."""
    out = []
    for row in a:
        acc = 0
        for y in _bits(row):
            acc |= b[y]
        out.append(acc)
    return tuple(out)


def converse(rows) -> tuple:
    n = len(rows)
    out = [0] * n
    for x, row in enumerate(rows):
        for y in _bits(row):
            out[y] |= 1 << x
    return tuple(out)


def transitive_closure(rows) -> tuple:
    rows = list(rows)
    n = len(rows)
    for k in range(n):
        bk = 1 << k
        for i in range(n):
            if rows[i] & bk:
                rows[i] |= rows[k]
    return tuple(rows)


@dataclass(frozen=True)
class Frame1:
    worlds: int
    r: tuple

    def __post_init__(self):
        _check_rows(self.worlds, self.r)

    @classmethod
    def from_pairs(cls, n: int, pairs) -> "Frame1":
        return cls(n, pairs_to_rows(n, pairs))

    def to_json(self) -> dict:
        return {"worlds": self.worlds, "r": rows_to_pairs(self.r)}

    @classmethod
    def from_json(cls, data: Mapping) -> "Frame1":
        return cls.from_pairs(int(data["worlds"]), data.get("r", []))


@dataclass(frozen=True)
class Frame2:
    worlds: int
    r0: tuple
    r1: tuple

    def __post_init__(self):
        _check_rows(self.worlds, self.r0)
        _check_rows(self.worlds, self.r1)

    @classmethod
    def from_pairs(cls, n: int, r0=(), r1=()) -> "Frame2":
        return cls(n, pairs_to_rows(n, r0), pairs_to_rows(n, r1))

    def rel(self, index: int) -> tuple:
        return self.r0 if index == 0 else self.r1

    @property
    def full(self) -> int:
        return (1 << self.worlds) - 1

    def to_json(self) -> dict:
        return {"worlds": self.worlds, "r0": rows_to_pairs(self.r0),
                "r1": rows_to_pairs(self.r1)}

    @classmethod
    def from_json(cls, data: Mapping) -> "Frame2":
        return cls.from_pairs(int(data["worlds"]), data.get("r0", []), data.get("r1", []))


def _check_rows(n: int, rows):
    if n < 1:
        raise ValueError("a frame needs at least one world")
    if len(rows) != n:
        raise ValueError(f"expected {n} relation rows, got {len(rows)}")
    for row in rows:
        if row < 0 or row >> n:
            raise ValueError("relation contains out-of-range worlds")


@dataclass(frozen=True)
class Model:
    frame: Frame2
    valuation: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        full = self.frame.full
        for name, mask in self.valuation.items():
            if mask & ~full:
                raise ValueError(f"valuation of {name!r} mentions worlds outside the frame")

    @classmethod
    def from_sets(cls, frame: Frame2, valuation: Mapping) -> "Model":
        return cls(frame, {k: _mask(v) for k, v in valuation.items()})

    def val(self, name: str) -> int:
        return self.valuation.get(name, 0)

    def with_valuation(self, **sets) -> "Model":
        v = dict(self.valuation)
        v.update({k: _mask(s) for k, s in sets.items()})
        return Model(self.frame, v)

    def to_json(self) -> dict:
        d = self.frame.to_json()
        d["valuation"] = {k: sorted(_bits(v)) for k, v in sorted(self.valuation.items())}
        return d

    @classmethod
    def from_json(cls, data: Mapping) -> "Model":
        return cls.from_sets(Frame2.from_json(data), data.get("valuation", {}))

    def __hash__(self):
        return hash((self.frame, tuple(sorted(self.valuation.items()))))


def _mask(worlds) -> int:
    if isinstance(worlds, int):
        return worlds
    m = 0
    for w in worlds:
        m |= 1 << int(w)
    return m


def mask_to_set(mask: int) -> frozenset:
    return frozenset(_bits(mask))


# -- evaluation --------------------------------------------------------------

def diamond_mask(rows, target: int) -> int:
    out = 0
    for x, row in enumerate(rows):
        if row & target:
            out |= 1 << x
    return out


def box_mask(rows, target: int) -> int:
    out = 0
    for x, row in enumerate(rows):
        if row & ~target == 0:
            out |= 1 << x
    return out


def truth_mask(m: Model, f: Formula) -> int:
    """Truth set of ``f`` in ``m`` as a world bit-mask."""
    fr = m.frame
    full = fr.full
    memo = {}
    for g in subformulas(f):
        if isinstance(g, Var):
            v = m.val(g.name)
        elif isinstance(g, Top):
            v = full
        elif isinstance(g, Bot):
            v = 0
        elif isinstance(g, Not):
            v = full & ~memo[g.arg]
        elif isinstance(g, And):
            v = memo[g.left] & memo[g.right]
        elif isinstance(g, Or):
            v = memo[g.left] | memo[g.right]
        elif isinstance(g, Imp):
            v = (full & ~memo[g.left]) | memo[g.right]
        elif isinstance(g, Dia):
            v = diamond_mask(fr.rel(g.index), memo[g.arg])
        elif isinstance(g, Box):
            v = box_mask(fr.rel(g.index), memo[g.arg])
        elif isinstance(g, (TickDia, TickBox)):
            raise ValueError("tick markers must be expanded before evaluation")
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = v
    return memo[f]


def eval_model(m: Model, f: Formula) -> frozenset:
    return mask_to_set(truth_mask(m, f))


# -- frame conditions --------------------------------------------------------

class FrameCondition(str, enum.Enum):
    weakly_connected_0 = "weakly_connected_0"
    wcon_minus_0 = "wcon_minus_0"
    transitive_0 = "transitive_0"
    pseudo_transitive_1 = "pseudo_transitive_1"
    lcom = "lcom"
    rcom = "rcom"
    conf = "conf"
    one_step_rooted_1 = "one_step_rooted_1"
    symmetric_1 = "symmetric_1"
    lcom_M = "lcom_M"
    rcom_M = "rcom_M"
    conf_M = "conf_M"
    wcon_minus_M = "wcon_minus_M"

    @property
    def model_relative(self) -> bool:
        return self.value.endswith("_M")


# CLI short names
CONDITION_ALIASES = {
    "wcon0": FrameCondition.weakly_connected_0,
    "wconminus0": FrameCondition.wcon_minus_0,
    "trans0": FrameCondition.transitive_0,
    "ptrans1": FrameCondition.pseudo_transitive_1,
    "lcom": FrameCondition.lcom,
    "rcom": FrameCondition.rcom,
    "conf": FrameCondition.conf,
    "onestep1": FrameCondition.one_step_rooted_1,
    "sym1": FrameCondition.symmetric_1,
}


def condition_from_name(name: str) -> FrameCondition:
    if name in CONDITION_ALIASES:
        return CONDITION_ALIASES[name]
    return FrameCondition(name)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    witness: Optional[tuple] = None

    def __bool__(self):
        return self.ok


_OK = Verdict(True)


def _wcon(rows) -> Optional[tuple]:
    for x, row in enumerate(rows):
        for y in _bits(row):
            for z in _bits(row):
                if y < z and not (rows[y] >> z & 1) and not (rows[z] >> y & 1):
                    return (x, y, z)
    return None


def _wcon_minus(rows) -> Optional[tuple]:
    for x, row in enumerate(rows):
        for y in _bits(row):
            for z in _bits(row):
                if y < z and not (rows[y] >> z & 1) and not (rows[z] >> y & 1) \
                        and rows[y] != rows[z]:
                    return (x, y, z)
    return None


def _trans(rows) -> Optional[tuple]:
    for x, row in enumerate(rows):
        for y in _bits(row):
            missing = rows[y] & ~row
            if missing:
                return (x, y, next(_bits(missing)))
    return None


def _ptrans(rows) -> Optional[tuple]:
    for x, row in enumerate(rows):
        for y in _bits(row):
            missing = rows[y] & ~row & ~(1 << x)
            if missing:
                return (x, y, next(_bits(missing)))
    return None


def _commute_violation(a, b, c, d) -> Optional[tuple]:
    """Find x a y b z with no u such that x c u d z."""
    cd = compose(c, d)
    for x, row in enumerate(a):
        for y in _bits(row):
            missing = b[y] & ~cd[x]
            if missing:
                return (x, y, next(_bits(missing)))
    return None


def _conf(r0, r1) -> Optional[tuple]:
    for x in range(len(r0)):
        for y in _bits(r1[x]):
            for z in _bits(r0[x]):
                # need u with y R0 u and z R1 u
                if not (r0[y] & r1[z]):
                    return (x, y, z)
    return None


def _one_step_rooted(r1) -> Optional[tuple]:
    n = len(r1)
    full = (1 << n) - 1
    misses = []
    for r in range(n):
        missing = full & ~(1 << r) & ~r1[r]
        if not missing:
            return None
        misses.append(next(_bits(missing)))
    return tuple(misses)


def _sym(r1) -> Optional[tuple]:
    for x, row in enumerate(r1):
        for y in _bits(row):
            if not (r1[y] >> x & 1):
                return (x, y)
    return None


def _lcom_m(fr: Frame2, tick, root: int) -> Optional[tuple]:
    # r R̄ y R1 z -> exists u: r R1 u R̄ z
    reach = 0
    for u in _bits(fr.r1[root]):
        reach |= tick[u]
    for y in _bits(tick[root]):
        missing = fr.r1[y] & ~reach
        if missing:
            return (root, y, next(_bits(missing)))
    return None


def _rcom_m(fr: Frame2, tick, root: int) -> Optional[tuple]:
    # (x=r or r R0 x) and x R1 y R̄ z -> exists u: x R̄ u R1 z
    tr1 = compose(tick, fr.r1)
    for x in _bits(fr.r0[root] | (1 << root)):
        for y in _bits(fr.r1[x]):
            missing = tick[y] & ~tr1[x]
            if missing:
                return (x, y, next(_bits(missing)))
    return None


def _conf_m(fr: Frame2, tick, root: int) -> Optional[tuple]:
    # r R0 x R̄ z and x R1 y -> exists u: y R̄ u and z R1 u
    for x in _bits(fr.r0[root]):
        for z in _bits(tick[x]):
            for y in _bits(fr.r1[x]):
                if not (tick[y] & fr.r1[z]):
                    return (x, y, z)
    return None


def check_condition(fr: Frame2, c, ctx: Optional[tuple] = None) -> Verdict:
    """Decide a frame condition; on failure the verdict carries a witness tuple.

    Model-relative conditions need ``ctx=(model, root)``.
    """
    c = condition_from_name(c) if isinstance(c, str) else c
    if c.model_relative:
        if ctx is None:
            raise ValueError(f"{c.value} needs a (model, root) context")
        m, root = ctx
        if m.frame != fr:
            raise ValueError("context model is based on a different frame")
        tick = tick_relation(m)
        if c is FrameCondition.wcon_minus_M:
            w = _wcon_minus(tick)
        elif c is FrameCondition.lcom_M:
            w = _lcom_m(fr, tick, root)
        elif c is FrameCondition.rcom_M:
            w = _rcom_m(fr, tick, root)
        else:
            w = _conf_m(fr, tick, root)
    elif ctx is not None:
        raise ValueError(f"{c.value} is not model-relative")
    elif c is FrameCondition.weakly_connected_0:
        w = _wcon(fr.r0)
    elif c is FrameCondition.wcon_minus_0:
        w = _wcon_minus(fr.r0)
    elif c is FrameCondition.transitive_0:
        w = _trans(fr.r0)
    elif c is FrameCondition.pseudo_transitive_1:
        w = _ptrans(fr.r1)
    elif c is FrameCondition.lcom:
        w = _commute_violation(fr.r0, fr.r1, fr.r1, fr.r0)
    elif c is FrameCondition.rcom:
        w = _commute_violation(fr.r1, fr.r0, fr.r0, fr.r1)
    elif c is FrameCondition.conf:
        w = _conf(fr.r0, fr.r1)
    elif c is FrameCondition.one_step_rooted_1:
        w = _one_step_rooted(fr.r1)
    elif c is FrameCondition.symmetric_1:
        w = _sym(fr.r1)
    else:  # pragma: no cover
        raise ValueError(c)
    return _OK if w is None else Verdict(False, w)


def check_frame1(f: Frame1, c) -> Verdict:
    """Unimodal conditions on a component frame (index-0 conditions read ``r``)."""
    c = condition_from_name(c) if isinstance(c, str) else c
    fr = Frame2(f.worlds, f.r, f.r)
    if c in (FrameCondition.weakly_connected_0, FrameCondition.wcon_minus_0,
             FrameCondition.transitive_0, FrameCondition.pseudo_transitive_1,
             FrameCondition.one_step_rooted_1, FrameCondition.symmetric_1):
        return check_condition(fr, c)
    raise ValueError(f"{c.value} is not a unimodal condition")


# -- constructions -------------------------------------------------------------

def product_frame(f0: Frame1, f1: Frame1) -> Frame2:
    """Product frame; world (u, v) has index ``u * |W1| + v``."""
    n0, n1 = f0.worlds, f1.worlds
    r0, r1 = [], []
    for u in range(n0):
        for v in range(n1):
            row0 = 0
            for u2 in _bits(f0.r[u]):
                row0 |= 1 << (u2 * n1 + v)
            r0.append(row0)
            r1.append(f1.r[v] << (u * n1))
    return Frame2(n0 * n1, tuple(r0), tuple(r1))


def tick_relation(m: Model) -> tuple:
    """R̄0 of the model: x→y iff some R0-successor z of x flips t and (z=y or z R0 y)."""
    fr = m.frame
    t = m.val(TICK_VAR)
    full = fr.full
    rows = []
    for x in range(fr.worlds):
        flip = (full & ~t) if (t >> x & 1) else t
        zs = fr.r0[x] & flip
        acc = zs
        for z in _bits(zs):
            acc |= fr.r0[z]
        rows.append(acc)
    return tuple(rows)


# -- validity over all valuations -------------------------------------------

def valuation_masks(nbits: int) -> list:
    """``masks[b]`` has bit ``v`` set iff bit ``b`` of ``v`` is set, over 2**nbits valuations."""
    total = 1 << nbits
    all_ones = (1 << total) - 1
    out = []
    for b in range(nbits):
        block = 1 << b
        period = ((1 << block) - 1) << block
        out.append(all_ones // ((1 << (2 * block)) - 1) * period)
    return out


def truth_over_valuations(fr: Frame2, f: Formula, names) -> list:
    """Per-world truth of ``f`` over every valuation of ``names`` (bit-parallel).

    Valuation index ``v`` assigns variable ``names[j]`` to world ``w`` iff bit
    ``j * n + w`` of ``v`` is set.  Returns a list of ints, one per world.
    """
    n = fr.worlds
    nbits = n * len(names)
    vm = valuation_masks(nbits)
    ones = (1 << (1 << nbits)) - 1
    pos = {name: j for j, name in enumerate(names)}
    memo = {}
    for g in subformulas(f):
        if isinstance(g, Var):
            if g.name in pos:
                j = pos[g.name]
                v = [vm[j * n + w] for w in range(n)]
            else:
                v = [0] * n
        elif isinstance(g, Top):
            v = [ones] * n
        elif isinstance(g, Bot):
            v = [0] * n
        elif isinstance(g, Not):
            v = [ones ^ a for a in memo[g.arg]]
        elif isinstance(g, And):
            v = [a & b for a, b in zip(memo[g.left], memo[g.right])]
        elif isinstance(g, Or):
            v = [a | b for a, b in zip(memo[g.left], memo[g.right])]
        elif isinstance(g, Imp):
            v = [(ones ^ a) | b for a, b in zip(memo[g.left], memo[g.right])]
        elif isinstance(g, (Dia, Box)):
            rows = fr.rel(g.index)
            arg = memo[g.arg]
            v = []
            for x in range(n):
                if isinstance(g, Dia):
                    acc = 0
                    for y in _bits(rows[x]):
                        acc |= arg[y]
                else:
                    acc = ones
                    for y in _bits(rows[x]):
                        acc &= arg[y]
                v.append(acc)
        elif isinstance(g, (TickDia, TickBox)):
            raise ValueError("tick markers must be expanded before evaluation")
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = v
    return memo[f]


def decode_valuation(fr: Frame2, names, index: int) -> dict:
    n = fr.worlds
    return {name: (index >> (j * n)) & fr.full for j, name in enumerate(names)}


@dataclass(frozen=True)
class Countermodel:
    model: Model
    world: int


def frame_validates(fr: Frame2, f: Formula):
    """``True`` if ``f`` is valid in ``fr``, else a :class:`Countermodel`."""
    names = sorted(variables(f))
    if len(names) > 3 or fr.worlds > 12 or len(names) * fr.worlds > 24:
        raise SizeBoundError(
            f"valuation sweep over {len(names)} variables on {fr.worlds} worlds is too large")
    per_world = truth_over_valuations(fr, f, names)
    ones = (1 << (1 << (len(names) * fr.worlds))) - 1
    best = None
    for w, bits in enumerate(per_world):
        bad = ones & ~bits
        if bad:
            v = (bad & -bad).bit_length() - 1
            if best is None or v < best[0]:
                best = (v, w)
    if best is None:
        return True
    v, w = best
    return Countermodel(Model(fr, decode_valuation(fr, names, v)), w)


# -- p-morphisms ---------------------------------------------------------------

def is_p_morphism(src: Frame2, dst: Frame2, f) -> bool:
    if set(f) != set(range(dst.worlds)):
        return False
    for i in (0, 1):
        rs, rd = src.rel(i), dst.rel(i)
        for a in range(src.worlds):
            image = 0
            for b in _bits(rs[a]):
                image |= 1 << f[b]
            if image != rd[f[a]]:
                return False
    return True


def p_morphism_search(src: Frame2, dst: Frame2) -> Optional[tuple]:
    """A surjective p-morphism ``src -> dst`` as a tuple of images, or ``None``.

    Forth and back together say: the image of ``R_i(a)`` is exactly
    ``R_i(f(a))``.  Search assigns worlds in descending out-degree order and
    prunes on degree feasibility and on the image of fully-assigned rows.
    """
    if src.worlds > 16:
        raise SizeBoundError("p-morphism search is limited to 16 source worlds")
    n, k = src.worlds, dst.worlds
    if k > n:
        return None
    deg = [(bin(src.r0[a]).count("1"), bin(src.r1[a]).count("1")) for a in range(n)]
    ddeg = [(bin(dst.r0[d]).count("1"), bin(dst.r1[d]).count("1")) for d in range(k)]
    domains = []
    for a in range(n):
        dom = [d for d in range(k)
               if all((deg[a][i] >= ddeg[d][i]) and ((deg[a][i] == 0) == (ddeg[d][i] == 0))
                      for i in (0, 1))]
        if not dom:
            return None
        domains.append(dom)
    order = sorted(range(n), key=lambda a: (-(deg[a][0] + deg[a][1]), a))
    position = {a: i for i, a in enumerate(order)}
    # rows whose successors are all assigned once the world at index i is placed
    ready = [[] for _ in range(n)]
    for i_rel in (0, 1):
        rel = src.rel(i_rel)
        for a in range(n):
            last = max([position[a]] + [position[b] for b in _bits(rel[a])])
            ready[last].append((i_rel, a))
    assign = [-1] * n
    full_dst = (1 << k) - 1

    def consistent(i):
        for i_rel, a in ready[i]:
            rs, rd = src.rel(i_rel), dst.rel(i_rel)
            image = 0
            for b in _bits(rs[a]):
                image |= 1 << assign[b]
            if image != rd[assign[a]]:
                return False
        # forth on every assigned pair touching the new world
        a = order[i]
        for i_rel in (0, 1):
            rs, rd = src.rel(i_rel), dst.rel(i_rel)
            for b in _bits(rs[a]):
                if assign[b] >= 0 and not (rd[assign[a]] >> assign[b] & 1):
                    return False
            for j in range(i):
                b = order[j]
                if rs[b] >> a & 1 and not (rd[assign[b]] >> assign[a] & 1):
                    return False
        return True

    def go(i, covered):
        if i == n:
            return covered == full_dst
        if k - bin(covered).count("1") > n - i:
            return False
        a = order[i]
        for d in domains[a]:
            assign[a] = d
            if consistent(i) and go(i + 1, covered | (1 << d)):
                return True
        assign[a] = -1
        return False

    if go(0, 0):
        return tuple(assign)
    return None


def f_sharp() -> Frame2:
    """The two-point frame ({x,y}, x≤x≤y≤y, full relation); x=0, y=1."""
    return Frame2.from_pairs(2, [(0, 0), (0, 1), (1, 1)],
                             list(itertools.product(range(2), repeat=2)))
