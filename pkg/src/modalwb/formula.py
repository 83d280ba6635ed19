"""Bimodal formulas: AST, text grammar, derived operators and the formula corpus.

Grammar (whitespace insignificant)::

    form  := imp
    imp   := or ("->" imp)?
    or    := and ("|" and)*
    and   := unary ("&" unary)*
    unary := "~" unary | "[0]" unary | "[1]" unary | "<0>" unary | "<1>" unary
           | "<#>" unary | "[#]" unary | atom
    atom  := "true" | "false" | ident | "(" form ")"

``<#>`` and ``[#]`` are the tick-diamond / tick-box marker nodes of the
extended AST; they must be removed with :func:`tick_expand` before a formula
is handed to an evaluator.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos
        self.text = text


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Box:
    index: int
    arg: "Formula"

    def __post_init__(self):
        if self.index not in (0, 1):
            raise ValueError(f"modality index must be 0 or 1, got {self.index!r}")


@dataclass(frozen=True)
class Dia:
    index: int
    arg: "Formula"

    def __post_init__(self):
        if self.index not in (0, 1):
            raise ValueError(f"modality index must be 0 or 1, got {self.index!r}")


@dataclass(frozen=True)
class TickDia:
    """Marker for the defined operator ♦0 (tick diamond over variable ``t``)."""
    arg: "Formula"


@dataclass(frozen=True)
class TickBox:
    """Marker for ■0, the dual of ♦0."""
    arg: "Formula"


Formula = Union[Var, Top, Bot, Not, And, Or, Imp, Box, Dia, TickDia, TickBox]

TOP = Top()
BOT = Bot()
TICK_VAR = "t"

_UNARY = (Not, Box, Dia, TickDia, TickBox)
_BINARY = (And, Or, Imp)


def children(f: Formula) -> tuple:
    if isinstance(f, _BINARY):
        return (f.left, f.right)
    if isinstance(f, _UNARY):
        return (f.arg,)
    return ()


def subformulas(f: Formula) -> list:
    """Distinct subformulas of ``f``, children before parents."""
    seen = set()
    order = []
    stack = [(f, False)]
    while stack:
        g, expanded = stack.pop()
        if g in seen:
            continue
        if expanded:
            seen.add(g)
            order.append(g)
            continue
        stack.append((g, True))
        for c in reversed(children(g)):
            if c not in seen:
                stack.append((c, False))
    return order


def variables(f: Formula) -> frozenset:
    return frozenset(g.name for g in subformulas(f) if isinstance(g, Var))


def has_markers(f: Formula) -> bool:
    return any(isinstance(g, (TickDia, TickBox)) for g in subformulas(f))


# -- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<op>->|\[0\]|\[1\]|<0>|<1>|<#>|\[#\]|[~&|()])|(?P<ident>[a-z][a-z0-9_]*))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start("op") if m.group("op") else m.start("ident")
        tokens.append((m.group("op") or m.group("ident"), start))
        pos = m.end()
    tokens.append(("<eof>", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, msg):
        raise FormulaSyntaxError(msg, self.tokens[self.i][1], self.text)

    def parse(self) -> Formula:
        f = self.imp()
        if self.peek() != "<eof>":
            self.error(f"unexpected token {self.peek()!r}")
        return f

    def imp(self):
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return Imp(left, self.imp())
        return left

    def disj(self):
        f = self.conj()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self):
        tok = self.peek()
        if tok == "~":
            self.take()
            return Not(self.unary())
        if tok in ("[0]", "[1]"):
            self.take()
            return Box(int(tok[1]), self.unary())
        if tok in ("<0>", "<1>"):
            self.take()
            return Dia(int(tok[1]), self.unary())
        if tok == "<#>":
            self.take()
            return TickDia(self.unary())
        if tok == "[#]":
            self.take()
            return TickBox(self.unary())
        return self.atom()

    def atom(self):
        tok, _ = self.tokens[self.i]
        if tok == "(":
            self.take()
            f = self.imp()
            if self.peek() != ")":
                self.error("expected ')'")
            self.take()
            return f
        if tok == "true":
            self.take()
            return TOP
        if tok == "false":
            self.take()
            return BOT
        if tok == "<eof>":
            self.error("unexpected end of input")
        if re.fullmatch(r"[a-z][a-z0-9_]*", tok):
            self.take()
            return Var(tok)
        self.error(f"unexpected token {tok!r}")


def parse(text: str) -> Formula:
    """Parse formula text; raises :class:`FormulaSyntaxError` with a position."""
    return _Parser(text).parse()


# -- rendering -------------------------------------------------------------

_PREC_IMP, _PREC_OR, _PREC_AND, _PREC_UNARY, _PREC_ATOM = range(1, 6)


def _prec(f: Formula) -> int:
    if isinstance(f, Imp):
        return _PREC_IMP
    if isinstance(f, Or):
        return _PREC_OR
    if isinstance(f, And):
        return _PREC_AND
    if isinstance(f, _UNARY):
        return _PREC_UNARY
    return _PREC_ATOM


def _wrap(f: Formula, need: int) -> str:
    s = render(f)
    return f"({s})" if _prec(f) < need else s


def render(f: Formula) -> str:
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, Not):
        return "~" + _wrap(f.arg, _PREC_UNARY)
    if isinstance(f, Box):
        return f"[{f.index}]" + _wrap(f.arg, _PREC_UNARY)
    if isinstance(f, Dia):
        return f"<{f.index}>" + _wrap(f.arg, _PREC_UNARY)
    if isinstance(f, TickDia):
        return "<#>" + _wrap(f.arg, _PREC_UNARY)
    if isinstance(f, TickBox):
        return "[#]" + _wrap(f.arg, _PREC_UNARY)
    if isinstance(f, And):
        return f"{_wrap(f.left, _PREC_AND)} & {_wrap(f.right, _PREC_AND + 1)}"
    if isinstance(f, Or):
        return f"{_wrap(f.left, _PREC_OR)} | {_wrap(f.right, _PREC_OR + 1)}"
    if isinstance(f, Imp):
        return f"{_wrap(f.left, _PREC_IMP + 1)} -> {_wrap(f.right, _PREC_IMP)}"
    raise TypeError(f"not a formula: {f!r}")


# -- measures and derived operators -----------------------------------------

def modal_depth(f: Formula) -> tuple:
    """(index-0 depth, index-1 depth); a tick marker counts as two index-0 layers."""
    memo = {}
    for g in subformulas(f):
        kids = [memo[c] for c in children(g)]
        d0 = max((k[0] for k in kids), default=0)
        d1 = max((k[1] for k in kids), default=0)
        if isinstance(g, (Box, Dia)):
            if g.index == 0:
                d0 += 1
            else:
                d1 += 1
        elif isinstance(g, (TickDia, TickBox)):
            d0 += 2
        memo[g] = (d0, d1)
    return memo[f]


def neg(f: Formula) -> Formula:
    """Negation that folds the constants."""
    if isinstance(f, Top):
        return BOT
    if isinstance(f, Bot):
        return TOP
    return Not(f)


def conj(*fs: Formula) -> Formula:
    out = fs[0]
    for g in fs[1:]:
        out = And(out, g)
    return out


def dia_n(i: int, n: int, f: Formula) -> Formula:
    for _ in range(n):
        f = Dia(i, f)
    return f


def box_n(i: int, n: int, f: Formula) -> Formula:
    for _ in range(n):
        f = Box(i, f)
    return f


def diamond_exactly(n: int, f: Formula) -> Formula:
    """``f`` is reachable in exactly ``n`` index-0 steps and not in ``n+1``."""
    return And(dia_n(0, n, f), box_n(0, n + 1, neg(f)))


def box_plus(i: int, f: Formula) -> Formula:
    return And(f, Box(i, f))


def chi_formula(n: int) -> Formula:
    p, q = Var("p"), Var("q")
    f = Box(1, Not(q))
    for _ in range(n):
        f = Dia(1, And(q, Dia(0, And(p, f))))
    return f


def _tick_dia(psi: Formula) -> Formula:
    t = Var(TICK_VAR)
    step = Or(psi, Dia(0, psi))
    return And(Imp(t, Dia(0, And(Not(t), step))),
               Imp(Not(t), Dia(0, And(t, step))))


def tick_expand(f: Formula) -> Formula:
    """Eliminate ♦0/■0 markers, innermost first."""
    memo = {}
    for g in subformulas(f):
        if isinstance(g, TickDia):
            memo[g] = _tick_dia(memo[g.arg])
        elif isinstance(g, TickBox):
            memo[g] = Not(_tick_dia(neg(memo[g.arg])))
        elif isinstance(g, _BINARY):
            memo[g] = type(g)(memo[g.left], memo[g.right])
        elif isinstance(g, (Box, Dia)):
            memo[g] = type(g)(g.index, memo[g.arg])
        elif isinstance(g, Not):
            memo[g] = Not(memo[g.arg])
        else:
            memo[g] = g
    return memo[f]


def bulletize(f: Formula) -> Formula:
    """Replace every index-0 modality by the corresponding tick marker."""
    memo = {}
    for g in subformulas(f):
        if isinstance(g, Dia) and g.index == 0:
            memo[g] = TickDia(memo[g.arg])
        elif isinstance(g, Box) and g.index == 0:
            memo[g] = TickBox(memo[g.arg])
        elif isinstance(g, _BINARY):
            memo[g] = type(g)(memo[g.left], memo[g.right])
        elif isinstance(g, (Box, Dia)):
            memo[g] = type(g)(g.index, memo[g.arg])
        elif isinstance(g, (Not, TickDia, TickBox)):
            memo[g] = type(g)(memo[g.arg])
        else:
            memo[g] = g
    return memo[f]


# -- corpus ------------------------------------------------------------------

def _p():
    return Var("p")


def _q():
    return Var("q")


def _once_exactly(f: Formula) -> Formula:
    # ◇0 f ∧ □0□0 ¬f
    return diamond_exactly(1, f)


def _phi_parts():
    p = _p()
    init = Dia(1, Dia(0, And(p, Box(0, BOT))))
    hgen = Box(1, Imp(Dia(0, p), Dia(0, _once_exactly(p))))
    vgen = Box(0, Imp(Dia(1, _once_exactly(p)),
                      Dia(1, conj(p, Box(0, Not(p)), Box(0, Box(0, Not(p)))))))
    return [init, hgen, vgen]


def _tick_guard():
    t = Var(TICK_VAR)
    g = Imp(Or(t, Dia(1, t)), And(t, Box(1, t)))
    return And(g, Box(0, g))


def _psi_parts():
    p, q = _p(), _q()
    init = Dia(0, conj(p, Not(q), Box(0, Not(q)), Box(1, Not(q))))
    hgen = box_plus(1, Dia(0, And(q, Box(1, Not(q)))))
    vgen = box_plus(1, Box(0, Imp(q, Dia(1, conj(p, Not(q), Box(0, Not(q)), Dia(1, q))))))
    puniq = box_plus(1, Box(0, Box(0, Imp(p, Box(0, Not(p))))))
    return [init, hgen, vgen, puniq]


def _commut():
    p = _p()
    return [Imp(Box(1, Box(0, p)), Box(0, Box(1, p))),
            Imp(Box(0, Box(1, p)), Box(1, Box(0, p))),
            Imp(Dia(0, Box(1, p)), Box(1, Dia(0, p)))]


def corpus_conjuncts(name: str) -> list:
    """Top-level conjuncts of a corpus formula, in display order."""
    p = _p()
    if name in ("commut0", "commut1", "commut2"):
        return [_commut()[int(name[-1])]]
    if name == "fasc":
        return [box_plus(0, Dia(1, p)),
                box_plus(0, Box(1, Imp(p, Dia(0, box_plus(0, Not(p))))))]
    if name == "fdesc":
        return [Dia(1, Dia(0, p)),
                Box(1, Imp(Dia(0, p), Dia(0, Dia(0, p)))),
                Box(1, Box(0, Imp(p, Box(0, Not(p))))),
                Box(0, Dia(1, p))]
    if name == "phi_inf":
        return _phi_parts()
    if name == "tick_guard":
        return [_tick_guard()]
    if name == "phi_inf_bullet":
        return [_tick_guard()] + [tick_expand(bulletize(g)) for g in _phi_parts()]
    if name == "psi_inf":
        return _psi_parts()
    raise KeyError(f"unknown corpus formula {name!r}")


CORPUS_NAMES = ("commut0", "commut1", "commut2", "fasc", "fdesc", "phi_inf",
                "phi_inf_bullet", "psi_inf", "tick_guard")


def corpus(name: str) -> Formula:
    return conj(*corpus_conjuncts(name))


def iter_corpus() -> Iterator[tuple]:
    for name in CORPUS_NAMES:
        yield name, corpus(name)


def random_formula(rng, depth: int = 4, names=("p", "q", "r"), markers: bool = False) -> Formula:
    """A random AST of at most ``depth`` levels; ``rng`` is a :class:`random.Random`."""
    if depth <= 0 or rng.random() < 0.2:
        pick = rng.randrange(len(names) + 2)
        if pick == len(names):
            return TOP
        if pick == len(names) + 1:
            return BOT
        return Var(names[pick])
    kinds = ["not", "and", "or", "imp", "box", "dia"] + (["tdia", "tbox"] if markers else [])
    kind = rng.choice(kinds)
    sub = lambda: random_formula(rng, depth - 1, names, markers)  # noqa: E731
    if kind == "not":
        return Not(sub())
    if kind in ("and", "or", "imp"):
        return {"and": And, "or": Or, "imp": Imp}[kind](sub(), sub())
    if kind == "box":
        return Box(rng.randrange(2), sub())
    if kind == "dia":
        return Dia(rng.randrange(2), sub())
    return (TickDia if kind == "tdia" else TickBox)(sub())
