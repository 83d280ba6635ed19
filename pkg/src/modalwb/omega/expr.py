"""RegionExpr: the JSON vocabulary for regions.

An expression is ``{"op": "or"|"and"|"not", "args": [...]}`` over atoms such as
``{"atom": "m_eq_k_plus", "d": 1}``.  Atoms are read with the ordinal
convention at ``m = ω``: ``m_ge_c`` and ``m_gt_k_plus`` hold there (for a
column ``k``), ``m_eq_c``, ``m_even`` and ``m_eq_k_plus`` do not.
"""
from __future__ import annotations

from .region import OMEGA, ROOT, Family, Point, Region, code1, reps1, reps2

ATOMS = {
    "m_eq_omega": (),
    "m_ge_c": ("c",),
    "m_eq_c": ("c",),
    "m_even": (),
    "k_root": (),
    "k_eq_c": ("c",),
    "k_ge_c": ("c",),
    "k_even": (),
    "m_eq_k_plus": ("d",),
    "m_gt_k_plus": ("d",),
}


class ExprError(ValueError):
    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{message} (at {path})")
        self.path = path


def atom(name: str, **params) -> dict:
    d = {"atom": name}
    d.update(params)
    return d


def and_(*args) -> dict:
    return {"op": "and", "args": list(args)}


def or_(*args) -> dict:
    return {"op": "or", "args": list(args)}


def not_(arg) -> dict:
    return {"op": "not", "args": [arg]}


def validate(expr, path: str = "$"):
    if not isinstance(expr, dict):
        raise ExprError("expected an object", path)
    if "atom" in expr:
        name = expr["atom"]
        if name not in ATOMS:
            raise ExprError(f"unknown atom {name!r}", path)
        for key in ATOMS[name]:
            val = expr.get(key)
            if not isinstance(val, int) or isinstance(val, bool):
                raise ExprError(f"atom {name} needs integer {key!r}", path)
            if key == "c" and val < 0:
                raise ExprError(f"atom {name} needs a natural constant", path)
        return
    op = expr.get("op")
    args = expr.get("args")
    if op not in ("and", "or", "not") or not isinstance(args, list):
        raise ExprError("expected an atom or an and/or/not node", path)
    if op == "not" and len(args) != 1:
        raise ExprError("'not' takes exactly one argument", path)
    for i, a in enumerate(args):
        validate(a, f"{path}.args[{i}]")


def eval_atom(a: dict, m, k) -> bool:
    name = a["atom"]
    fin_m = m != OMEGA
    col = k != ROOT
    if name == "m_eq_omega":
        return not fin_m
    if name == "m_ge_c":
        return (not fin_m) or m >= a["c"]
    if name == "m_eq_c":
        return fin_m and m == a["c"]
    if name == "m_even":
        return fin_m and m % 2 == 0
    if name == "k_root":
        return not col
    if name == "k_eq_c":
        return col and k == a["c"]
    if name == "k_ge_c":
        return col and k >= a["c"]
    if name == "k_even":
        return col and k % 2 == 0
    if name == "m_eq_k_plus":
        return fin_m and col and m == k + a["d"]
    if name == "m_gt_k_plus":
        return col and ((not fin_m) or m > k + a["d"])
    raise ExprError(f"unknown atom {name!r}")


def eval_expr(expr: dict, p) -> bool:
    """Truth of an expression at a single point, straight from the atom semantics."""
    m, k = p
    if "atom" in expr:
        return eval_atom(expr, m, k)
    op, args = expr["op"], expr["args"]
    if op == "and":
        return all(eval_expr(a, p) for a in args)
    if op == "or":
        return any(eval_expr(a, p) for a in args)
    return not eval_expr(args[0], p)


def threshold(expr: dict) -> int:
    if "atom" in expr:
        if "c" in expr:
            return expr["c"] + 1
        if "d" in expr:
            return abs(expr["d"]) + 1
        return 1
    return max([threshold(a) for a in expr["args"]], default=1)


def to_region(expr: dict, family: Family) -> Region:
    validate(expr)
    T = threshold(expr)
    return Region.from_predicates(
        family, T,
        lambda: eval_expr(expr, (OMEGA, ROOT)),
        lambda m: eval_expr(expr, (m, ROOT)),
        lambda k: eval_expr(expr, (OMEGA, k)),
        lambda m, k: eval_expr(expr, (m, k)),
    ).normalize()


def _coord_literals(var: str, x: int, T: int) -> list:
    eq, ge, even = f"{var}_eq_c", f"{var}_ge_c", f"{var}_even"
    if x < T:
        return [atom(eq, c=x)]
    lits = [atom(ge, c=T)]
    lits.append(atom(even) if x % 2 == 0 else not_(atom(even)))
    return lits


def region_to_expr(r: Region) -> dict:
    """Exact DNF export: one cell of literals per T-type in the region."""
    T = r.T
    cells = []
    if r.a:
        cells.append(and_(atom("m_eq_omega"), atom("k_root")))
    r1 = reps1(T)
    for i, x in enumerate(r1):
        if r.b[i]:
            cells.append(and_(atom("k_root"), not_(atom("m_eq_omega")),
                              *_coord_literals("m", int(x), T)))
    for i, x in enumerate(r1):
        if r.c[i]:
            cells.append(and_(atom("m_eq_omega"), not_(atom("k_root")),
                              *_coord_literals("k", int(x), T)))
    rm, rk, _ = reps2(T)
    for i in r.d.nonzero()[0]:
        m, k = int(rm[i]), int(rk[i])
        lits = [not_(atom("m_eq_omega")), not_(atom("k_root"))]
        lits += _coord_literals("m", m, T) + _coord_literals("k", k, T)
        d = m - k
        if d >= T:
            lits.append(atom("m_gt_k_plus", d=T - 1))
        elif d <= -T:
            lits.append(not_(atom("m_gt_k_plus", d=-T)))
        else:
            lits.append(atom("m_eq_k_plus", d=d))
        cells.append(and_(*lits))
    return or_(*cells)
