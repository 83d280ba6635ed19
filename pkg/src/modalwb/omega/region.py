"""Definable point sets of finitely-presented infinite product frames.

Points are pairs ``(m, k)`` with ``m`` a natural number or ``OMEGA`` and ``k``
a natural number (column) or ``ROOT``.  The point space splits into four
sorts::

    A  (ω, root)      B  (m, root)      C  (ω, k)      D  (m, k)

Every atom of the region vocabulary (``m=c``, ``m≥c``, ``EVEN(m)``, ``k=c``,
``k≥c``, ``EVEN(k)``, ``m=k+d``, ``m>k+d``, ``m=ω``, ``k=root``) with constants
below a threshold ``T`` only sees the *T-type* of a point: exact values below
``T``, parity above, and the difference ``m-k`` clipped to ``±T``.  A
:class:`Region` is therefore stored exactly as the set of T-types it
contains, one table per sort.  Boolean operations are table operations after
refining both sides to a common threshold; modal preimages are computed by
bounded search from one representative per type, which is exact because
every type of successor appears within a computable distance.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional, Union

import numpy as np

OMEGA = "omega"
ROOT = "root"

FIRST_FAMILIES = ("omega1_desc", "omega1_desc_refl", "omega_asc", "omega_asc_refl")
SECOND_FAMILIES = ("onestep", "universal", "difference")


class ClosureError(AssertionError):
    """The region algebra failed to represent a result exactly."""


class Point(NamedTuple):
    m: Union[int, str]
    k: Union[int, str]

    def to_json(self) -> dict:
        return {"m": self.m, "k": self.k}

    @classmethod
    def from_json(cls, d) -> "Point":
        m, k = d["m"], d["k"]
        if m != OMEGA:
            m = int(m)
            if m < 0:
                raise ValueError("m must be a natural number or 'omega'")
        if k != ROOT:
            k = int(k)
            if k < 0:
                raise ValueError("k must be a natural number or 'root'")
        return cls(m, k)

    def sort_key(self):
        return (self.m == OMEGA, 0 if self.m == OMEGA else self.m,
                self.k != ROOT, -1 if self.k == ROOT else self.k)

    def __str__(self):
        m = "ω" if self.m == OMEGA else str(self.m)
        k = "r" if self.k == ROOT else f"y{self.k}"
        return f"({m},{k})"


@dataclass(frozen=True)
class Family:
    first: str
    second: str

    def __post_init__(self):
        if self.first not in FIRST_FAMILIES:
            raise ValueError(f"unknown first family {self.first!r}")
        if self.second not in SECOND_FAMILIES:
            raise ValueError(f"unknown second family {self.second!r}")

    @property
    def has_omega(self) -> bool:
        return self.first.startswith("omega1")

    @property
    def has_root(self) -> bool:
        return self.second == "onestep"

    @property
    def descending(self) -> bool:
        return self.first.startswith("omega1")

    @property
    def reflexive0(self) -> bool:
        return self.first.endswith("_refl")

    def contains(self, p: Point) -> bool:
        return (p.m != OMEGA or self.has_omega) and (p.k != ROOT or self.has_root)

    def rel0(self, m, m2) -> bool:
        """First-component relation on ``m`` values (ω the top of the descending families)."""
        if m == m2:
            return self.reflexive0
        if self.descending:
            return m == OMEGA or (m2 != OMEGA and m > m2)
        return m2 > m

    def rel1(self, k, k2) -> bool:
        if self.second == "onestep":
            return k == ROOT and k2 != ROOT
        if self.second == "universal":
            return True
        return k != k2

    def related(self, a: Point, index: int, b: Point) -> bool:
        if not (self.contains(a) and self.contains(b)):
            return False
        if index == 0:
            return a.k == b.k and self.rel0(a.m, b.m)
        return a.m == b.m and self.rel1(a.k, b.k)

    def to_json(self) -> dict:
        return {"first": self.first, "second": self.second}


# -- T-types ---------------------------------------------------------------------

def code1(T: int, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    return np.where(x < T, x, T + (x & 1))


def ncodes1(T: int) -> int:
    return T + 2


def code2(T: int, m: np.ndarray, k: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=np.int64)
    k = np.asarray(k, dtype=np.int64)
    mh = code1(T, m)
    kh = code1(T, k)
    d = m - k
    dh = np.where(d <= -T, 0, np.where(d >= T, 2 * T, d + T))
    return (mh * (T + 2) + kh) * (2 * T + 1) + dh


def ncodes2(T: int) -> int:
    return (T + 2) * (T + 2) * (2 * T + 1)


def window2(T: int) -> int:
    return 3 * T + 4


@lru_cache(maxsize=None)
def reps1(T: int) -> np.ndarray:
    """Representative of each 1-D type (least member)."""
    xs = np.arange(T + 2)
    out = np.full(ncodes1(T), -1, dtype=np.int64)
    c = code1(T, xs)
    for x, cc in zip(xs[::-1], c[::-1]):
        out[cc] = x
    assert (out >= 0).all()
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def reps2(T: int):
    """Lexicographically least point of each realisable 2-D type, and the realisable mask."""
    W = window2(T)
    m, k = np.meshgrid(np.arange(W), np.arange(W), indexing="ij")
    m, k = m.ravel(), k.ravel()
    c = code2(T, m, k)
    rm = np.full(ncodes2(T), -1, dtype=np.int64)
    rk = np.full(ncodes2(T), -1, dtype=np.int64)
    # points are in lexicographic order, so first occurrence is the least point
    uniq, first = np.unique(c, return_index=True)
    rm[uniq] = m[first]
    rk[uniq] = k[first]
    real = rm >= 0
    # every type realised below the window is realised inside it
    W2 = W + 6
    m2, k2 = np.meshgrid(np.arange(W2), np.arange(W2), indexing="ij")
    if not real[code2(T, m2.ravel(), k2.ravel())].all():
        raise ClosureError(f"type window too small for T={T}")
    for arr in (rm, rk, real):
        arr.setflags(write=False)
    return rm, rk, real


# -- regions ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Region:
    """A set of points as per-sort T-type tables.

    ``a``: (ω, root); ``b``: (m, root) by 1-D type of m; ``c``: (ω, k) by 1-D
    type of k; ``d``: (m, k) by 2-D type.
    """
    family: Family
    T: int
    a: bool
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        fam = self.family
        b, c, d = self.b, self.c, self.d
        if not fam.has_root:
            b = np.zeros_like(b)
        if not fam.has_omega:
            c = np.zeros_like(c)
        d = d & reps2(self.T)[2]
        for arr in (b, c, d):
            arr.setflags(write=False)
        object.__setattr__(self, "a", bool(self.a) and fam.has_root and fam.has_omega)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    # construction --------------------------------------------------------------
    @classmethod
    def empty(cls, family: Family, T: int = 1) -> "Region":
        return cls(family, T, False, np.zeros(ncodes1(T), bool), np.zeros(ncodes1(T), bool),
                   np.zeros(ncodes2(T), bool))

    @classmethod
    def universe(cls, family: Family, T: int = 1) -> "Region":
        return cls(family, T, True, np.ones(ncodes1(T), bool), np.ones(ncodes1(T), bool),
                   np.ones(ncodes2(T), bool))

    @classmethod
    def from_predicates(cls, family: Family, T: int, pa, pb, pc, pd) -> "Region":
        """Tabulate scalar predicates at type representatives (they must be T-determined)."""
        T = max(1, T)
        r1 = reps1(T)
        rm, rk, real = reps2(T)
        b = np.array([bool(pb(int(x))) for x in r1])
        c = np.array([bool(pc(int(x))) for x in r1])
        d = np.zeros(ncodes2(T), bool)
        for i in np.nonzero(real)[0]:
            d[i] = bool(pd(int(rm[i]), int(rk[i])))
        return cls(family, T, bool(pa()), b, c, d)

    @classmethod
    def point(cls, family: Family, p: Point) -> "Region":
        m, k = p
        T = 1 + max([x for x in (m, k) if isinstance(x, int)], default=0)
        if m == OMEGA and k == ROOT:
            return cls.from_predicates(family, T, lambda: True, lambda x: False,
                                       lambda x: False, lambda x, y: False)
        if k == ROOT:
            return cls.from_predicates(family, T, lambda: False, lambda x: x == m,
                                       lambda x: False, lambda x, y: False)
        if m == OMEGA:
            return cls.from_predicates(family, T, lambda: False, lambda x: False,
                                       lambda x: x == k, lambda x, y: False)
        return cls.from_predicates(family, T, lambda: False, lambda x: False,
                                   lambda x: False, lambda x, y: x == m and y == k)

    # refinement ------------------------------------------------------------------
    def refine(self, T: int) -> "Region":
        """The same set tabulated at a threshold ``T >= self.T``."""
        if T == self.T:
            return self
        if T < self.T:
            raise ValueError("refine only increases the threshold")
        r1 = reps1(T)
        rm, rk, real = reps2(T)
        b = self.b[code1(self.T, r1)]
        c = self.c[code1(self.T, r1)]
        d = np.zeros(ncodes2(T), bool)
        d[real] = self.d[code2(self.T, rm[real], rk[real])]
        return Region(self.family, T, self.a, b, c, d)

    def is_regular(self, T: int) -> bool:
        """Whether membership is already determined by T-types (``T <= self.T``)."""
        r1 = reps1(self.T)
        s1 = reps1(T)
        if not np.array_equal(self.b, self.b[code1(self.T, s1[code1(T, r1)])]):
            return False
        if not np.array_equal(self.c, self.c[code1(self.T, s1[code1(T, r1)])]):
            return False
        rm, rk, real = reps2(self.T)
        sm, sk, _ = reps2(T)
        cc = code2(T, rm[real], rk[real])
        folded = self.d[code2(self.T, sm[cc], sk[cc])]
        return bool(np.array_equal(self.d[real], folded))

    def normalize(self) -> "Region":
        """Re-tabulate at the least threshold that determines the set."""
        for T in range(1, self.T):
            if self.is_regular(T):
                return self.coarsen(T)
        return self

    def coarsen(self, T: int) -> "Region":
        r1 = reps1(T)
        rm, rk, real = reps2(T)
        b = self.b[code1(self.T, r1)]
        c = self.c[code1(self.T, r1)]
        d = np.zeros(ncodes2(T), bool)
        d[real] = self.d[code2(self.T, rm[real], rk[real])]
        return Region(self.family, T, self.a, b, c, d)

    # Boolean algebra -----------------------------------------------------------------
    def _align(self, other: "Region"):
        if self.family != other.family:
            raise ValueError("regions over different frame families")
        T = max(self.T, other.T)
        return self.refine(T), other.refine(T)

    def __or__(self, other: "Region") -> "Region":
        x, y = self._align(other)
        return Region(x.family, x.T, x.a or y.a, x.b | y.b, x.c | y.c, x.d | y.d).normalize()

    def __and__(self, other: "Region") -> "Region":
        x, y = self._align(other)
        return Region(x.family, x.T, x.a and y.a, x.b & y.b, x.c & y.c, x.d & y.d).normalize()

    def __invert__(self) -> "Region":
        return Region(self.family, self.T, not self.a, ~self.b, ~self.c, ~self.d)

    def __sub__(self, other: "Region") -> "Region":
        return self & ~other

    def same_set(self, other: "Region") -> bool:
        x, y = self._align(other)
        return (x.a == y.a and np.array_equal(x.b, y.b) and np.array_equal(x.c, y.c)
                and np.array_equal(x.d, y.d))

    # queries ---------------------------------------------------------------------------
    def contains(self, p) -> bool:
        if not isinstance(p, Point):
            p = Point(*p)
        if not self.family.contains(p):
            return False
        m, k = p
        if m == OMEGA and k == ROOT:
            return self.a
        if k == ROOT:
            return bool(self.b[code1(self.T, m)])
        if m == OMEGA:
            return bool(self.c[code1(self.T, k)])
        return bool(self.d[code2(self.T, m, k)])

    __contains__ = contains

    def contains_many(self, ms: np.ndarray, ks: np.ndarray) -> np.ndarray:
        """Membership of finite points (m, k) with non-root k, vectorised."""
        return self.d[code2(self.T, ms, ks)]

    def is_empty(self) -> bool:
        return not (self.a or self.b.any() or self.c.any() or self.d.any())

    def minimal_point(self) -> Optional[Point]:
        """Least member: least m (ω last), then least k (root before 0)."""
        if self.is_empty():
            return None
        W = window2(self.T) + 2
        for m in range(W):
            if self.family.has_root and self.b[code1(self.T, m)]:
                return Point(m, ROOT)
            ks = np.arange(m + self.T + 3)
            hit = self.d[code2(self.T, np.full_like(ks, m), ks)]
            if hit.any():
                return Point(m, int(np.argmax(hit)))
        if self.a:
            return Point(OMEGA, ROOT)
        ks = np.arange(self.T + 3)
        hit = self.c[code1(self.T, ks)]
        if hit.any():
            return Point(OMEGA, int(np.argmax(hit)))
        raise ClosureError("non-empty region without a member in its window")

    def summary(self) -> dict:
        return {"threshold": self.T, "omega_root": self.a,
                "root_types": int(self.b.sum()), "omega_row_types": int(self.c.sum()),
                "finite_types": int(self.d.sum())}


def region_combine(op: str, a: Region, b: Optional[Region] = None) -> Region:
    if op == "union":
        return a | b
    if op == "intersect":
        return a & b
    if op == "complement":
        if b is not None:
            raise ValueError("complement takes one region")
        return ~a
    raise ValueError(f"unknown region operation {op!r}")


def region_empty(a: Region):
    """``(True, None)`` if empty, else ``(False, least member)``."""
    p = a.minimal_point()
    return (p is None, p)


# -- modal preimages ----------------------------------------------------------------

def _search_bound(T: int, coord) -> int:
    return int(np.max(coord, initial=0)) + T + 5


def _pre_values(t: Region, index: int, sort: str, xm: np.ndarray, xk: np.ndarray) -> np.ndarray:
    """Whether each listed point of a sort has an ``index``-successor in ``t``.

    ``xm``/``xk`` hold the finite coordinates of the points (unused ones are 0).
    """
    fam, T = t.family, t.T
    n = len(xm)
    out = np.zeros(n, bool)
    if n == 0:
        return out
    if index == 0:
        L = _search_bound(T, np.concatenate([xm, xk]))
        cand = np.arange(L)[None, :]
        if sort in ("B", "D"):
            if fam.descending:
                valid = cand <= xm[:, None] if fam.reflexive0 else cand < xm[:, None]
            else:
                valid = cand >= xm[:, None] if fam.reflexive0 else cand > xm[:, None]
            if sort == "B":
                vals = t.b[code1(T, np.broadcast_to(cand, valid.shape))]
            else:
                vals = t.d[code2(T, np.broadcast_to(cand, valid.shape),
                                 np.broadcast_to(xk[:, None], valid.shape))]
            out = np.any(vals & valid, axis=1)
        elif sort == "C":
            # finite predecessors of ω in column k, plus ω itself if reflexive
            vals = t.d[code2(T, np.broadcast_to(cand, (n, L)),
                             np.broadcast_to(xk[:, None], (n, L)))]
            out = np.any(vals, axis=1)
            if fam.reflexive0:
                out |= t.c[code1(T, xk)]
        else:  # A
            out[:] = bool(t.b.any()) or (fam.reflexive0 and t.a)
        return out
    # index 1: m fixed, k moves
    second = fam.second
    L = _search_bound(T, np.concatenate([xm, xk]))
    cand = np.arange(L)[None, :]
    if sort == "D":
        if second == "onestep":
            return out
        vals = t.d[code2(T, np.broadcast_to(xm[:, None], (n, L)), np.broadcast_to(cand, (n, L)))]
        if second == "difference":
            vals = vals & (cand != xk[:, None])
        return np.any(vals, axis=1)
    if sort == "C":
        if second == "onestep":
            return out
        vals = np.broadcast_to(t.c[code1(T, cand[0])], (n, L))
        if second == "difference":
            vals = vals & (cand != xk[:, None])
        return np.any(vals, axis=1)
    if sort == "B":  # onestep root: any column at the same height
        vals = t.d[code2(T, np.broadcast_to(xm[:, None], (n, L)), np.broadcast_to(cand, (n, L)))]
        return np.any(vals, axis=1)
    out[:] = bool(t.c.any())  # A, onestep root at ω
    return out


def preimage(t: Region, index: int, family: Optional[Family] = None, verify: bool = True) -> Region:
    """Points with an ``index``-successor in ``t``."""
    fam = t.family if family is None else family
    if fam != t.family:
        raise ValueError("region and family disagree")
    if index not in (0, 1):
        raise ValueError("modality index must be 0 or 1")
    T2 = t.T + 2
    r1 = reps1(T2)
    rm, rk, real = reps2(T2)
    zeros1 = np.zeros_like(r1)
    b = _pre_values(t, index, "B", r1, zeros1) if fam.has_root else np.zeros(len(r1), bool)
    c = _pre_values(t, index, "C", zeros1, r1) if fam.has_omega else np.zeros(len(r1), bool)
    d = np.zeros(ncodes2(T2), bool)
    d[real] = _pre_values(t, index, "D", rm[real], rk[real])
    a = bool(_pre_values(t, index, "A", np.zeros(1, np.int64), np.zeros(1, np.int64))[0]) \
        if (fam.has_root and fam.has_omega) else False
    out = Region(fam, T2, a, b, c, d)
    if verify:
        _verify_preimage(t, index, out)
    return out.normalize()


def _verify_preimage(t: Region, index: int, out: Region):
    """Brute-force the preimage on a window beyond the representatives and compare."""
    fam = t.family
    W = window2(out.T) + 4
    xs = np.arange(W)
    m, k = np.meshgrid(xs, xs, indexing="ij")
    m, k = m.ravel(), k.ravel()
    got = _pre_values(t, index, "D", m, k)
    if not np.array_equal(got, out.d[code2(out.T, m, k)]):
        raise ClosureError("preimage is not determined by its threshold (finite sort)")
    if fam.has_root:
        got = _pre_values(t, index, "B", xs, np.zeros_like(xs))
        if not np.array_equal(got, out.b[code1(out.T, xs)]):
            raise ClosureError("preimage is not determined by its threshold (root column)")
    if fam.has_omega:
        got = _pre_values(t, index, "C", np.zeros_like(xs), xs)
        if not np.array_equal(got, out.c[code1(out.T, xs)]):
            raise ClosureError("preimage is not determined by its threshold (ω row)")


def successors_upto(family: Family, p: Point, index: int, bound: int):
    """Successors of ``p`` in lexicographic order, finite coordinates below ``bound``."""
    m, k = p
    if index == 0:
        ms = [x for x in range(bound) if family.rel0(m, x)]
        if m == OMEGA and family.rel0(OMEGA, OMEGA):
            ms.append(OMEGA)
        for x in ms:
            yield Point(x, k)
    else:
        ks = [x for x in range(bound) if family.rel1(k, x)]
        for x in ks:
            yield Point(m, x)


def witness_point(t: Region, p: Point, index: int) -> Optional[Point]:
    """Least ``index``-successor of ``p`` inside ``t``, or ``None``.

    Exact: for a fixed point every T-type of successor occurs below
    ``max(coords) + T + 5``.
    """
    fam = t.family
    if not fam.contains(p):
        raise ValueError(f"{p} is not a point of the frame")
    coords = [x for x in p if isinstance(x, int)]
    bound = max(coords, default=0) + t.T + 5
    for q in successors_upto(fam, p, index, bound):
        if t.contains(q):
            return q
    return None
