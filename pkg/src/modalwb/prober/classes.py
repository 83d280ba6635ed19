"""Frame classes, vectorised condition checks, enumeration and sampling.

Batches of frames are boolean arrays of shape ``(B, n, n)`` with
``R[b, x, y]`` meaning ``x R y`` in frame ``b``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from ..kripke import (FrameCondition, Frame1, Frame2, SizeBoundError,
                      condition_from_name, product_frame)

UNARY_R0 = {FrameCondition.weakly_connected_0, FrameCondition.wcon_minus_0,
            FrameCondition.transitive_0}
UNARY_R1 = {FrameCondition.pseudo_transitive_1, FrameCondition.one_step_rooted_1,
            FrameCondition.symmetric_1}
JOINT = {FrameCondition.lcom, FrameCondition.rcom, FrameCondition.conf}
COMPONENT_CONDITIONS = {
    # unimodal conditions, read on the component relation
    "weakly_connected": FrameCondition.weakly_connected_0,
    "wcon_minus": FrameCondition.wcon_minus_0,
    "transitive": FrameCondition.transitive_0,
    "pseudo_transitive": FrameCondition.pseudo_transitive_1,
    "one_step_rooted": FrameCondition.one_step_rooted_1,
    "symmetric": FrameCondition.symmetric_1,
}


def _cond(c) -> FrameCondition:
    return condition_from_name(c) if isinstance(c, str) else c


def _component_cond(c) -> FrameCondition:
    if isinstance(c, FrameCondition):
        return c
    if c in COMPONENT_CONDITIONS:
        return COMPONENT_CONDITIONS[c]
    name = condition_from_name(c).value
    for key, val in COMPONENT_CONDITIONS.items():
        if val.value == name:
            return val
    raise ValueError(f"not a unimodal condition: {c!r}")


@dataclass(frozen=True)
class FrameClassSpec:
    conditions: frozenset = frozenset()
    product_only: bool = False
    component_conditions: tuple = (frozenset(), frozenset())

    def __post_init__(self):
        conds = frozenset(_cond(c) for c in self.conditions)
        comps = tuple(frozenset(_component_cond(c) for c in side)
                      for side in self.component_conditions)
        object.__setattr__(self, "conditions", conds)
        object.__setattr__(self, "component_conditions", comps)
        if any(c.model_relative for c in conds):
            raise ValueError("model-relative conditions cannot define a frame class")
        if not conds and not self.product_only:
            raise ValueError("a frame class needs at least one condition")
        if not self.product_only and any(comps):
            raise ValueError("component conditions only apply to product-only classes")

    @classmethod
    def of(cls, *names, product_only=False, first=(), second=()):
        return cls(frozenset(names), product_only, (frozenset(first), frozenset(second)))

    def to_json(self) -> dict:
        return {
            "conditions": sorted(c.value for c in self.conditions),
            "product_only": self.product_only,
            "component_conditions": [sorted(c.value for c in side)
                                     for side in self.component_conditions],
        }

    @classmethod
    def from_json(cls, d) -> "FrameClassSpec":
        comps = d.get("component_conditions", [[], []])
        return cls(frozenset(d.get("conditions", [])), bool(d.get("product_only", False)),
                   (frozenset(comps[0]), frozenset(comps[1])))


# -- vectorised relation algebra ------------------------------------------------

def _compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.matmul(a.astype(np.uint8), b.astype(np.uint8)) > 0


def _T(a: np.ndarray) -> np.ndarray:
    return np.swapaxes(a, -1, -2)


def _subset(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return ~np.any(a & ~b, axis=(-1, -2))


def _eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=bool)


def closure(r: np.ndarray) -> np.ndarray:
    r = r.copy()
    n = r.shape[-1]
    for k in range(n):
        r |= r[..., :, k, None] & r[..., None, k, :]
    return r


def check_r0(r0: np.ndarray, cond: FrameCondition) -> np.ndarray:
    n = r0.shape[-1]
    if cond is FrameCondition.transitive_0:
        return _subset(_compose(r0, r0), r0)
    common = _compose(_T(r0), r0)  # y, z with a common predecessor
    related = r0 | _T(r0) | _eye(n)
    if cond is FrameCondition.weakly_connected_0:
        return _subset(common, related)
    if cond is FrameCondition.wcon_minus_0:
        same_rows = np.all(r0[..., :, None, :] == r0[..., None, :, :], axis=-1)
        return _subset(common, related | same_rows)
    raise ValueError(cond)


def check_r1(r1: np.ndarray, cond: FrameCondition) -> np.ndarray:
    n = r1.shape[-1]
    if cond is FrameCondition.pseudo_transitive_1:
        return _subset(_compose(r1, r1), r1 | _eye(n))
    if cond is FrameCondition.symmetric_1:
        return ~np.any(r1 != _T(r1), axis=(-1, -2))
    if cond is FrameCondition.one_step_rooted_1:
        return np.any(np.all(r1 | _eye(n), axis=-1), axis=-1)
    raise ValueError(cond)


def joint_violations(r0: np.ndarray, r1: np.ndarray, cond: FrameCondition) -> np.ndarray:
    """Endpoint pairs whose premise holds and conclusion fails."""
    if cond is FrameCondition.lcom:
        return _compose(r0, r1) & ~_compose(r1, r0)
    if cond is FrameCondition.rcom:
        return _compose(r1, r0) & ~_compose(r0, r1)
    if cond is FrameCondition.conf:
        return _compose(_T(r1), r0) & ~_compose(r0, _T(r1))
    raise ValueError(cond)


def check_joint(r0, r1, cond) -> np.ndarray:
    return ~np.any(joint_violations(r0, r1, cond), axis=(-1, -2))


def in_class(r0: np.ndarray, r1: np.ndarray, conds) -> np.ndarray:
    ok = np.ones(r0.shape[:-2], dtype=bool)
    for c in conds:
        if c in UNARY_R0:
            ok &= check_r0(r0, c)
        elif c in UNARY_R1:
            ok &= check_r1(r1, c)
        else:
            ok &= check_joint(r0, r1, c)
    return ok


# -- exhaustive enumeration ----------------------------------------------------------

def all_relations(n: int) -> np.ndarray:
    """Every relation on ``n`` points, ordered by its bit code (bit ``x*n+y``)."""
    codes = np.arange(1 << (n * n), dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n * n)) & 1
    return bits.astype(bool).reshape(-1, n, n)


def canonical_codes(r0: np.ndarray, r1: np.ndarray) -> np.ndarray:
    """Minimal adjacency code over all ``n!`` relabellings."""
    n = r0.shape[-1]
    weights = (np.int64(1) << np.arange(2 * n * n, dtype=np.int64))
    best = None
    for perm in itertools.permutations(range(n)):
        p = list(perm)
        a = r0[:, p][:, :, p].reshape(len(r0), -1)
        b = r1[:, p][:, :, p].reshape(len(r1), -1)
        code = np.concatenate([a, b], axis=1).astype(np.int64) @ weights
        best = code if best is None else np.minimum(best, code)
    return best


def frame_codes(r0: np.ndarray, r1: np.ndarray) -> np.ndarray:
    n = r0.shape[-1]
    weights = (np.int64(1) << np.arange(2 * n * n, dtype=np.int64))
    flat = np.concatenate([r0.reshape(len(r0), -1), r1.reshape(len(r1), -1)], axis=1)
    return flat.astype(np.int64) @ weights


def r0_candidates(n: int, spec: FrameClassSpec) -> np.ndarray:
    rels = all_relations(n)
    keep = np.ones(len(rels), dtype=bool)
    for c in spec.conditions & UNARY_R0:
        keep &= check_r0(rels, c)
    return rels[keep]


def r1_candidates(n: int, spec: FrameClassSpec) -> np.ndarray:
    rels = all_relations(n)
    keep = np.ones(len(rels), dtype=bool)
    for c in spec.conditions & UNARY_R1:
        keep &= check_r1(rels, c)
    return rels[keep]


def iter_class_batches(n: int, spec: FrameClassSpec, r0_slice=None, iso=False):
    """Yield ``(r0, r1)`` batches of every in-class frame on ``n`` worlds.

    The outer loop runs over admissible ``r0`` (unary conditions already
    applied), the inner batch is every admissible ``r1`` for it.
    """
    if n > 5:
        raise SizeBoundError("exhaustive enumeration is limited to 5 worlds")
    r0s = r0_candidates(n, spec)
    r1s = r1_candidates(n, spec)
    joint = spec.conditions & JOINT
    idx = range(len(r0s)) if r0_slice is None else range(len(r0s))[r0_slice]
    for i in idx:
        a = np.broadcast_to(r0s[i], r1s.shape)
        ok = np.ones(len(r1s), dtype=bool)
        for c in joint:
            ok &= check_joint(a, r1s, c)
        b0, b1 = np.ascontiguousarray(a[ok]), r1s[ok]
        if iso and len(b0):
            keep = canonical_codes(b0, b1) == frame_codes(b0, b1)
            b0, b1 = b0[keep], b1[keep]
        if len(b0):
            yield b0, b1


def n_r0_candidates(n: int, spec: FrameClassSpec) -> int:
    return len(r0_candidates(n, spec))


def arrays_to_frame(r0: np.ndarray, r1: np.ndarray) -> Frame2:
    n = r0.shape[-1]
    pairs0 = [(int(x), int(y)) for x, y in zip(*np.nonzero(r0))]
    pairs1 = [(int(x), int(y)) for x, y in zip(*np.nonzero(r1))]
    return Frame2.from_pairs(n, pairs0, pairs1)


def frame_to_arrays(fr: Frame2):
    n = fr.worlds
    r0 = np.zeros((n, n), dtype=bool)
    r1 = np.zeros((n, n), dtype=bool)
    for x in range(n):
        for y in range(n):
            r0[x, y] = bool(fr.r0[x] >> y & 1)
            r1[x, y] = bool(fr.r1[x] >> y & 1)
    return r0, r1


def enumerate_frames(n: int, spec: FrameClassSpec, iso: bool = False) -> Iterator[Frame2]:
    """Every in-class frame on exactly ``n`` worlds, in a fixed order.

    For product-only classes, ``n`` bounds each component and the stream
    yields products of every admissible component pair.
    """
    if spec.product_only:
        for _, _, fr in iter_products(n, spec, iso=iso):
            yield fr
        return
    for b0, b1 in iter_class_batches(n, spec, iso=iso):
        for a, b in zip(b0, b1):
            yield arrays_to_frame(a, b)


# -- products ------------------------------------------------------------------

def component_frames(n: int, conds, iso=False) -> list:
    rels = all_relations(n)
    keep = np.ones(len(rels), dtype=bool)
    for c in conds:
        if c in UNARY_R0:
            keep &= check_r0(rels, c)
        else:
            keep &= check_r1(rels, c)
    rels = rels[keep]
    if iso and len(rels):
        keep = canonical_codes(rels, rels) == frame_codes(rels, rels)
        rels = rels[keep]
    out = []
    for r in rels:
        out.append(Frame1.from_pairs(n, [(int(x), int(y)) for x, y in zip(*np.nonzero(r))]))
    return out


def iter_products(max_n: int, spec: FrameClassSpec, sizes=None, iso=False):
    """Yield ``(f0, f1, product)`` for component sizes up to ``max_n``.

    ``sizes`` restricts to pairs whose larger component has one of the given sizes.
    """
    firsts = {k: component_frames(k, spec.component_conditions[0], iso)
              for k in range(1, max_n + 1)}
    seconds = {k: component_frames(k, spec.component_conditions[1], iso)
               for k in range(1, max_n + 1)}
    for k0 in range(1, max_n + 1):
        for k1 in range(1, max_n + 1):
            if sizes is not None and max(k0, k1) not in sizes:
                continue
            for f0 in firsts[k0]:
                for f1 in seconds[k1]:
                    fr = product_frame(f0, f1)
                    if _frame_in_class(fr, spec.conditions):
                        yield f0, f1, fr


def _frame_in_class(fr: Frame2, conds) -> bool:
    if not conds:
        return True
    r0, r1 = frame_to_arrays(fr)
    return bool(in_class(r0[None], r1[None], conds)[0])


# -- random sampling -------------------------------------------------------------------

def _repair_r0(r0, conds, rank):
    need_w = bool(conds & {FrameCondition.weakly_connected_0, FrameCondition.wcon_minus_0})
    need_t = FrameCondition.transitive_0 in conds
    n = r0.shape[-1]
    orient = rank[:, :, None] < rank[:, None, :]
    for _ in range(n * n + 1):
        before = r0.copy()
        if need_t:
            r0 = closure(r0)
        if need_w:
            common = _compose(_T(r0), r0)
            bad = common & ~(r0 | _T(r0) | _eye(n))
            r0 = r0 | (bad & orient)
        if np.array_equal(before, r0):
            break
    return r0


def _repair_r1_unary(r1, conds, roots):
    n = r1.shape[-1]
    if FrameCondition.one_step_rooted_1 in conds:
        b = np.arange(len(r1))
        row = ~_eye(n)[roots]
        r1[b, roots] |= row
    if FrameCondition.symmetric_1 in conds:
        r1 = r1 | _T(r1)
    if FrameCondition.pseudo_transitive_1 in conds:
        for _ in range(n * n + 1):
            extra = _compose(r1, r1) & ~_eye(n) & ~r1
            if not extra.any():
                break
            r1 = r1 | extra
    return r1


def _add_witnesses(r0, r1, joint):
    for c in joint:
        v = joint_violations(r0, r1, c)
        if c is FrameCondition.lcom:
            r1 = r1 | _compose(v, _T(r0))
        elif c is FrameCondition.rcom:
            r1 = r1 | _compose(_T(r0), v)
        else:
            r1 = r1 | _compose(_T(v), r0)
    return r1


def _remove_premises(r0, r1, conds):
    n = r1.shape[-1]
    joint = conds & JOINT
    for _ in range(2 * n * n + 2):
        drop = np.zeros_like(r1)
        for c in joint:
            v = joint_violations(r0, r1, c)
            if c is FrameCondition.lcom:
                drop |= _compose(_T(r0), v) & r1
            elif c is FrameCondition.rcom:
                drop |= _compose(v, _T(r0)) & r1
            else:
                drop |= _compose(r0, _T(v)) & r1
        if FrameCondition.pseudo_transitive_1 in conds:
            bad = _compose(r1, r1) & ~r1 & ~_eye(n)  # x..z missing: drop x->y for such y
            drop |= _compose(bad, _T(r1)) & r1
        if FrameCondition.symmetric_1 in conds:
            drop |= _T(drop)
        if not drop.any():
            break
        r1 = r1 & ~drop
    return r1


def sample_class(n: int, spec: FrameClassSpec, count: int, rng: np.random.Generator,
                 add_rounds: Optional[int] = None):
    """Draw ``count`` random frames and repair them into the class.

    Returns ``(r0, r1, ok)``; ``ok`` marks repaired frames that are in class
    (the repair can fail only for one-step-rooted classes, which are then
    rejected).
    """
    conds = spec.conditions
    r0 = rng.random((count, n, n)) < 0.5
    r1 = rng.random((count, n, n)) < 0.5
    rank = np.argsort(rng.random((count, n)), axis=1)
    r0 = _repair_r0(r0, conds, rank)
    roots = rng.integers(0, n, size=count)
    r1 = _repair_r1_unary(r1, conds, roots)
    joint = conds & JOINT
    if joint:
        rounds = rng.integers(0, 3) if add_rounds is None else add_rounds
        for _ in range(int(rounds)):
            r1 = _add_witnesses(r0, r1, joint)
            r1 = _repair_r1_unary(r1, conds, roots)
        r1 = _remove_premises(r0, r1, conds)
    ok = in_class(r0, r1, conds)
    return r0, r1, ok
