"""Bit-parallel satisfiability over every valuation of a batch of frames.

Truth values are packed as ``uint64`` words of shape ``(B, n, W)``: bit ``v``
of world ``x`` is the truth value under valuation index ``v``, where
valuation ``v`` puts variable ``j`` true at world ``w`` iff bit ``j*n + w`` of
``v`` is set (the same layout as :func:`modalwb.kripke.truth_over_valuations`).
"""
from __future__ import annotations

from collections import Counter

import numpy as np

from ..formula import (And, Bot, Box, Dia, Formula, Imp, Not, Or, TickBox, TickDia,
                       Top, Var, children, subformulas)

ALL = np.uint64(0xFFFFFFFFFFFFFFFF)
MAX_VALUATION_BITS = 24


def _word_patterns(nbits: int):
    """Per valuation bit: the packed pattern, shape ``(W,)`` of uint64."""
    total = 1 << nbits
    words = max(1, total // 64)
    out = []
    word_idx = np.arange(words, dtype=np.uint64)
    for b in range(nbits):
        if b < 6:
            block = 1 << b
            pat = 0
            for v in range(min(64, total)):
                if v >> b & 1:
                    pat |= 1 << v
            out.append(np.full(words, pat, dtype=np.uint64))
        else:
            on = ((word_idx >> np.uint64(b - 6)) & np.uint64(1)).astype(bool)
            out.append(np.where(on, ALL, np.uint64(0)))
    return out, words


def _valid_word(nbits: int) -> np.uint64:
    total = 1 << nbits
    return ALL if total >= 64 else np.uint64((1 << total) - 1)


class BatchEvaluator:
    """Evaluates one marker-free formula over batches of frames of a fixed size."""

    def __init__(self, f: Formula, n: int, names):
        self.f = f
        self.n = n
        self.names = list(names)
        self.nbits = n * len(self.names)
        if self.nbits > MAX_VALUATION_BITS:
            raise ValueError("too many valuation bits for the batch evaluator")
        self.patterns, self.words = _word_patterns(self.nbits)
        self.valid = _valid_word(self.nbits)
        self.order = subformulas(f)
        uses = Counter()
        for g in self.order:
            for c in children(g):
                uses[c] += 1
        self.uses = uses
        for g in self.order:
            if isinstance(g, (TickDia, TickBox)):
                raise ValueError("tick markers must be expanded before evaluation")

    def truth(self, r0: np.ndarray, r1: np.ndarray) -> np.ndarray:
        B, n, W = len(r0), self.n, self.words
        masks = (np.where(r0, ALL, np.uint64(0)), np.where(r1, ALL, np.uint64(0)))
        ones = np.full((B, n, W), self.valid, dtype=np.uint64)
        pos = {name: j for j, name in enumerate(self.names)}
        memo = {}
        left = Counter(self.uses)
        for g in self.order:
            if isinstance(g, Var):
                if g.name in pos:
                    j = pos[g.name]
                    pats = np.stack([self.patterns[j * n + w] for w in range(n)])
                    v = np.broadcast_to(pats & self.valid, (B, n, W))
                else:
                    v = np.zeros((B, n, W), dtype=np.uint64)
            elif isinstance(g, Top):
                v = ones
            elif isinstance(g, Bot):
                v = np.zeros((B, n, W), dtype=np.uint64)
            elif isinstance(g, Not):
                v = ones & ~memo[g.arg]
            elif isinstance(g, And):
                v = memo[g.left] & memo[g.right]
            elif isinstance(g, Or):
                v = memo[g.left] | memo[g.right]
            elif isinstance(g, Imp):
                v = (ones & ~memo[g.left]) | memo[g.right]
            elif isinstance(g, Dia):
                rel, arg = masks[g.index], memo[g.arg]
                v = np.zeros((B, n, W), dtype=np.uint64)
                for y in range(n):
                    v |= rel[:, :, y, None] & arg[:, None, y, :]
            elif isinstance(g, Box):
                rel, arg = masks[g.index], memo[g.arg]
                v = ones.copy()
                for y in range(n):
                    v &= ~rel[:, :, y, None] | arg[:, None, y, :]
            else:
                raise TypeError(f"not a formula: {g!r}")
            memo[g] = v
            for c in children(g):
                left[c] -= 1
                if left[c] == 0 and c is not g:
                    memo.pop(c, None)
        return memo[self.f]

    def first_satisfying(self, r0: np.ndarray, r1: np.ndarray):
        """Per frame: ``(world, valuation index)`` of the first satisfying pair, or -1s."""
        t = self.truth(r0, r1)
        B, n, W = t.shape
        hit = t.reshape(B, n * W) != 0
        any_hit = hit.any(axis=1)
        worlds = np.full(B, -1, dtype=np.int64)
        vals = np.full(B, -1, dtype=np.int64)
        for b in np.nonzero(any_hit)[0]:
            best = None
            for x in range(n):
                nz = np.nonzero(t[b, x])[0]
                if len(nz):
                    word = int(nz[0])
                    bits = int(t[b, x, word])
                    v = word * 64 + ((bits & -bits).bit_length() - 1)
                    if best is None or v < best[1]:
                        best = (x, v)
            worlds[b], vals[b] = best
        return any_hit, worlds, vals
