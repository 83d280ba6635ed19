"""Finite-model search campaigns over frame classes."""
from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..formula import Formula, has_markers, render, variables
from ..kripke import (Frame2, Model, SizeBoundError, decode_valuation, truth_mask,
                      truth_over_valuations)
from .batch import BatchEvaluator
from .classes import (FrameClassSpec, arrays_to_frame, frame_codes, frame_to_arrays,
                      iter_class_batches, iter_products, n_r0_candidates, sample_class)

RANDOM_BATCH = 20000


def frame_satisfiable(fr: Frame2, f: Formula, exhaustive_bound: bool = True):
    """``(model, world)`` satisfying ``f`` on ``fr``, or ``None`` after sweeping all valuations."""
    names = sorted(variables(f))
    if exhaustive_bound and (len(names) > 2 or fr.worlds > 8):
        raise SizeBoundError("frame_satisfiable sweeps at most 2 variables on 8 worlds")
    per_world = truth_over_valuations(fr, f, names)
    best = None
    for w, bits in enumerate(per_world):
        if bits:
            v = (bits & -bits).bit_length() - 1
            if best is None or v < best[0]:
                best = (v, w)
    if best is None:
        return None
    v, w = best
    m = Model(fr, decode_valuation(fr, names, v))
    assert truth_mask(m, f) >> w & 1, "valuation sweep disagrees with eval_model"
    return m, w


@dataclass
class SizeRecord:
    size: int
    frames_enumerated: int = 0
    frames_in_class: int = 0
    satisfiable_count: int = 0
    counterexample: Optional[dict] = None
    distinct_in_class: Optional[int] = None

    def to_json(self) -> dict:
        d = {"size": self.size, "frames_enumerated": self.frames_enumerated,
             "frames_in_class": self.frames_in_class,
             "satisfiable_count": self.satisfiable_count,
             "counterexample": self.counterexample}
        if self.distinct_in_class is not None:
            d["distinct_in_class"] = self.distinct_in_class
        return d


@dataclass
class CampaignReport:
    formula_name: str
    formula: str
    class_spec: FrameClassSpec
    mode: str
    records: list = field(default_factory=list)
    seed: Optional[int] = None
    samples: Optional[int] = None
    elapsed: float = 0.0

    @property
    def satisfiable_total(self) -> int:
        return sum(r.satisfiable_count for r in self.records)

    @property
    def passed(self) -> bool:
        return self.satisfiable_total == 0

    def to_json(self, timing: bool = True) -> dict:
        d = {"kind": "campaign", "formula_name": self.formula_name, "formula": self.formula,
             "class_spec": self.class_spec.to_json(), "mode": self.mode,
             "seed": self.seed, "samples": self.samples,
             "records": [r.to_json() for r in self.records],
             "passed": self.passed}
        if timing:
            d["elapsed"] = round(self.elapsed, 3)
        return d


def _counterexample(r0, r1, world, val, names, f) -> dict:
    fr = arrays_to_frame(r0, r1)
    m = Model(fr, decode_valuation(fr, names, int(val)))
    verified = bool(truth_mask(m, f) >> int(world) & 1)
    d = m.to_json()
    d["world"] = int(world)
    d["verified"] = verified
    return d


def _scan_batch(ev: BatchEvaluator, r0, r1, names, f, rec: SizeRecord):
    rec.frames_in_class += len(r0)
    hit, worlds, vals = ev.first_satisfying(r0, r1)
    k = int(hit.sum())
    if k:
        rec.satisfiable_count += k
        if rec.counterexample is None:
            b = int(np.nonzero(hit)[0][0])
            rec.counterexample = _counterexample(r0[b], r1[b], worlds[b], vals[b], names, f)


def _exhaustive_part(args):
    f, names, n, spec, part, parts, iso = args
    ev = BatchEvaluator(f, n, names)
    rec = SizeRecord(n)
    total = n_r0_candidates(n, spec)
    lo, hi = part * total // parts, (part + 1) * total // parts
    for b0, b1 in iter_class_batches(n, spec, r0_slice=slice(lo, hi), iso=iso):
        _scan_batch(ev, b0, b1, names, f, rec)
    return rec


def _random_part(args):
    f, names, n, spec, seed, batch_index, count = args
    rng = np.random.default_rng(np.random.SeedSequence([seed, n, batch_index]))
    r0, r1, ok = sample_class(n, spec, count, rng)
    rec = SizeRecord(n, frames_enumerated=count)
    r0, r1 = r0[ok], r1[ok]
    ev = BatchEvaluator(f, n, names)
    _scan_batch(ev, r0, r1, names, f, rec)
    codes = set(frame_codes(r0, r1).tolist()) if len(r0) else set()
    return rec, codes


def _merge(records, size) -> SizeRecord:
    out = SizeRecord(size)
    for r in records:
        out.frames_enumerated += r.frames_enumerated
        out.frames_in_class += r.frames_in_class
        out.satisfiable_count += r.satisfiable_count
        if out.counterexample is None and r.counterexample is not None:
            out.counterexample = r.counterexample
    return out


def _map(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("MODALWB_JOBS", "1")))
    except ValueError:
        return 1


def unsat_campaign(f: Formula, spec: FrameClassSpec, max_n: int, mode: str = "exhaustive",
                   seed: int = 0, samples: int = 10000, min_n: int = 1,
                   jobs: Optional[int] = None, iso: bool = False,
                   name: Optional[str] = None) -> CampaignReport:
    """Search every (or randomly sampled) in-class frame of sizes ``min_n..max_n``.

    In product-only classes the size is the larger component size.  A
    satisfiable in-class frame is recorded with a re-verified counterexample.
    """
    if has_markers(f):
        raise ValueError("expand tick markers before running a campaign")
    jobs = default_jobs() if jobs is None else jobs
    names = sorted(variables(f))
    if mode == "exhaustive":
        limit = 5 if iso else 3
        if not spec.product_only and max_n > limit:
            raise SizeBoundError(f"exhaustive mode is limited to {limit} worlds")
        if spec.product_only and max_n > 3:
            raise SizeBoundError("exhaustive product mode is limited to components of 3 worlds")
    elif mode != "random":
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "random" and spec.product_only:
        raise ValueError("random mode samples general frames; use exhaustive for products")
    report = CampaignReport(name or render(f), render(f), spec, mode,
                            seed=seed if mode == "random" else None,
                            samples=samples if mode == "random" else None)
    start = time.perf_counter()
    for n in range(min_n, max_n + 1):
        if spec.product_only:
            report.records.append(_product_size(f, names, n, spec, iso))
        elif mode == "exhaustive":
            parts = max(1, jobs)
            recs = _map(_exhaustive_part, [(f, names, n, spec, i, parts, iso)
                                           for i in range(parts)], jobs)
            rec = _merge(recs, n)
            rec.frames_enumerated = 1 << (2 * n * n)
            report.records.append(rec)
        else:
            tasks, left, i = [], samples, 0
            while left > 0:
                c = min(RANDOM_BATCH, left)
                tasks.append((f, names, n, spec, seed, i, c))
                left -= c
                i += 1
            results = _map(_random_part, tasks, jobs)
            rec = _merge([r for r, _ in results], n)
            codes = set()
            for _, c in results:
                codes |= c
            rec.distinct_in_class = len(codes)
            report.records.append(rec)
    report.elapsed = time.perf_counter() - start
    return report


def _product_size(f, names, size, spec, iso) -> SizeRecord:
    rec = SizeRecord(size)
    groups = {}
    for f0, f1, fr in iter_products(size, spec, sizes={size}, iso=iso):
        groups.setdefault(fr.worlds, []).append(fr)
    rec.frames_enumerated = _component_pairs(size)
    for n in sorted(groups):
        frames = groups[n]
        ev = BatchEvaluator(f, n, names)
        step = max(1, 200000 // max(1, n * ev.words * 8))
        for i in range(0, len(frames), step):
            chunk = frames[i:i + step]
            arrs = [frame_to_arrays(fr) for fr in chunk]
            r0 = np.stack([a for a, _ in arrs])
            r1 = np.stack([b for _, b in arrs])
            _scan_batch(ev, r0, r1, names, f, rec)
    return rec


def _component_pairs(size: int) -> int:
    total = 0
    for k0 in range(1, size + 1):
        for k1 in range(1, size + 1):
            if max(k0, k1) == size:
                total += (1 << (k0 * k0)) * (1 << (k1 * k1))
    return total
