"""Command-line driver.

Exit codes: 0 when every check passed, 1 when a mathematical check failed
(a counterexample, a violated condition, a non-member target), 2 on usage
errors (bad flags, unreadable or malformed input files).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .formula import (CORPUS_NAMES, FormulaSyntaxError, corpus, has_markers, parse, render,
                      tick_expand)
from .kripke import (CONDITION_ALIASES, Frame2, FrameCondition, Model, SizeBoundError, check_condition,
                     condition_from_name, eval_model)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def load_schema(name: str) -> dict:
    """One of the shipped JSON schemas, e.g. ``campaign`` or ``model``."""
    from importlib.resources import files
    return json.loads((files("modalwb") / "schemas" / f"{name}.json").read_text())


# -- inputs ---------------------------------------------------------------------------

def load_formula(src: str):
    """``corpus:NAME``, ``@path`` or an inline formula; tick markers are expanded."""
    if src.startswith("corpus:"):
        name = src[len("corpus:"):]
        if name not in CORPUS_NAMES:
            raise UsageError(f"unknown corpus formula {name!r} (known: {', '.join(CORPUS_NAMES)})")
        return name, corpus(name)
    where = "formula"
    text = src
    if src.startswith("@"):
        path = Path(src[1:])
        try:
            text = path.read_text()
        except OSError as e:
            raise UsageError(f"{path}: cannot read formula file ({e.strerror})") from None
        where = str(path)
    try:
        f = parse(text)
    except FormulaSyntaxError as e:
        line = text.count("\n", 0, e.pos) + 1
        col = e.pos - (text.rfind("\n", 0, e.pos) + 1) + 1
        raise UsageError(f"{where}: line {line}, column {col}: {e}") from None
    if has_markers(f):
        f = tick_expand(f)
    return render(f), f


def load_json(path: str):
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise UsageError(f"{p}: cannot read file ({e.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"{p}: line {e.lineno}, column {e.colno}: {e.msg}") from None


def _load(path, build):
    data = load_json(path)
    try:
        return build(data)
    except (KeyError, TypeError, ValueError) as e:
        msg = f"missing field {e}" if isinstance(e, KeyError) else str(e)
        raise UsageError(f"{path}: malformed content: {msg}") from None


def load_point(text: str):
    from .omega.region import Point
    try:
        return Point.from_json(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise UsageError(f"bad point {text!r}: {e}") from None


def _symbolic(args):
    from .omega.symbolic import SymbolicModel, builtin_witness
    if getattr(args, "model", None):
        return _load(args.model, SymbolicModel.from_json)
    try:
        return builtin_witness(args.name)
    except KeyError as e:
        raise UsageError(str(e.args[0])) from None


def _conditions(text: str):
    out = []
    for name in filter(None, (s.strip() for s in text.split(","))):
        try:
            out.append(condition_from_name(name))
        except ValueError:
            raise UsageError(f"unknown condition {name!r} "
                             f"(known: {', '.join(list(CONDITION_ALIASES) + [c.value for c in FrameCondition])})") from None
    if not out:
        raise UsageError("empty condition list")
    return out


def _positive(name):
    def conv(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from None
        if v < 0:
            raise argparse.ArgumentTypeError(f"{name} must be non-negative")
        return v
    return conv


# -- subcommands ----------------------------------------------------------------------

def cmd_eval(args):
    m = _load(args.model, Model.from_json)
    name, f = load_formula(args.formula)
    truth = sorted(eval_model(m, f))
    rep = {"kind": "eval", "formula": render(f), "worlds": m.frame.worlds, "truth_set": truth}
    return rep, True


def cmd_props(args):
    conds = _conditions(args.conditions)
    ctx = None
    if any(c.model_relative for c in conds):
        if not args.model or args.root is None:
            raise UsageError("model-relative conditions need --model and --root")
        m = _load(args.model, Model.from_json)
        fr = m.frame
        if not 0 <= args.root < fr.worlds:
            raise UsageError(f"root {args.root} is not a world of the model")
        ctx = (m, args.root)
    else:
        fr = _load(args.frame, Frame2.from_json) if args.frame else None
        if fr is None:
            raise UsageError("props needs --frame (or --model with --root)")
    verdicts = []
    for c in conds:
        v = check_condition(fr, c, ctx if c.model_relative else None)
        verdicts.append({"condition": c.value, "satisfied": v.ok,
                         "counterexample": list(v.witness) if v.witness else None})
    ok = all(v["satisfied"] for v in verdicts)
    return {"kind": "props", "worlds": fr.worlds, "verdicts": verdicts, "passed": ok}, ok


def cmd_probe(args):
    from .prober.campaign import unsat_campaign
    from .prober.classes import FrameClassSpec
    name, f = load_formula(args.formula)
    try:
        if args.product_only:
            spec = FrameClassSpec.of(*_split(args.class_), product_only=True,
                                     first=_split(args.first), second=_split(args.second))
        else:
            if not args.class_:
                raise UsageError("--class is required unless --product-only")
            spec = FrameClassSpec.of(*[c.value for c in _conditions(args.class_)])
        rep = unsat_campaign(f, spec, args.max_size, mode=args.mode, seed=args.seed,
                             samples=args.samples, min_n=args.min_size, jobs=args.jobs,
                             iso=args.iso, name=name)
    except (SizeBoundError, ValueError) as e:
        raise UsageError(str(e)) from None
    return rep.to_json(timing=args.timing), rep.passed


def _split(text):
    return tuple(filter(None, (s.strip() for s in (text or "").split(","))))


def cmd_witness(args):
    from .omega.symbolic import eval_symbolic, sample_points
    sm = _symbolic(args)
    name, f = load_formula(args.formula)
    target = load_point(args.target) if args.target else sm.target
    if target is not None and not sm.family.contains(target):
        raise UsageError(f"target {target} is not a point of {sm.family.first} x {sm.family.second}")
    points = sample_points(sm.family) + ([target] if target is not None else [])
    region, cert = eval_symbolic(sm, f, points)
    rep = {"kind": "witness", "model": sm.to_json(), "formula": render(f),
           "region": region.summary(), "least_point": _pt(region.minimal_point()),
           "target": _pt(target), "member": None if target is None else region.contains(target),
           "certificate": cert.to_json()}
    ok = cert.verify() and rep["member"] is not False
    rep["passed"] = ok
    return rep, ok


def _pt(p):
    return None if p is None else p.to_json()


def cmd_claims(args):
    from .prober.claims import CLAIMS, claim_test
    names = CLAIMS if args.claim == "all" else [args.claim]
    if any(c not in CLAIMS for c in names):
        raise UsageError(f"unknown claim {args.claim!r} (known: {', '.join(CLAIMS)}, all)")
    reports = [claim_test(c, args.samples, args.seed).to_json() for c in names]
    ok = all(r["passed"] for r in reports)
    if len(reports) == 1:
        return reports[0], ok
    return {"kind": "claims", "reports": reports, "passed": ok}, ok


def cmd_extract(args):
    from .prober.chain import ConstructionStuck, extract_chain
    sm = _symbolic(args)
    root = load_point(args.root) if args.root else sm.target
    if root is None:
        raise UsageError("--root is required for models without a target point")
    try:
        w = extract_chain(sm, root, args.kind, args.steps)
    except ConstructionStuck as e:
        return {"kind": "chain", "chain_kind": args.kind, "root": root.to_json(),
                "error": "construction_stuck", "step": e.step,
                "missing_witness": e.missing_witness, "passed": False}, False
    return w.to_json(), w.passed


def cmd_crosscheck(args):
    from .omega.truncation import crosscheck
    sm = _symbolic(args)
    name, f = load_formula(args.formula)
    rep = crosscheck(sm, f, args.window)
    return rep.to_json(), rep.passed


def cmd_verify_all(args):
    from .acceptance import run_all
    only = {int(x) for x in _split(args.only)} if args.only else None
    outcomes = []
    for o in run_all(only):
        print(o.line(), file=sys.stderr, flush=True)
        outcomes.append(o.to_json())
    ok = all(o["passed"] for o in outcomes)
    return {"kind": "verify", "criteria": outcomes, "passed": ok}, ok


# -- text rendering -------------------------------------------------------------------

def to_text(rep: dict) -> str:
    kind = rep.get("kind")
    lines = []
    if kind == "eval":
        lines.append(f"truth set: {{{', '.join(map(str, rep['truth_set']))}}}")
    elif kind == "props":
        for v in rep["verdicts"]:
            extra = "" if v["satisfied"] else f"  counterexample {tuple(v['counterexample'])}"
            lines.append(f"{v['condition']}: {'holds' if v['satisfied'] else 'fails'}{extra}")
    elif kind == "campaign":
        lines.append(f"formula: {rep['formula_name']}  mode: {rep['mode']}")
        for r in rep["records"]:
            lines.append(f"size {r['size']}: enumerated {r['frames_enumerated']}, "
                         f"in class {r['frames_in_class']}, "
                         f"satisfiable {r['satisfiable_count']}")
    elif kind == "witness":
        lines.append(f"least point: {rep['least_point']}")
        if rep["target"] is not None:
            lines.append(f"member: {'true' if rep['member'] else 'false'}")
        lines.append(f"certificate: {rep['certificate']['total_entries']} witnesses, "
                     f"verified: {'true' if rep['certificate']['verified'] else 'false'}")
    elif kind == "claim":
        lines.append(f"{rep['claim']}: checked {rep['checked']}, discarded {rep['discarded']}, "
                     f"violations {rep['violations']}")
    elif kind == "claims":
        lines.extend(to_text(r) for r in rep["reports"])
    elif kind == "chain":
        if "error" in rep:
            lines.append(f"construction stuck at step {rep['step']}: {rep['missing_witness']}")
        else:
            for s in rep["steps"]:
                lines.append(f"n={s['n']}: u={_fmt(s['points']['u'])} "
                             f"checks={'ok' if all(s['checks'].values()) else s['checks']} "
                             f"distinct={s['distinct_holds']}")
            lines.append(f"pairwise distinct: {rep['pairwise_distinct']}")
    elif kind == "crosscheck":
        lines.append(f"window {rep['window']}: {rep['definite']} definite, "
                     f"{rep['unknown']} unknown, {rep['disagreement_count']} disagreements")
    elif kind == "verify":
        for c in rep["criteria"]:
            lines.append(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['criterion']}: {c['title']}")
    if "passed" in rep:
        lines.append(f"passed: {'true' if rep['passed'] else 'false'}")
    return "\n".join(lines)


def _fmt(p):
    return f"({p['m']},{p['k']})" if isinstance(p, dict) else str(p)


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    from .prober.campaign import default_jobs
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="emit the JSON report (default: text)")
    ap = argparse.ArgumentParser(prog="modalwb", description="Bimodal Kripke workbench: finite-frame probing and symbolic omega-model checks.",
                                 parents=[common])
    sub = ap.add_subparsers(dest="command", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **kw: _add(*a, parents=[common], **kw)

    p = sub.add_parser("eval", help="truth set of a formula in a finite model")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True, help="inline text, @file, or corpus:NAME")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("props", help="check frame conditions")
    p.add_argument("--frame")
    p.add_argument("--model", help="model file, for model-relative conditions")
    p.add_argument("--root", type=_positive("--root"))
    p.add_argument("--conditions", required=True)
    p.set_defaults(run=cmd_props)

    p = sub.add_parser("probe", help="finite-frame unsatisfiability campaign")
    p.add_argument("--formula", required=True)
    p.add_argument("--class", dest="class_")
    p.add_argument("--max-size", type=_positive("--max-size"), required=True)
    p.add_argument("--min-size", type=_positive("--min-size"), default=1)
    p.add_argument("--product-only", action="store_true")
    p.add_argument("--first", help="component conditions for the first factor")
    p.add_argument("--second", help="component conditions for the second factor")
    p.add_argument("--mode", choices=("exhaustive", "random"), default="exhaustive")
    p.add_argument("--samples", type=_positive("--samples"), default=10000)
    p.add_argument("--seed", type=_positive("--seed"), default=0)
    p.add_argument("--jobs", type=_positive("--jobs"), default=default_jobs())
    p.add_argument("--iso", action="store_true", help="deduplicate up to isomorphism")
    p.add_argument("--timing", action="store_true", help="include elapsed seconds")
    p.set_defaults(run=cmd_probe)

    for cmd, helptext, fn in (("witness", "symbolic evaluation with certificate", cmd_witness),
                              ("crosscheck", "region evaluator vs truncation oracle",
                               cmd_crosscheck)):
        p = sub.add_parser(cmd, help=helptext)
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--name")
        g.add_argument("--model", help="symbolic model JSON file")
        p.add_argument("--formula", required=True)
        if cmd == "witness":
            p.add_argument("--target", help='point JSON, e.g. \'{"m":"omega","k":0}\'')
        else:
            p.add_argument("--window", type=_positive("--window"), default=30)
        p.set_defaults(run=fn)

    p = sub.add_parser("claims", help="randomised tick-relation claim tests")
    p.add_argument("--claim", required=True)
    p.add_argument("--samples", type=_positive("--samples"), default=10000)
    p.add_argument("--seed", type=_positive("--seed"), default=0)
    p.set_defaults(run=cmd_claims)

    p = sub.add_parser("extract", help="replay a chain construction")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--name")
    g.add_argument("--model")
    p.add_argument("--kind", choices=("phi", "psi"), required=True)
    p.add_argument("--steps", type=_positive("--steps"), default=25)
    p.add_argument("--root")
    p.set_defaults(run=cmd_extract)

    p = sub.add_parser("verify-all", help="run every acceptance criterion")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.set_defaults(run=cmd_verify_all)
    return ap


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        rep, ok = args.run(args)
    except UsageError as e:
        print(f"modalwb {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "json", False):
        out.write(json.dumps(rep, indent=2, sort_keys=True) + "\n")
    else:
        out.write(to_text(rep) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def main():  # pragma: no cover
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()
