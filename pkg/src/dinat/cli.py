"""The ``dinat`` command line tool.

Exit codes partition failures: 1 parse, 2 check/verification, 3 I/O,
4 model validation.  ``--format json`` switches reports to line-delimited
JSON records; output is deterministic for fixed inputs and seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import kernel as K
from .errors import (
    CheckError,
    DinatError,
    EnumerationBound,
    EvalError,
    ModelError,
    ParseError,
    SoundnessBug,
)
from .files import load_model, parse_derivation_file
from .finsem import (
    Evaluator,
    Family,
    SeqSem,
    check_dinatural,
    enumerate_dinaturals,
    eval_derivation,
    eval_eq_obligation,
    families_equal,
    max_set_size_default,
    search_composition_failure,
)
from .syntax import FEnd, FImp, SignatureTable, formula_to_str

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_CHECK = 2
EXIT_IO = 3
EXIT_MODEL = 4


class Report:
    def __init__(self, as_json: bool):
        self.as_json = as_json
        self.lines: list = []

    def emit(self, kind: str, **fields) -> None:
        self.lines.append((kind, fields))

    def render(self) -> str:
        out = []
        for kind, fields in self.lines:
            if self.as_json:
                out.append(json.dumps({"kind": kind, **fields}, sort_keys=True))
            else:
                body = "  ".join(f"{k}={v}" for k, v in fields.items())
                out.append(f"[{kind}] {body}")
        return "\n".join(out)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        print(f"error: cannot read {path}: {e}", file=sys.stderr)
        sys.exit(EXIT_IO)


def _load_derivation_file(path: str):
    try:
        return parse_derivation_file(_read(path))
    except ParseError as e:
        print(f"{path}:{e}", file=sys.stderr)
        sys.exit(EXIT_PARSE)


def _load_model_file(path: str):
    try:
        return load_model(_read(path))
    except ModelError as e:
        print(f"{path}: {e}", file=sys.stderr)
        sys.exit(EXIT_MODEL)


def _load_models_dir(path: str):
    p = Path(path)
    if not p.is_dir():
        print(f"error: {path} is not a directory", file=sys.stderr)
        sys.exit(EXIT_IO)
    models = []
    for f in sorted(p.glob("*.json")) + sorted(p.glob("*.model")):
        models.append(_load_model_file(str(f)))
    if not models:
        print(f"error: no model files in {path}", file=sys.stderr)
        sys.exit(EXIT_IO)
    return models


def cmd_check(args) -> int:
    df = _load_derivation_file(args.file)
    report = Report(args.format == "json")
    status = EXIT_OK
    for name, d in df.derivations.items():
        try:
            concl = K.check_derivation(d, df.sig)
            report.emit("check", derivation=name, status="ok",
                        conclusion=str(concl))
        except CheckError as e:
            report.emit("check", derivation=name, status="fail", error=str(e))
            status = EXIT_CHECK
    for name, (strat, judgement) in df.obligations.items():
        try:
            obls = K.check_eq_judgement(judgement, df.sig, strat)
            report.emit("obligation", name=name, status="ok",
                        remaining=len(obls))
        except CheckError as e:
            report.emit("obligation", name=name, status="fail", error=str(e))
            status = EXIT_CHECK
    print(report.render())
    return status


def cmd_eval(args) -> int:
    df = _load_derivation_file(args.file)
    model = _load_model_file(args.model)
    report = Report(args.format == "json")
    at = tuple(args.at.split(",")) if args.at else None
    names = [args.derivation] if args.derivation else list(df.derivations)
    status = EXIT_OK
    for name in names:
        if name not in df.derivations:
            print(f"error: no derivation named {name!r}", file=sys.stderr)
            return EXIT_CHECK
        d = df.derivations[name]
        try:
            K.check_derivation(d, df.sig)
        except CheckError as e:
            report.emit("eval", derivation=name, status="check-fail",
                        error=str(e))
            status = EXIT_CHECK
            continue
        try:
            fam = eval_derivation(d, model, df.sig,
                                  max_set_size=args.max_size)
            dinat = "PASS"
        except SoundnessBug as e:
            report.emit("eval", derivation=name, status="hexagon-fail",
                        error=str(e))
            status = EXIT_CHECK
            continue
        except (EvalError, EnumerationBound) as e:
            report.emit("eval", derivation=name, status="eval-fail",
                        error=str(e))
            status = EXIT_MODEL
            continue
        for idx in sorted(fam.table, key=lambda i: str(i)):
            if at is not None and idx != at:
                continue
            for ins, out in fam.table[idx].items():
                report.emit("table", derivation=name, at=str(idx),
                            inputs=str(ins), output=str(out))
        report.emit("eval", derivation=name, status="ok", dinaturality=dinat)
    print(report.render())
    return status


INVERTIBLE_ROOTS = (
    K.J, K.JInv, K.Curry, K.Uncurry, K.EndIntro, K.EndElim,
    K.CoendIntro, K.CoendElim, K.Pair,
)


def _roundtrip_inverse(sig, d):
    """The inverse rule application for an invertible root, if any."""
    match d:
        case K.J(source=a, target=b, fresh=z, eq=e):
            return K.mk_jinv(sig, d, a, b, z, e)
        case K.JInv(source=a, target=b, fresh=z, eq=e):
            return K.mk_j(sig, d, a, b, z, e)
        case K.Curry(label=lb):
            pos = d.sub.concl.hyp_index(lb)
            return K.mk_uncurry(sig, d, lb, pos)
        case K.Uncurry(label=lb):
            return K.mk_curry(sig, d, lb)
        case K.EndIntro(var=v):
            pos = d.sub.concl.ctx_index(v)
            return K.mk_end_elim(sig, d, v, pos)
        case K.EndElim(var=v, pos=pos):
            return K.mk_end_intro(sig, d, v)
        case K.CoendIntro(var=v, label=lb):
            pos = d.sub.concl.ctx_index(v)
            return K.mk_coend_elim(sig, d, v, lb, pos)
        case K.CoendElim(var=v, label=lb):
            return K.mk_coend_intro(sig, d, v, lb)
    return None


def cmd_verify(args) -> int:
    df = _load_derivation_file(args.file)
    models = _load_models_dir(args.models)
    report = Report(args.format == "json")
    status = EXIT_OK
    bound = args.max_size if args.max_size else 2000

    def note(check, model, ok, detail=""):
        nonlocal status
        report.emit("verify", check=check, model=model,
                    status="PASS" if ok else "FAIL", detail=detail)
        if not ok:
            status = EXIT_CHECK

    for name, d in df.derivations.items():
        try:
            K.check_derivation(d, df.sig)
        except CheckError as e:
            note(f"{name}:check", "-", False, str(e))
            continue
        for model in models:
            try:
                fam = eval_derivation(d, model, df.sig)
                note(f"{name}:hexagon", model.name, True)
            except SoundnessBug as e:
                note(f"{name}:hexagon", model.name, False, str(e))
                continue
            except (EvalError, EnumerationBound) as e:
                note(f"{name}:eval", model.name, True, f"skipped: {e}")
                continue
            inv = _roundtrip_inverse(df.sig, d)
            if inv is not None:
                try:
                    back = eval_derivation(inv, model, df.sig)
                    sub_fam = eval_derivation(d.subderivations()[0], model, df.sig)
                    ok = families_equal(back, Family(back.seq, sub_fam.table))
                    note(f"{name}:roundtrip", model.name, ok)
                except (EvalError, EnumerationBound) as e:
                    note(f"{name}:roundtrip", model.name, True, f"skipped: {e}")
            if args.enumerate and inv is not None:
                ok, detail = _enumerated_roundtrips(df.sig, d, model, bound)
                note(f"{name}:roundtrip-enumerated", model.name, ok, detail)
            if args.enumerate and len(d.concl.ctx) == 1 and len(d.concl.hyps) == 1:
                ok, detail = _dinat_end_cardinality(df.sig, d, model, bound)
                note(f"{name}:entailments-as-end", model.name, ok, detail)
    for name, (strat, judgement) in df.obligations.items():
        try:
            obls = K.check_eq_judgement(judgement, df.sig, strat)
        except CheckError as e:
            note(f"{name}:obligation", "-", False, str(e))
            continue
        for model in models:
            try:
                ok = all(eval_eq_obligation(o, model, df.sig) for o in obls)
                note(f"{name}:obligation", model.name, ok)
            except (EvalError, EnumerationBound) as e:
                note(f"{name}:obligation", model.name, True, f"skipped: {e}")
    if args.seed is not None:
        hit = corpus_mod.find_composition_witness(
            range(args.seed, args.seed + 25))
        detail = f"witness at seed {hit[0]}" if hit else "no witness in 25 models"
        report.emit("verify", check="composition-failure-probe", model="random",
                    status="INFO", detail=detail)
    print(report.render())
    return status


def _enumerated_roundtrips(sig, d, model, bound):
    premise = d.subderivations()[0].concl
    ev = Evaluator(model, sig)
    try:
        fams = enumerate_dinaturals(SeqSem(ev, premise), bound)
    except EnumerationBound as e:
        return True, f"skipped: {e}"
    for i, fam in enumerate(fams):
        asm = K.mk_assume(sig, "@rt", premise)
        node = type(d)(**{**{f.name: getattr(d, f.name)
                             for f in d.__dataclass_fields__.values()},
                          "sub" if hasattr(d, "sub") else "main": asm})
        try:
            fwd = eval_derivation(node, model, sig, assumptions={"@rt": fam})
            inv = _roundtrip_inverse(sig, node)
            back = eval_derivation(inv, model, sig, assumptions={"@rt": fam})
        except (EvalError, EnumerationBound) as e:
            return True, f"skipped: {e}"
        if not families_equal(back, Family(back.seq, fam.table)):
            return False, f"family {i} does not round-trip"
    return True, f"{len(fams)} families"


def _dinat_end_cardinality(sig, d, model, bound):
    seq = d.concl
    (var, cat), = seq.ctx
    _, hyp = seq.hyps[0]
    endf = FEnd(var, cat, FImp(hyp, seq.goal))
    ev = Evaluator(model, sig)
    try:
        fams = enumerate_dinaturals(SeqSem(ev, seq), bound)
        endset = ev.eval(endf, {}, {})
    except EnumerationBound as e:
        return True, f"skipped: {e}"
    return len(fams) == len(endset), f"entailments {len(fams)}, end {len(endset)}"


def cmd_corpus(args) -> int:
    report = Report(args.format == "json")
    suite = corpus_mod.model_suite()
    if args.models:
        for model in _load_models_dir(args.models):
            suite.append(corpus_mod.SuiteModel(
                model, corpus_mod._stock_atoms(model)))
    results = corpus_mod.run_corpus(suite)
    results.sort(key=lambda r: (r.entry, r.model, r.check))
    status = EXIT_OK
    for r in results:
        report.emit("corpus", entry=r.entry, model=r.model, check=r.check,
                    status="PASS" if r.passed else "FAIL", detail=r.detail)
        if not r.passed:
            status = EXIT_CHECK
    ok = sum(1 for r in results if r.passed)
    report.emit("summary", total=len(results), passed=ok,
                failed=len(results) - ok)
    print(report.render())
    return status


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="dinat",
        description="Check and evaluate directed-equality derivations on "
                    "finite models.",
    )
    ap.add_argument("--format", choices=["human", "json"], default="human")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check derivations in a file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("eval", help="evaluate derivations on a model")
    p.add_argument("file")
    p.add_argument("--model", required=True)
    p.add_argument("--at", help="context point, comma-separated objects")
    p.add_argument("--derivation", help="evaluate a single derivation")
    p.add_argument("--max-size", type=int, default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("verify", help="run property batteries over models")
    p.add_argument("file")
    p.add_argument("--models", required=True)
    p.add_argument("--max-size", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--enumerate", action="store_true")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("corpus", help="run the built-in corpus")
    p.add_argument("--models", help="extra models directory")
    p.set_defaults(fn=cmd_corpus)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except DinatError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
