"""Command-line interface.

Every command prints one JSON report on standard output, including on
errors; diagnostics go to standard error.  Exit codes: 0 success or
positive verdict, 1 negative verdict, 2 usage, format or precondition
error, 3 budget or cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .algebra import DEFAULT_CAP, validate
from .decide import DEFAULT_BUDGET, SearchResult, bounded_countermodel, bounded_sat
from .errors import BudgetExceeded, CapExceeded, FusionError, ModalError, StrategyFailed
from .filtration import (
    DEFAULT_SEARCH_BOUND, FiltrationCertificate, Partition, bisim_coarsest,
    characteristic_formulas, check_filtration, equiv_induced, filter_with,
)
from .fusion import FusionTrace, combine, fuse_filter_many
from .kripke import load_model, model_to_json, truth_set
from .logics import LogicSpec, parse_assignments
from .syntax import FormulaSet, Var, modalities, parse_formula, parse_formula_set, to_text

OK, NEGATIVE, USAGE, BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ----------------------------------------------------------------- helpers


def _read_gamma(path: str, alphabet) -> tuple[FormulaSet, list[str]]:
    given = parse_formula_set(Path(path).read_text().splitlines(), alphabet)
    gamma = given.closure()
    added = [to_text(f) for f in gamma if f not in given]
    return gamma, added


def _specs(text: str, model_alphabet) -> list[LogicSpec]:
    try:
        return parse_assignments(text, tuple(model_alphabet))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _single_spec(specs: list[LogicSpec]) -> LogicSpec:
    return specs[0] if len(specs) == 1 else combine(specs)


def cert_sidecar(cert: FiltrationCertificate) -> dict:
    verified = {"filtration": cert.report.to_json() if cert.report else None}
    if cert.logic_check is not None:
        verified["logic"] = cert.logic_check.to_json(cert.quotient)
    verified["ok"] = cert.verified
    delta = cert.delta_note if cert.delta is None else [to_text(f) for f in cert.delta]
    return {
        "delta": delta,
        "map": {cert.source.names[x]: cert.quotient.names[b] for x, b in enumerate(cert.map)},
        "strategy": cert.strategy,
        "verified": verified,
    }


def cert_report(cert: FiltrationCertificate) -> dict:
    return {"blocks": len(cert.partition), "strict": cert.strict,
            "quotient": model_to_json(cert.quotient), "certificate": cert_sidecar(cert)}


def _trace_json(trace: FusionTrace) -> dict:
    return {
        "fresh_variables": {phi: f"p{q}" for phi, q in trace.fresh_vars.items()},
        "model_v": model_to_json(trace.model_v),
        "reducts": [model_to_json(m) for m in trace.reducts],
        "gamma_a": [to_text(f) for f in trace.gamma_a],
        "gamma_b": [to_text(f) for f in trace.gamma_b],
        "component_certificates": [cert_report(c) for c in trace.component_certs],
        "common_blocks": len(trace.common_partition),
        "refined": [model_to_json(c.quotient) for c in trace.refined],
        "merged": model_to_json(trace.merged),
        "nested": [_trace_json(t) for t in trace.nested],
    }


def _result_json(result: SearchResult) -> dict:
    out = {"verdict": result.verdict, "n_max": result.n_max,
           "frames": result.stats.get("frames"), "models": result.stats.get("models")}
    if result.sat:
        out["model"] = {**model_to_json(result.model),
                        "witness": result.model.names[result.witness], "n_max": result.n_max}
    return out


def _warn_user_specs(specs):
    for s in specs:
        if not s.builtin:
            print(f"warning: {s.name} is not a built-in logic; frame-based search is sound "
                  "only if its frame conditions characterise it", file=sys.stderr)


# ---------------------------------------------------------------- commands


def cmd_eval(args) -> tuple[int, dict]:
    model = load_model(args.model)
    f = parse_formula(args.formula, model.alphabet)
    return OK, {"formula": to_text(f), "truth_set": model.state_names(truth_set(model, f))}


def cmd_filter(args) -> tuple[int, dict]:
    model = load_model(args.model)
    gamma, added = _read_gamma(args.gamma, model.alphabet)
    spec = _single_spec(_specs(args.logic, model.alphabet))
    strategy = args.strategy
    if strategy is None and spec.strategy == "fuse":
        raise UsageError("several modalities: give --strategy or use fuse-filter")
    report = {"gamma": [to_text(f) for f in gamma], "gamma_added": added, "logic": spec.name}
    try:
        cert = filter_with(model, gamma, strategy, spec, search_bound=args.search_bound,
                           cap=args.cap, emit_witness=args.emit_witness)
    except StrategyFailed as exc:
        return NEGATIVE, {**report, "verdict": "failed", "reason": str(exc), "details": exc.report}
    report.update(verdict="filtration", **cert_report(cert))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "quotient.json").write_text(json.dumps(model_to_json(cert.quotient), indent=2) + "\n")
        (out / "certificate.json").write_text(json.dumps(cert_sidecar(cert), indent=2) + "\n")
    return OK, report


def cmd_fuse_filter(args) -> tuple[int, dict]:
    model = load_model(args.model)
    gamma, added = _read_gamma(args.gamma, model.alphabet)
    specs = _specs(args.logics, model.alphabet)
    report = {"gamma": [to_text(f) for f in gamma], "gamma_added": added,
              "logics": [s.name for s in specs]}
    try:
        cert, traces = fuse_filter_many(model, gamma, specs, search_bound=args.search_bound,
                                        cap=args.cap, emit_witness=args.emit_witness)
    except FusionError as exc:
        return NEGATIVE, {**report, "verdict": "failed", "side": exc.side,
                          "reason": str(exc), "details": exc.report}
    except StrategyFailed as exc:
        return NEGATIVE, {**report, "verdict": "failed", "reason": str(exc), "details": exc.report}
    report.update(verdict="filtration", **cert_report(cert))
    if args.trace:
        report["trace"] = [_trace_json(t) for t in traces]
    return OK, report


def cmd_check_filtration(args) -> tuple[int, dict]:
    model = load_model(args.model)
    quotient = load_model(args.quotient)
    gamma, added = _read_gamma(args.gamma, model.alphabet)
    data = json.loads(Path(args.map).read_text())
    sidecar = data if isinstance(data, dict) and "map" in data else {"map": data}
    mapping = sidecar["map"]
    if not isinstance(mapping, dict):
        raise UsageError("map must be an object from source states to quotient states")
    index = {s: i for i, s in enumerate(quotient.names)}
    missing = [s for s in model.names if s not in mapping]
    unknown = sorted({b for b in mapping.values() if b not in index})
    if missing or unknown or set(mapping) - set(model.names):
        raise UsageError(f"map does not cover the models: missing {missing}, unknown blocks {unknown}")
    class_of = tuple(index[mapping[s]] for s in model.names)
    blocks = [0] * quotient.n
    for x, b in enumerate(class_of):
        blocks[b] |= 1 << x
    report = {"gamma": [to_text(f) for f in gamma], "gamma_added": added}
    empty = [quotient.names[b] for b, blk in enumerate(blocks) if not blk]
    if empty:
        return NEGATIVE, {**report, "filtration": False,
                          "reason": f"map is not onto: {empty} have no preimage"}
    part = Partition(tuple(blocks), class_of)
    cert = FiltrationCertificate(model, gamma, None, part, quotient, "given")
    rep = check_filtration(cert)
    report.update(filtration=rep.ok, report=rep.to_json())
    delta = sidecar.get("delta")
    if isinstance(delta, list):
        delta_set = parse_formula_set(delta, model.alphabet)
        induced = equiv_induced(model, delta_set)
        report["definable"] = (all(f in delta_set for f in gamma)
                               and induced.same_blocks(Partition.from_labels(class_of)))
    return (OK if rep.ok else NEGATIVE), report


def _search(args, negate: bool) -> tuple[int, dict]:
    probe = parse_formula(args.formula)
    specs = _specs(args.logics, tuple(sorted(modalities(probe))))
    _warn_user_specs(specs)
    kw = dict(budget=args.budget, prune_isomorphic=args.prune)
    run = bounded_countermodel if negate else bounded_sat
    result = run(probe, specs, args.max_states, **kw)
    report = {"formula": to_text(probe), "logics": [s.name for s in specs], **_result_json(result)}
    if negate:
        return (NEGATIVE if result.sat else OK), report
    return (OK if result.sat else NEGATIVE), report


def cmd_sat(args):
    return _search(args, negate=False)


def cmd_valid(args):
    return _search(args, negate=True)


def cmd_algebra(args) -> tuple[int, dict]:
    model = load_model(args.model)
    axioms = parse_formula_set(Path(args.axioms).read_text().splitlines(), model.alphabet)
    v = validate(model, axioms, args.cap)
    return (OK if v.ok else NEGATIVE), v.to_json(model)


def cmd_bisim(args) -> tuple[int, dict]:
    model = load_model(args.model)
    vars = []
    for name in filter(None, (s.strip() for s in args.vars.split(","))):
        f = parse_formula(name)
        if not isinstance(f, Var):
            raise UsageError(f"{name!r} is not a variable")
        vars.append(f.index)
    part = bisim_coarsest(model, vars)
    report = {"blocks": [model.state_names(b) for b in part.blocks], "depth": part.depth,
              "witness": part.witness_note}
    if args.emit_witness:
        report["witness"] = [to_text(f) for f in characteristic_formulas(model, vars, part.depth)]
    return OK, report


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="modalfilt", description="Filtrations, fusions and bounded model search "
                                                "for modal and dynamic logics.")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="seed for any randomised step (the commands are deterministic)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help):
        return sub.add_parser(name, help=help, parents=[common])

    s = command("eval", "truth set of a formula")
    s.add_argument("model")
    s.add_argument("formula")
    s.set_defaults(run=cmd_eval)

    def filtering(s):
        s.add_argument("model")
        s.add_argument("--gamma", required=True, help="file with one formula per line")
        s.add_argument("--search-bound", type=int, default=DEFAULT_SEARCH_BOUND)
        s.add_argument("--cap", type=int, default=DEFAULT_CAP)
        s.add_argument("--emit-witness", action="store_true",
                       help="write characteristic formulas instead of a symbolic witness")

    s = command("filter", "filter a model through gamma")
    filtering(s)
    s.add_argument("--logic", required=True)
    s.add_argument("--strategy")
    s.add_argument("--out", help="directory for quotient.json and certificate.json")
    s.set_defaults(run=cmd_filter)

    s = command("fuse-filter", "filter a model of a fusion")
    filtering(s)
    s.add_argument("--logics", required=True, help="e.g. a:K5,b:S4")
    s.add_argument("--trace", action="store_true")
    s.set_defaults(run=cmd_fuse_filter)

    s = command("check-filtration", "check a given quotient and map")
    s.add_argument("model")
    s.add_argument("quotient")
    s.add_argument("map", help="JSON map, or a certificate sidecar with a 'map' key")
    s.add_argument("--gamma", required=True)
    s.set_defaults(run=cmd_check_filtration)

    for name, fn, what in (("sat", cmd_sat, "bounded satisfiability"),
                           ("valid", cmd_valid, "bounded countermodel search")):
        s = command(name, what)
        s.add_argument("formula")
        s.add_argument("--logics", required=True)
        s.add_argument("--max-states", type=int, required=True)
        s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
        s.add_argument("--prune", action="store_true", help="skip isomorphic frames")
        s.set_defaults(run=fn)

    s = command("algebra", "validate axioms in the definable algebra")
    s.add_argument("model")
    s.add_argument("--axioms", required=True)
    s.add_argument("--cap", type=int, default=DEFAULT_CAP)
    s.set_defaults(run=cmd_algebra)

    s = command("bisim", "coarsest bisimulation respecting some variables")
    s.add_argument("model")
    s.add_argument("--vars", required=True, help="e.g. p0,p1")
    s.add_argument("--emit-witness", action="store_true")
    s.set_defaults(run=cmd_bisim)
    return p


def run(argv=None) -> tuple[int, dict]:
    command = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        random.seed(args.seed)
        code, report = args.run(args)
        return code, {"command": command, **report}
    except UsageError as exc:
        return USAGE, _error(command, "usage", exc)
    except (BudgetExceeded, CapExceeded) as exc:
        extra = getattr(exc, "coverage", None) or {"reached": getattr(exc, "reached", None)}
        return BUDGET, {**_error(command, "budget", exc), "coverage": extra}
    except (ModalError, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        return USAGE, _error(command, type(exc).__name__, exc)


def _error(command, kind, exc) -> dict:
    print(f"modalfilt: {exc}", file=sys.stderr)
    return {"command": command, "error": {"kind": kind, "message": str(exc)}}


def main(argv=None) -> int:
    code, report = run(argv)
    print(json.dumps(report, indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
