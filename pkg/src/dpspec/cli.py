"""Command-line front end: ``dpspec <subcommand> ...``.

Exit status is 0 on success, 1 when ``verify`` finds a violation, and 2 on
usage, file or schema errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from dpspec.accountant import BudgetLedger, allocate, compose, ledger_from_document, ledger_to_document
from dpspec.core import DpSpecification, spec_from_document
from dpspec.errors import DpSpecError, SchemaError
from dpspec.exact import format_value, is_inf
from dpspec.five_safes import PresetKind, assess, attach_dp, preset, regime_from_document
from dpspec.invariants import partition_by_invariant, statistic_from_document
from dpspec.mechanisms import kernel_from_file
from dpspec.verifier import satisfies, tightest_epsilon


class InputError(Exception):
    """A problem with one input file; the message names the file."""


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: invalid JSON: {exc.msg}") from None


def _load(path: str, parse):
    doc = _read_json(path)
    try:
        return parse(doc)
    except SchemaError as exc:
        raise InputError(f"{path}: {exc}") from None
    except DpSpecError as exc:
        raise InputError(f"{path}: $: {exc}") from None


def _eps_doc(value) -> dict:
    if is_inf(value):
        return {"exact": "inf", "decimal": None}
    return {"exact": str(value), "decimal": f"{float(value):.6f}"}


def _witness_doc(w):
    if w is None:
        return None
    return {"universe": w.universe, "x": w.x, "x_prime": w.x_prime, "lhs": format_value(w.lhs), "rhs": format_value(w.rhs)}


def _load_spec(path: str, require_budget: bool = True):
    return _load(path, lambda d: spec_from_document(d, require_budget=require_budget))


def _load_mechanism(path: str):
    return _load(path, kernel_from_file)


def _verify(mech_path: str, spec_path: str):
    spec = _load_spec(spec_path)
    mech = _load_mechanism(mech_path)
    try:
        return spec, satisfies(mech, spec)
    except DpSpecError as exc:
        raise InputError(f"{mech_path}: $: {exc}") from None


def cmd_verify(args) -> tuple[dict, str, int]:
    _, result = _verify(args.mechanism, args.spec)
    doc = {
        "command": "verify",
        "satisfied": result.satisfied,
        "fingerprint": result.fingerprint,
        "epsilon": {u: _eps_doc(v) for u, v in result.per_universe_tightest.items()},
        "witness": _witness_doc(result.witness),
        "notes": list(result.notes),
    }
    lines = ["satisfied" if result.satisfied else "not satisfied"]
    if result.witness:
        lines.append("witness: " + result.witness.describe())
    lines += [f"tightest {u}: {format_value(v)}" for u, v in result.per_universe_tightest.items()]
    lines += [f"note: {n}" for n in result.notes]
    return doc, "\n".join(lines) + "\n", 0 if result.satisfied else 1


def cmd_epsilon(args):
    flavor = _load_spec(args.spec_sans_budget, require_budget=False)
    if isinstance(flavor, DpSpecification):
        flavor = flavor.flavor
    mech = _load_mechanism(args.mechanism)
    try:
        eps = tightest_epsilon(mech, flavor)
    except DpSpecError as exc:
        raise InputError(f"{args.mechanism}: $: {exc}") from None
    doc = {"command": "epsilon", "fingerprint": flavor.fingerprint(), "epsilon": {u: _eps_doc(v) for u, v in eps.items()}}
    if len(eps) == 1:
        text = format_value(next(iter(eps.values())))
    else:
        text = "\n".join(f"{u}: {format_value(v)}" for u, v in eps.items())
    return doc, text + "\n", 0


def cmd_compose(args):
    if args.ledger:
        ledger = _load(args.ledger, ledger_from_document)
    else:
        first = _load_spec(args.spec[0])
        ledger = BudgetLedger.open(first)
    labels = args.label or []
    for i, path in enumerate(args.spec):
        spec = _load_spec(path)
        label = labels[i] if i < len(labels) else Path(path).stem
        try:
            ledger = compose(ledger, label, spec)
        except DpSpecError as exc:
            raise InputError(f"{path}: $: {exc}") from None
    ldoc = ledger_to_document(ledger)
    text = "\n".join(
        [f"{label}: " + ", ".join(f"{u}={format_value(v)}" for u, v in b.items()) for label, b in ledger.entries]
        + ["total: " + ", ".join(f"{u}={format_value(v)}" for u, v in ledger.total.items())]
    )
    return {"command": "compose", "fingerprint": ledger.fingerprint, "ledger": ldoc}, text + "\n", 0


def _parse_weight(text: str):
    name, sep, weight = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"weights look like NAME=W, got {text!r}")
    return name, weight


def cmd_allocate(args):
    if args.ledger:
        total = _load(args.ledger, ledger_from_document).total
    else:
        total = _load_spec(args.spec).budget
    try:
        shares = allocate(total, args.weight)
    except (DpSpecError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"--weight: {exc}") from None
    doc = {
        "command": "allocate",
        "allocation": [{"project": label, "budget": {u: _eps_doc(v) for u, v in b.items()}} for label, b in shares],
    }
    text = "\n".join(f"{label}: " + ", ".join(f"{u}={format_value(v)}" for u, v in b.items()) for label, b in shares)
    return doc, text + "\n", 0


def cmd_universes(args):
    spec = _load_spec(args.spec, require_budget=False)
    stat = _load(args.statistic, lambda d: statistic_from_document(d, spec.domain))
    mv = partition_by_invariant(spec.domain, stat)
    doc = {
        "command": "universes",
        "universes": [
            {"id": u.id, "members": list(u.member_ids), "datasets": [list(spec.domain[i]) for i in u.member_ids]}
            for u in mv
        ],
    }
    text = "\n".join(f"{u.id}: " + " ".join(str(spec.domain[i]) for i in u.member_ids) for u in mv)
    return doc, text + "\n", 0


def _regimes(args):
    if args.regime:
        return (_load(args.regime, regime_from_document),)
    return preset(args.preset)


def _assessment(regimes):
    reports = [assess(r) for r in regimes]
    return {"reports": [r.to_document() for r in reports]}, "\n".join(r.render_text() for r in reports)


def cmd_assess(args):
    adoc, text = _assessment(_regimes(args))
    return {"command": "assess", "assessment": adoc}, text, 0


def cmd_report(args):
    _, result = _verify(args.mechanism, args.spec)
    regimes = tuple(attach_dp(r, result) for r in _regimes(args))
    adoc, text = _assessment(regimes)
    doc = {
        "command": "report",
        "satisfied": result.satisfied,
        "fingerprint": result.fingerprint,
        "epsilon": {u: _eps_doc(v) for u, v in result.per_universe_tightest.items()},
        "witness": _witness_doc(result.witness),
        "notes": list(result.notes),
        "assessment": adoc,
    }
    return doc, text, 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpspec", description="Verify finite mechanisms against DP specifications.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--format", choices=("text", "structured"), default="text")
        p.add_argument("--output", help="write the report here instead of stdout")
        p.set_defaults(func=func)
        return p

    p = add("verify", cmd_verify, "check a mechanism against a specification")
    p.add_argument("--mechanism", required=True)
    p.add_argument("--spec", required=True)

    p = add("epsilon", cmd_epsilon, "tightest per-universe budget of a mechanism")
    p.add_argument("--mechanism", required=True)
    p.add_argument("--spec-sans-budget", required=True)

    p = add("compose", cmd_compose, "add up budgets of specifications sharing one flavor")
    p.add_argument("--spec", action="append", required=True)
    p.add_argument("--label", action="append")
    p.add_argument("--ledger", help="existing ledger to extend")

    p = add("allocate", cmd_allocate, "split a total budget across projects")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec")
    src.add_argument("--ledger")
    p.add_argument("--weight", action="append", type=_parse_weight, required=True, metavar="NAME=W")

    p = add("universes", cmd_universes, "print the partition induced by an invariant")
    p.add_argument("--spec", required=True)
    p.add_argument("--statistic", required=True)

    for name, func, help_ in (
        ("assess", cmd_assess, "Five Safes assessment of a regime"),
        ("report", cmd_report, "verify, attach the result to a regime, and assess"),
    ):
        p = add(name, func, help_)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--regime")
        src.add_argument("--preset", choices=[k.value for k in PresetKind])
        if name == "report":
            p.add_argument("--mechanism", required=True)
            p.add_argument("--spec", required=True)
    return parser


def render(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc, text, status = args.func(args)
    except InputError as exc:
        print(f"dpspec {args.command}: error: {exc}", file=sys.stderr)
        return 2
    out = render(doc) if args.format == "structured" else text
    if args.output:
        Path(args.output).write_text(out)
    else:
        sys.stdout.write(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
