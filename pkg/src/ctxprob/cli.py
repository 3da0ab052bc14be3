"""Command-line front-end.

Exit codes: 0 all checks pass / value printed, 1 a check failed,
2 usage, IO, or schema errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .classical import verify_classical_collapse
from .errors import (
    CaseMismatchError,
    ConditionNullError,
    CtxprobError,
    ModelFileError,
    ParseError,
)
from .language import parse_proposition
from .lattice import check_gpm, check_ortholattice
from .measurement import conditioning_case, mean_conditional
from .model import ContextualModel, verify_structure
from .modelfile import load_model
from .probability import verify_kolmogorov
from .quantum import DensityState, HilbertModel, ProjectorProperty, verify_born_reconstruction
from .report import Report

DEFAULT_DEPTH = 2
DEFAULT_THETAS = "0,pi/6,pi/3,pi/2,2pi/3,5pi/6,pi"


def run_checks(model: ContextualModel, depth: int = DEFAULT_DEPTH) -> Report:
    """All checks applicable to a loaded model, in deterministic order."""
    from .measurement import verify_procedure_independence

    report = Report("check")
    report.extend(verify_kolmogorov(model.space), prefix="kolmogorov/")
    report.extend(verify_structure(model), prefix="structure/")
    report.extend(verify_procedure_independence(model, depth), prefix="independence/")
    if model.lattice is not None:
        report.extend(check_ortholattice(model.lattice), prefix="lattice/")
        if set(model.lattice.elements) <= set(model.property_ids):
            for state in model.state_ids:
                values = {e: model.q_probability(state, e) for e in model.lattice.elements}
                report.extend(
                    check_gpm(values, model.lattice, model.tolerance),
                    prefix=f"gpm[{state}]/",
                )
        else:
            report.add(
                "gpm",
                "skip",
                "lattice elements are not all model properties; no table to check",
            )
    if model.kind == "classical":
        report.extend(verify_classical_collapse(model), prefix="classical/")
    return report


def _emit(report: Report, fmt: str) -> None:
    if fmt == "json":
        print(report.to_json_lines())
    else:
        print(report.render_text())


def cmd_check(args) -> int:
    model = load_model(args.model)
    report = run_checks(model, args.depth)
    _emit(report, args.format)
    return 0 if report.passed else 1


def cmd_eval(args) -> int:
    model = load_model(args.model)
    target = parse_proposition(args.target, model.entity)
    condition = parse_proposition(args.condition, model.entity)

    attempts = []
    if args.procedure is not None:
        attempts.append(model.catalog.get(args.procedure))
    else:
        attempts.append(None)  # the procedure-free state-only case
        attempts.extend(model.catalog.sorted_procedures())

    last_error: Exception | None = None
    for procedure in attempts:
        try:
            case = conditioning_case(model, target, condition, procedure)
            value = mean_conditional(model, target, condition, procedure)
        except (CaseMismatchError, ConditionNullError) as err:
            last_error = err
            continue
        pid = procedure.id if procedure is not None else "-"
        if args.format == "json":
            print(
                json.dumps(
                    {
                        "value": float(value),
                        "exact": str(value),
                        "case": case,
                        "procedure": pid,
                    },
                    sort_keys=True,
                )
            )
        else:
            print(f"{float(value)!r} case={case} procedure={pid}")
        return 0
    raise last_error if last_error is not None else CaseMismatchError("no admissible procedure")


def cmd_lattice(args) -> int:
    model = load_model(args.model)
    if model.lattice is None:
        print("error: model declares no lattice tables", file=sys.stderr)
        return 2
    report = Report("lattice")
    report.extend(check_ortholattice(model.lattice), prefix="ortholattice/")
    if set(model.lattice.elements) <= set(model.property_ids):
        for state in model.state_ids:
            values = {e: model.q_probability(state, e) for e in model.lattice.elements}
            report.extend(
                check_gpm(values, model.lattice, model.tolerance), prefix=f"gpm[{state}]/"
            )
    _emit(report, args.format)
    return 0 if report.passed else 1


def _parse_theta(token: str) -> float:
    token = token.strip().replace(" ", "")
    if not token:
        raise ValueError("empty angle")
    if "pi" in token:
        head, _, tail = token.partition("pi")
        factor = 1.0 if head in ("", "+") else -1.0 if head == "-" else float(head)
        divisor = float(tail[1:]) if tail.startswith("/") else 1.0
        if tail and not tail.startswith("/"):
            raise ValueError(f"cannot parse angle {token!r}")
        return factor * math.pi / divisor
    return float(token)


def cmd_demo_born(args) -> int:
    thetas = [_parse_theta(tok) for tok in args.theta.split(",")]
    names = [f"S{i + 1}" for i in range(len(thetas))]
    states = []
    for name, theta in zip(names, thetas):
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        import numpy as np

        vec = np.array([c, s], dtype=complex)
        states.append(DensityState(name, np.outer(vec, vec.conj())))
    import numpy as np

    proj = ProjectorProperty("up", np.array([[1, 0], [0, 0]], dtype=complex))
    model = HilbertModel(2, states, [proj])
    report = verify_born_reconstruction(model, args.segments)

    if args.format == "json":
        print(report.to_json_lines())
    else:
        print(f"{'theta':>12} {'born':>12} {'band mean':>12} {'gap':>12} {'bound':>12}")
        bound = 1.0 / args.segments
        for theta, entry in zip(thetas, report.entries):
            if not entry.name.startswith("state "):
                continue
            born_s, mean_s = entry.detail.split(",")[0], entry.detail.split(",")[1]
            born_v = float(born_s.split("=")[1])
            mean_v = float(mean_s.split("=")[1].split(" ")[0])
            print(
                f"{theta:12.6f} {born_v:12.6f} {mean_v:12.6f} "
                f"{float(entry.gap):12.3e} {bound:12.3e}"
            )
        print(report.render_text())
    return 0 if report.passed else 1


def cmd_report(args) -> int:
    text = Path(args.report).read_text() if args.report != "-" else sys.stdin.read()
    entries = [json.loads(line) for line in text.splitlines() if line.strip()]
    if args.format == "json":
        for entry in entries:
            print(json.dumps(entry, sort_keys=True, separators=(",", ":")))
        return 0
    for entry in entries:
        if "summary" in entry:
            c = entry["summary"]
            print(
                f"-- {entry.get('report', 'report')}: {c.get('pass', 0)} passed, "
                f"{c.get('fail', 0)} failed, {c.get('skip', 0)} skipped, {c.get('info', 0)} info"
            )
            continue
        line = f"[{entry['status'].upper():>4}] {entry['check']}"
        if entry.get("detail"):
            line += f": {entry['detail']}"
        print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctxprob",
        description="Verify and query contextual probability models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="run every applicable verification suite")
    p_check.add_argument("model", help="model file (JSON)")
    p_check.add_argument("--depth", type=int, default=DEFAULT_DEPTH,
                         help="formula depth for the procedure-independence check")
    p_check.add_argument("--format", choices=["text", "json"], default="text")
    p_check.set_defaults(func=cmd_check)

    p_eval = sub.add_parser("eval", help="evaluate a mean conditional probability")
    p_eval.add_argument("model")
    p_eval.add_argument("target", help="target proposition, e.g. 'prop(E,c1)'")
    p_eval.add_argument("condition", help="conditioning proposition, e.g. 'state(S1)'")
    p_eval.add_argument("--procedure", help="procedure id (default: first admissible)")
    p_eval.add_argument("--format", choices=["text", "json"], default="text")
    p_eval.set_defaults(func=cmd_eval)

    p_lat = sub.add_parser("lattice", help="check the model's lattice tables and measures")
    p_lat.add_argument("model")
    p_lat.add_argument("--format", choices=["text", "json"], default="text")
    p_lat.set_defaults(func=cmd_lattice)

    p_born = sub.add_parser(
        "demo-born", help="compare trace probabilities against band-model means"
    )
    p_born.add_argument("--theta", default=DEFAULT_THETAS,
                        help="comma-separated angles; 'pi/6' style accepted")
    p_born.add_argument("--segments", type=int, default=10_000)
    p_born.add_argument("--format", choices=["text", "json"], default="text")
    p_born.set_defaults(func=cmd_demo_born)

    p_rep = sub.add_parser("report", help="re-render a saved JSON report stream")
    p_rep.add_argument("report", help="JSON-lines report file, or - for stdin")
    p_rep.add_argument("--format", choices=["text", "json"], default="text")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModelFileError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (CtxprobError, ValueError, OSError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
